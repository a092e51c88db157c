#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vbd/battery.hpp"
#include "vbd/vdist.hpp"

using namespace vbd;

TEST_CASE("functional form of a point tensor term evaluates by multiplication") {
  // For u = s (x) delta_p on the trivial line bundle with s == 1, the
  // induced functional sends a dual section with component g to g(p) delta_p.
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = trivial_bundle(m, 1);
  const std::size_t p = 9;
  const Section one(e, std::vector<double>(m->node_count(), 1.0));
  const TensorRep u(e, {{one, ScalarDistribution::delta(m, p)}});
  const HomRep l = nu_tensor_to_hom(u);

  std::vector<double> gv(m->node_count());
  for (std::size_t n = 0; n < m->node_count(); ++n) gv[n] = std::cos(m->coord(n, 0)) + 2.0;
  const Section t(dual(e), gv);
  const ScalarDistribution lt = l.evaluate(t);
  REQUIRE(lt.points().size() == 1);
  CHECK(lt.points()[0].node == p);
  CHECK(std::abs(lt.points()[0].weight - gv[p]) <= 1e-15);
}

TEST_CASE("round trip through all three forms preserves pairings") {
  const ManifoldPtr m = make_circle(64);
  for (const BundlePtr& e : {trivial_bundle(m, 1), mobius(m), tensor(mobius(m), mobius(m)),
                             whitney_sum(mobius(m), complement(mobius(m)))}) {
    SeededRng rng = SeededRng(kDefaultSeed).fork("rt-" + std::to_string(e->ambient_dim()));
    const auto battery = pairing_battery(e, 10);
    for (int rep = 0; rep < 2; ++rep) {
      const TensorRep u = random_tensor_rep(e, rng);
      const TensorRep back = coord_to_tensor(hom_to_coord(nu_tensor_to_hom(u)));
      CHECK(max_pairing_deviation(u, back, battery) <= 1e-8);
    }
  }
}

TEST_CASE("nu is function-linear in the distribution slot") {
  const ManifoldPtr m = make_circle(64);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const auto battery = density_battery(m, 4);
  const TensorRep u = random_tensor_rep(e, rng);
  const GridFunction f = random_smooth_function(m, rng);
  const Section t = random_dual_section(e, rng);
  const ScalarDistribution a = nu_apply(mod_mul_vdist(f, u), t);
  const ScalarDistribution b = mod_mul(f, nu_apply(u, t));
  double dev = 0.0;
  for (const TestDensity& w : battery) dev = std::max(dev, std::abs(pair(a, w) - pair(b, w)));
  CHECK(dev <= 1e-8);
}

TEST_CASE("functional evaluation is function-linear in the dual section") {
  const ManifoldPtr m = make_circle(64);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const auto battery = density_battery(m, 4);
  const HomRep l = nu_tensor_to_hom(random_tensor_rep(e, rng));
  const GridFunction f = random_smooth_function(m, rng);
  const Section t = random_dual_section(e, rng);
  const ScalarDistribution a = l.evaluate(mod_mul(f, t));
  const ScalarDistribution b = mod_mul(f, l.evaluate(t));
  double dev = 0.0;
  for (const TestDensity& w : battery) dev = std::max(dev, std::abs(pair(a, w) - pair(b, w)));
  CHECK(dev <= 1e-8);
}

TEST_CASE("tensor relation: function can hop across the tensor sign") {
  const ManifoldPtr m = make_circle(64);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const auto battery = pairing_battery(e, 10);
  for (int rep = 0; rep < 3; ++rep) {
    const Section s = random_section(e, rng);
    const ScalarDistribution v = random_distribution(m, rng, 1);
    const GridFunction f = random_smooth_function(m, rng);
    const TensorRep left(e, {{mod_mul(f, s), v}});
    const TensorRep right(e, {{s, mod_mul(f, v)}});
    CHECK(max_pairing_deviation(left, right, battery) <= 1e-8);
  }
}

TEST_CASE("coordinate canonicalization is idempotent") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const auto battery = density_battery(m, 4);
  std::vector<ScalarDistribution> coords;
  for (int i = 0; i < e->ambient_dim(); ++i) coords.push_back(random_distribution(m, rng));
  const CoordRep raw(e, std::move(coords));
  const CoordRep once = canonicalize_coords(raw);
  const CoordRep twice = canonicalize_coords(once);
  CHECK(max_coord_deviation(once, twice, battery) <= 1e-10);
}

TEST_CASE("biproduct coordinates concatenate") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr a = mobius(m);
  const BundlePtr b = complement(a);
  SeededRng rng(kDefaultSeed);
  const auto battery = density_battery(m, 4);
  const TensorRep ua = random_tensor_rep(a, rng, 2);
  const TensorRep ub = random_tensor_rep(b, rng, 2);
  const TensorRep u = add(pushforward_vdist(whitney_inclusion(a, b, 0), ua),
                          pushforward_vdist(whitney_inclusion(a, b, 1), ub));
  const CoordRep cu = hom_to_coord(nu_tensor_to_hom(u));
  const CoordRep ca = hom_to_coord(nu_tensor_to_hom(ua));
  const CoordRep cb = hom_to_coord(nu_tensor_to_hom(ub));
  double dev = 0.0;
  for (int i = 0; i < 2; ++i)
    for (const TestDensity& w : battery) {
      dev = std::max(dev, std::abs(pair(cu.coord(i), w) - pair(ca.coord(i), w)));
      dev = std::max(dev, std::abs(pair(cu.coord(2 + i), w) - pair(cb.coord(i), w)));
    }
  CHECK(dev <= 1e-10);
}

TEST_CASE("pushforward of representations composes functorially") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const BundleMorphism iota = inclusion(e);
  const BundleMorphism pi = projection(e);
  const TensorRep u = random_tensor_rep(e, rng, 2);
  const TensorRep via_composite = pushforward_vdist(compose(pi, iota), u);
  const TensorRep via_steps = pushforward_vdist(pi, pushforward_vdist(iota, u));
  const auto battery = pairing_battery(e, 10);
  CHECK(max_pairing_deviation(via_composite, via_steps, battery) <= 1e-12);
}

TEST_CASE("naturality square commutes for the whole morphism suite") {
  const ManifoldPtr m = make_circle(64);
  const auto battery = density_battery(m, 4);
  for (const MorphismCase& mc : naturality_suite(m)) {
    SeededRng rng = SeededRng(kDefaultSeed).fork("nat-" + mc.name);
    const TensorRep u = random_tensor_rep(mc.morphism.source(), rng, 2);
    double dev = 0.0;
    const bool ok = naturality_check(mc.morphism, u, battery, 1e-8, &dev);
    INFO(mc.name << " deviation " << dev);
    CHECK(ok);
  }
}

TEST_CASE("pushforward of a functional acts by dual pullback") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const BundleMorphism iota = inclusion(e);
  const TensorRep u = random_tensor_rep(e, rng, 2);
  const HomRep pushed_then_converted = nu_tensor_to_hom(pushforward_vdist(iota, u));
  const HomRep converted_then_pushed = pushforward_vdist(iota, nu_tensor_to_hom(u));
  const auto battery = density_battery(m, 4);
  double dev = 0.0;
  for (std::size_t i = 0; i < pushed_then_converted.generator_values().size(); ++i)
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(pushed_then_converted.generator_values()[i], w) -
                                   pair(converted_then_pushed.generator_values()[i], w)));
  CHECK(dev <= 1e-8);
}

TEST_CASE("zero distribution round trips to zero pairings") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  const TensorRep zero(e);
  const TensorRep back = coord_to_tensor(hom_to_coord(nu_tensor_to_hom(zero)));
  const auto battery = pairing_battery(e, 6);
  for (const DualDensity& t : battery) CHECK(std::abs(pair_vdist(back, t)) <= 1e-15);
}

TEST_CASE("coordinate form respects the hat battery spike example") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = trivial_bundle(m, 1);
  const std::size_t p = 5;
  const Section one(e, std::vector<double>(m->node_count(), 1.0));
  const TensorRep u(e, {{one, ScalarDistribution::delta(m, p)}});
  const CoordRep c = hom_to_coord(nu_tensor_to_hom(u));
  for (std::size_t q = 0; q < m->node_count(); ++q) {
    const double v = pair(c.coord(0), TestDensity::hat(m, q));
    CHECK(std::abs(v - (q == p ? 1.0 : 0.0)) <= 1e-15);
  }
}
