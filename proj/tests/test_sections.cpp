#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vbd/battery.hpp"
#include "vbd/random_fields.hpp"
#include "vbd/sections.hpp"

using namespace vbd;

TEST_CASE("section constructor enforces fiber compliance") {
  const ManifoldPtr m = make_circle(16);
  const BundlePtr e = mobius(m);
  // The ambient constant (1, 0) is not in the fiber away from t=0.
  std::vector<double> raw(m->node_count() * 2, 0.0);
  for (std::size_t n = 0; n < m->node_count(); ++n) raw[n * 2] = 1.0;
  CHECK_THROWS_AS(Section(e, raw), std::invalid_argument);
  // Projecting repairs it.
  const Section s = Section::project(e, raw);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    const Mat p = e->proj_mat(n);
    const auto f = s.fiber(n);
    const double px = p(0, 0) * 1.0;
    const double py = p(1, 0) * 1.0;
    CHECK(std::abs(f[0] - px) <= 1e-15);
    CHECK(std::abs(f[1] - py) <= 1e-15);
  }
}

TEST_CASE("module operations on sections") {
  const ManifoldPtr m = make_circle(16);
  const BundlePtr e = trivial_bundle(m, 2);
  std::vector<double> av(m->node_count() * 2), bv(m->node_count() * 2);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    av[n * 2] = 1.0;
    av[n * 2 + 1] = 2.0;
    bv[n * 2] = -3.0;
    bv[n * 2 + 1] = static_cast<double>(n);
  }
  const Section a(e, av);
  const Section b(e, bv);
  const GridFunction f = grid_function(m, [](std::span<const double> x) { return x[0]; });

  const Section sum = add(a, b);
  CHECK(sum.fiber(4)[0] == -2.0);
  CHECK(sum.fiber(4)[1] == 6.0);
  const Section sc = scale(a, 2.5);
  CHECK(sc.fiber(3)[1] == 5.0);
  const Section fa = mod_mul(f, a);
  CHECK(fa.fiber(5)[1] == 2.0 * m->coord(5, 0));
  CHECK(max_abs_diff(a, a) == 0.0);
  CHECK(max_abs_diff(a, b) > 0.0);
}

TEST_CASE("module axioms hold exactly on projected random sections") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  for (const BundlePtr& e :
       {mobius(m), trivial_bundle(m, 2), whitney_sum(mobius(m), complement(mobius(m)))}) {
    const Section s = random_section(e, rng);
    const Section t = random_section(e, rng);
    const GridFunction f = random_smooth_function(m, rng);
    const GridFunction g = random_smooth_function(m, rng);
    CHECK(max_abs_diff(mod_mul(f, add(s, t)), add(mod_mul(f, s), mod_mul(f, t))) <= 1e-14);
    CHECK(max_abs_diff(mod_mul(multiply(f, g), s), mod_mul(f, mod_mul(g, s))) <= 1e-14);
  }
}

TEST_CASE("contraction pairs a bundle with its dual") {
  const ManifoldPtr m = make_circle(16);
  const BundlePtr e = trivial_bundle(m, 2);
  std::vector<double> sv(m->node_count() * 2), tv(m->node_count() * 2);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    sv[n * 2] = 2.0;
    sv[n * 2 + 1] = 3.0;
    tv[n * 2] = 5.0;
    tv[n * 2 + 1] = -1.0;
  }
  const Section s(e, sv);
  const Section t(dual(e), tv);
  const GridFunction c = contract(s, t);
  for (std::size_t n = 0; n < m->node_count(); ++n) CHECK(c.value(n) == 7.0);
  // Same parity is rejected.
  CHECK_THROWS_AS(contract(s, s), std::invalid_argument);
}

TEST_CASE("frame and dual generators expand every section") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  for (const BundlePtr& e : {mobius(m), tensor(mobius(m), mobius(m)), trivial_bundle(m, 1)}) {
    const std::vector<Section> frame = frame_generators(e);
    const std::vector<Section> dual_frame = dual_generators(e);
    REQUIRE(frame.size() == static_cast<std::size_t>(e->ambient_dim()));
    const Section s = random_section(e, rng);
    Section acc = Section::zero(e);
    for (std::size_t i = 0; i < frame.size(); ++i)
      acc = add(acc, mod_mul(contract(s, dual_frame[i]), frame[i]));
    CHECK(max_abs_diff(acc, s) <= 1e-14);
    // The coefficient against the dual frame is the plain ambient component.
    const GridFunction c0 = contract(s, dual_frame[0]);
    for (std::size_t n = 0; n < m->node_count(); n += 5)
      CHECK(std::abs(c0.value(n) - s.fiber(n)[0]) <= 1e-14);
  }
}

TEST_CASE("fiberwise tensor of sections lands in the tensor bundle") {
  const ManifoldPtr m = make_circle(16);
  const BundlePtr e = mobius(m);
  SeededRng rng(kDefaultSeed);
  const Section s = random_section(e, rng);
  const Section t = random_section(e, rng);
  const Section st = fiberwise_tensor(s, t);
  CHECK(st.bundle()->ambient_dim() == 4);
  for (std::size_t n = 0; n < m->node_count(); n += 3) {
    const auto fs = s.fiber(n);
    const auto ft = t.fiber(n);
    const auto f = st.fiber(n);
    CHECK(std::abs(f[0] - fs[0] * ft[0]) <= 1e-15);
    CHECK(std::abs(f[1] - fs[0] * ft[1]) <= 1e-15);
    CHECK(std::abs(f[2] - fs[1] * ft[0]) <= 1e-15);
    CHECK(std::abs(f[3] - fs[1] * ft[1]) <= 1e-15);
  }
}

TEST_CASE("fiberwise external product lands on the product grid") {
  const ManifoldPtr ma = make_circle(16);
  const ManifoldPtr mb = make_circle(8);
  const BundlePtr a = mobius(ma);
  const BundlePtr b = trivial_bundle(mb, 1);
  SeededRng rng(kDefaultSeed);
  const Section s = random_section(a, rng);
  const Section t = random_section(b, rng);
  const Section x = fiberwise_external(s, t);
  CHECK(x.bundle()->base()->node_count() == 128);
  const std::size_t idx[2] = {4, 6};
  const std::size_t node = x.bundle()->base()->flat_index(idx);
  const auto fx = x.fiber(node);
  CHECK(std::abs(fx[0] - s.fiber(4)[0] * t.fiber(6)[0]) <= 1e-15);
  CHECK(std::abs(fx[1] - s.fiber(4)[1] * t.fiber(6)[0]) <= 1e-15);
}

TEST_CASE("pushforward and dual pullback are adjoint") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  for (const MorphismCase& mc : naturality_suite(m)) {
    const Section s = random_section(mc.morphism.source(), rng);
    const Section t = random_dual_section(mc.morphism.target(), rng);
    const GridFunction lhs = contract(pushforward(mc.morphism, s), t);
    const GridFunction rhs = contract(s, pullback_dual(mc.morphism, t));
    for (std::size_t n = 0; n < m->node_count(); ++n)
      CHECK(std::abs(lhs.value(n) - rhs.value(n)) <= 1e-13);
  }
}

TEST_CASE("adjacent jump measure distinguishes smooth from spiky") {
  const ManifoldPtr m = make_circle(64);
  const BundlePtr e = trivial_bundle(m, 1);
  const GridFunction smooth =
      grid_function(m, [](std::span<const double> x) { return std::sin(x[0]); });
  std::vector<double> sv(smooth.values);
  CHECK(max_adjacent_jump_over_h(Section(e, sv)) <= 1.1);
  std::vector<double> spike(m->node_count(), 0.0);
  spike[10] = 1.0;
  CHECK(max_adjacent_jump_over_h(Section(e, spike)) >= 1.0 / m->axis(0).spacing);
}
