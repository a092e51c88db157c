#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vbd/battery.hpp"
#include "vbd/distributions.hpp"
#include "vbd/random_fields.hpp"

using namespace vbd;

TEST_CASE("point mass pairing follows the stencil with sign (-1)^order") {
  const ManifoldPtr m = make_circle(32);
  const double h = m->axis(0).spacing;
  const std::size_t p = 11;
  const GridFunction wf =
      grid_function(m, [](std::span<const double> x) { return std::cos(x[0]) + 2.0; });
  std::vector<double> wv(wf.values);
  const TestDensity w(m, std::move(wv));

  CHECK(pair(ScalarDistribution::delta(m, p), w) == w.value(p));
  const double d1 = (w.value(12) - w.value(10)) / (2.0 * h);
  CHECK(std::abs(pair(ScalarDistribution::delta(m, p, 1), w) - (-d1)) <= 1e-14);
  const double d2 = (w.value(12) - 2.0 * w.value(11) + w.value(10)) / (h * h);
  CHECK(std::abs(pair(ScalarDistribution::delta(m, p, 2), w) - d2) <= 1e-12);
  CHECK(std::abs(pair(ScalarDistribution::delta(m, p, 1, -3.0), w) - 3.0 * d1) <= 1e-13);
}

TEST_CASE("regular pairing matches weighted quadrature") {
  const ManifoldPtr m = make_circle(64);
  SeededRng rng(kDefaultSeed);
  const GridFunction f = random_smooth_function(m, rng);
  const TestDensity w = random_test_density(m, rng);
  const ScalarDistribution u = embed_function(f);
  GridFunction wgrid(m, std::vector<double>(w.values().begin(), w.values().end()));
  CHECK(std::abs(pair(u, w) - quad(multiply(f, wgrid))) <= 1e-15);
}

TEST_CASE("canonical form sorts, merges and drops zeros") {
  const ManifoldPtr m = make_circle(16);
  const ScalarDistribution u(m, std::nullopt,
                             {{9, 1, 2.0}, {3, 0, 1.0}, {9, 1, -2.0}, {5, 2, 0.5}, {3, 0, 4.0}});
  REQUIRE(u.points().size() == 2);
  CHECK(u.points()[0].node == 3);
  CHECK(u.points()[0].order == 0);
  CHECK(u.points()[0].weight == 5.0);
  CHECK(u.points()[1].node == 5);
  CHECK(u.points()[1].order == 2);
  CHECK_FALSE(u.has_regular());
}

TEST_CASE("canonical form rejects invalid atoms") {
  const ManifoldPtr m = make_circle(16);
  CHECK_THROWS_AS(ScalarDistribution(m, std::nullopt, {{3, 3, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ScalarDistribution(m, std::nullopt, {{99, 0, 1.0}}), std::invalid_argument);
  const ManifoldPtr iv = make_interval(16);
  // Derivative atom in the boundary layer is rejected; order zero is fine.
  CHECK_THROWS_AS(ScalarDistribution(iv, std::nullopt, {{0, 1, 1.0}}), std::invalid_argument);
  CHECK_NOTHROW(ScalarDistribution(iv, std::nullopt, {{0, 0, 1.0}}));
  // Atom budget counts canonical (node, order) pairs, so duplicates merge
  // under it while distinct atoms past the cap are rejected.
  std::vector<PointMass> merged;
  for (std::size_t k = 0; k < 70; ++k) merged.push_back({k % 16, 0, 1.0});
  CHECK_NOTHROW(ScalarDistribution(m, std::nullopt, merged));
  const ManifoldPtr big = make_circle(128);
  std::vector<PointMass> many;
  for (std::size_t k = 0; k < 70; ++k) many.push_back({k, 0, 1.0});
  CHECK_THROWS_AS(ScalarDistribution(big, std::nullopt, many), std::invalid_argument);
}

TEST_CASE("multiplication by a smooth function: order zero") {
  const ManifoldPtr m = make_circle(32);
  const std::size_t p = 7;
  const GridFunction g =
      grid_function(m, [](std::span<const double> x) { return 2.0 + std::sin(x[0]); });
  const ScalarDistribution gu = mod_mul(g, ScalarDistribution::delta(m, p));
  REQUIRE(gu.points().size() == 1);
  CHECK(gu.points()[0].order == 0);
  CHECK(gu.points()[0].weight == g.value(p));
}

TEST_CASE("multiplication is exactly adjoint to density scaling: order one") {
  // <g*delta'_p, w> must equal <delta'_p, g*w> to rounding; the product
  // rule atoms are chosen so both sides expand to the same stencil sum.
  const ManifoldPtr m = make_circle(32);
  const double h = m->axis(0).spacing;
  const std::size_t p = 13;
  const GridFunction g =
      grid_function(m, [](std::span<const double> x) { return std::cos(2.0 * x[0]) + 3.0; });
  SeededRng rng(kDefaultSeed);
  const TestDensity w = random_test_density(m, rng);

  const ScalarDistribution u = ScalarDistribution::delta(m, p, 1, 1.7);
  const double lhs = pair(mod_mul(g, u), w);
  const double rhs = pair(u, scaled(w, g));
  CHECK(std::abs(lhs - rhs) <= 1e-13);

  // Frozen expansion: the adjoint value is -1.7 * d/dx[g*w] at p by the
  // centered stencil.
  const double gw_plus = g.value(14) * w.value(14);
  const double gw_minus = g.value(12) * w.value(12);
  const double expect = -1.7 * (gw_plus - gw_minus) / (2.0 * h);
  CHECK(std::abs(lhs - expect) <= 1e-12);

  // And the atom decomposition is the discrete product rule.
  const ScalarDistribution gu = mod_mul(g, u);
  REQUIRE(gu.points().size() == 3);
  const double gp = g.value(14), gm = g.value(12);
  const double avg = 0.5 * (gp + gm);
  const double d1 = (gp - gm) / (2.0 * h);
  CHECK(gu.points()[0].order == 0);
  CHECK(std::abs(gu.points()[0].weight - (-1.7 * d1)) <= 1e-15);
  CHECK(gu.points()[1].order == 1);
  CHECK(std::abs(gu.points()[1].weight - 1.7 * avg) <= 1e-15);
  CHECK(gu.points()[2].order == 2);
  CHECK(std::abs(gu.points()[2].weight - (-1.7 * 0.5 * h * h * d1)) <= 1e-15);
}

TEST_CASE("multiplication is exactly adjoint to density scaling: order two") {
  const ManifoldPtr m = make_circle(32);
  const double h = m->axis(0).spacing;
  const std::size_t p = 20;
  const GridFunction g =
      grid_function(m, [](std::span<const double> x) { return std::exp(std::sin(x[0])); });
  SeededRng rng(SeededRng(kDefaultSeed).fork("order-two").bits());
  const TestDensity w = random_test_density(m, rng);

  const ScalarDistribution u = ScalarDistribution::delta(m, p, 2, -0.8);
  const double lhs = pair(mod_mul(g, u), w);
  const double rhs = pair(u, scaled(w, g));
  CHECK(std::abs(lhs - rhs) <= 1e-12);

  const ScalarDistribution gu = mod_mul(g, u);
  REQUIRE(gu.points().size() == 3);
  const double gp = g.value(21), gm = g.value(19), g0 = g.value(20);
  const double avg = 0.5 * (gp + gm);
  const double d1 = (gp - gm) / (2.0 * h);
  const double d2 = (gp - 2.0 * g0 + gm) / (h * h);
  CHECK(std::abs(gu.points()[0].weight - (-0.8 * d2)) <= 1e-14);
  CHECK(std::abs(gu.points()[1].weight - (-0.8 * -2.0 * d1)) <= 1e-14);
  CHECK(std::abs(gu.points()[2].weight - (-0.8 * avg)) <= 1e-14);
}

TEST_CASE("multiplication maps the regular part pointwise") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  const GridFunction f = random_smooth_function(m, rng);
  const GridFunction g = random_smooth_function(m, rng);
  const ScalarDistribution gu = mod_mul(g, embed_function(f));
  REQUIRE(gu.has_regular());
  for (std::size_t n = 0; n < m->node_count(); n += 3)
    CHECK(std::abs(gu.regular().value(n) - g.value(n) * f.value(n)) <= 1e-15);
}

TEST_CASE("module multiplication is associative across the battery") {
  const ManifoldPtr m = make_circle(64);
  SeededRng rng(kDefaultSeed);
  const GridFunction f = random_smooth_function(m, rng);
  const GridFunction g = random_smooth_function(m, rng);
  const ScalarDistribution u = random_distribution(m, rng, 2);
  const ScalarDistribution a = mod_mul(multiply(f, g), u);
  const ScalarDistribution b = mod_mul(f, mod_mul(g, u));
  double dev = 0.0;
  for (const TestDensity& w : density_battery(m, 6))
    dev = std::max(dev, std::abs(pair(a, w) - pair(b, w)));
  CHECK(dev <= 1e-8);
}

TEST_CASE("add merges and scale distributes over pairings") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  const ScalarDistribution u = random_distribution(m, rng, 2);
  const ScalarDistribution v = random_distribution(m, rng, 1);
  const ScalarDistribution sum = add(u, v);
  const ScalarDistribution sc = scale(u, -2.0);
  for (const TestDensity& w : density_battery(m, 4)) {
    CHECK(std::abs(pair(sum, w) - (pair(u, w) + pair(v, w))) <= 1e-13);
    CHECK(std::abs(pair(sc, w) + 2.0 * pair(u, w)) <= 1e-13);
  }
}

TEST_CASE("battery equality utility") {
  const ManifoldPtr m = make_circle(32);
  SeededRng rng(kDefaultSeed);
  const ScalarDistribution u = random_distribution(m, rng, 1);
  double dev = -1.0;
  CHECK(equal(u, u, 4, 1e-15, kDefaultSeed, &dev));
  CHECK(dev == 0.0);
  const ScalarDistribution shifted = add(u, ScalarDistribution::delta(m, 3, 0, 1e-3));
  CHECK_FALSE(equal(u, shifted, 4, 1e-6, kDefaultSeed, &dev));
  CHECK(dev >= 0.9e-3);
}
