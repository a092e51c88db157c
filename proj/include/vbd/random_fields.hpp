#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "vbd/geometry.hpp"
#include "vbd/rng.hpp"

namespace vbd {

/// Random smooth scalar field: product over axes of a low-order profile.
/// Periodic axes draw a truncated Fourier series (harmonics 1..3, amplitude
/// decaying like 1/k); non-periodic axes draw a cubic polynomial. All
/// coefficients come from the supplied stream, so the field is a pure
/// function of the stream state.
inline GridFunction random_smooth_function(const ManifoldPtr& m, SeededRng& rng,
                                           double amplitude = 1.0) {
  struct Profile {
    bool periodic = false;
    std::array<double, 7> c{};  // fourier: a0,a1,b1,a2,b2,a3,b3; poly: c0..c3
  };
  std::vector<Profile> profiles(static_cast<std::size_t>(m->dim()));
  for (auto& p : profiles) {
    p.periodic = false;
    for (double& v : p.c) v = 0.0;
  }
  for (int a = 0; a < m->dim(); ++a) {
    Profile& p = profiles[static_cast<std::size_t>(a)];
    p.periodic = m->axis(a).periodic;
    const int n_coeff = p.periodic ? 7 : 4;
    for (int k = 0; k < n_coeff; ++k) p.c[static_cast<std::size_t>(k)] = rng.uniform(-0.5, 0.5);
  }
  std::vector<double> values(m->node_count());
  for (std::size_t node = 0; node < values.size(); ++node) {
    double v = amplitude;
    for (int a = 0; a < m->dim(); ++a) {
      const Profile& p = profiles[static_cast<std::size_t>(a)];
      const double x = m->coord(node, a);
      double f;
      if (p.periodic) {
        f = p.c[0];
        for (int k = 1; k <= 3; ++k)
          f += (p.c[static_cast<std::size_t>(2 * k - 1)] * std::cos(k * x) +
                p.c[static_cast<std::size_t>(2 * k)] * std::sin(k * x)) /
               static_cast<double>(k);
      } else {
        f = p.c[0] + x * (p.c[1] + x * (p.c[2] + x * p.c[3]));
      }
      v *= f;
    }
    values[node] = v;
  }
  return GridFunction(m, std::move(values));
}

/// Random smooth density: smooth field windowed to vanish exactly on every
/// boundary layer (sin^2 window along non-periodic axes, then exact zeros).
inline TestDensity random_test_density(const ManifoldPtr& m, SeededRng& rng,
                                       double amplitude = 1.0) {
  GridFunction f = random_smooth_function(m, rng, amplitude);
  std::vector<double> v = f.values;
  for (std::size_t node = 0; node < v.size(); ++node) {
    if (m->in_boundary_layer(node)) {
      v[node] = 0.0;
      continue;
    }
    for (int a = 0; a < m->dim(); ++a) {
      if (m->axis(a).periodic) continue;
      const double x = m->coord(node, a);
      const double w = std::sin(std::numbers::pi * x);
      v[node] *= w * w;
    }
  }
  return TestDensity(m, std::move(v));
}

/// A node outside every boundary layer, uniformly drawn.
inline std::size_t random_interior_node(const ManifoldPtr& m, SeededRng& rng) {
  std::vector<std::size_t> interior;
  interior.reserve(m->node_count());
  for (std::size_t node = 0; node < m->node_count(); ++node)
    if (!m->in_boundary_layer(node)) interior.push_back(node);
  if (interior.empty()) throw std::invalid_argument("random_interior_node: no interior nodes");
  return interior[rng.index(interior.size())];
}

/// Deterministic battery of test densities: the hat at every admissible
/// node, followed by `extra` random smooth densities from a stream forked
/// off `seed`. Used wherever two distributions are compared by pairing.
inline std::vector<TestDensity> density_battery(const ManifoldPtr& m, int extra,
                                                std::uint64_t seed = kDefaultSeed) {
  std::vector<TestDensity> batt;
  for (std::size_t node = 0; node < m->node_count(); ++node)
    if (!m->in_boundary_layer(node)) batt.push_back(TestDensity::hat(m, node));
  SeededRng rng = SeededRng(seed).fork("density-battery");
  for (int k = 0; k < extra; ++k) batt.push_back(random_test_density(m, rng));
  return batt;
}

}  // namespace vbd
