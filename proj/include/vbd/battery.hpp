#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vbd/bundles.hpp"
#include "vbd/distributions.hpp"
#include "vbd/random_fields.hpp"
#include "vbd/rng.hpp"
#include "vbd/sections.hpp"
#include "vbd/vdist.hpp"

namespace vbd {

/// Random smooth section: independent smooth ambient components projected
/// into the fibers.
inline Section random_section(const BundlePtr& e, SeededRng& rng, double amplitude = 1.0) {
  const std::size_t amb = static_cast<std::size_t>(e->ambient_dim());
  std::vector<GridFunction> comps;
  comps.reserve(amb);
  for (std::size_t c = 0; c < amb; ++c)
    comps.push_back(random_smooth_function(e->base(), rng, amplitude));
  std::vector<double> v(e->base()->node_count() * amb);
  for (std::size_t node = 0; node < e->base()->node_count(); ++node)
    for (std::size_t c = 0; c < amb; ++c) v[node * amb + c] = comps[c].values[node];
  return Section::project(e, std::move(v));
}

inline Section random_dual_section(const BundlePtr& e, SeededRng& rng, double amplitude = 1.0) {
  return random_section(dual(e), rng, amplitude);
}

/// Random scalar distribution: a smooth regular part plus two point masses
/// at interior nodes with orders up to `max_order`.
inline ScalarDistribution random_distribution(const ManifoldPtr& m, SeededRng& rng,
                                              int max_order = 1) {
  GridFunction reg = random_smooth_function(m, rng);
  std::vector<PointMass> pts;
  for (int k = 0; k < 2; ++k) {
    const std::size_t node = random_interior_node(m, rng);
    const int order = static_cast<int>(rng.index(static_cast<std::size_t>(max_order + 1)));
    pts.push_back({node, order, rng.uniform(-1.0, 1.0)});
  }
  return ScalarDistribution(m, std::move(reg), std::move(pts));
}

/// Random tensor-form distribution with `terms` section (x) coefficient
/// terms.
inline TensorRep random_tensor_rep(const BundlePtr& e, SeededRng& rng, int terms = 3,
                                   int max_order = 1) {
  std::vector<TensorTerm> ts;
  ts.reserve(static_cast<std::size_t>(terms));
  for (int k = 0; k < terms; ++k)
    ts.push_back({random_section(e, rng), random_distribution(e->base(), rng, max_order)});
  return TensorRep(e, std::move(ts));
}

/// Deterministic battery of (dual section, density) probes for comparing
/// vector distributions by pairing.
inline std::vector<DualDensity> pairing_battery(const BundlePtr& e, int count,
                                                std::uint64_t seed = kDefaultSeed) {
  SeededRng rng = SeededRng(seed).fork("pairing-battery");
  std::vector<DualDensity> batt;
  batt.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Section t = random_dual_section(e, rng);
    TestDensity w = random_test_density(e->base(), rng);
    batt.push_back({std::move(t), std::move(w)});
  }
  return batt;
}

struct MorphismCase {
  std::string name;
  BundleMorphism morphism;
};

/// Fixed suite of six bundle morphisms over one circle, mixing ranks,
/// sources and targets: identity and negation on the twisted line bundle,
/// its ambient inclusion and projection, the zero map, and a shear of the
/// trivial plane bundle.
inline std::vector<MorphismCase> naturality_suite(const ManifoldPtr& m) {
  const BundlePtr mob = mobius(m);
  const BundlePtr triv2 = trivial_bundle(m, 2);
  std::vector<MorphismCase> cases;
  cases.push_back({"identity-twisted", identity_morphism(mob)});
  cases.push_back({"ambient-inclusion", inclusion(mob)});
  cases.push_back({"ambient-projection", projection(mob)});
  cases.push_back({"zero-map", zero_morphism(mob, mob)});
  cases.push_back({"negation-twisted", scale_morphism(mob, -1.0)});
  std::vector<double> shear;
  shear.reserve(m->node_count() * 4);
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    const double t = m->coord(node, 0);
    shear.push_back(1.0);
    shear.push_back(std::sin(t));
    shear.push_back(0.0);
    shear.push_back(1.0);
  }
  cases.push_back({"shear-plane", BundleMorphism(triv2, triv2, std::move(shear))});
  return cases;
}

}  // namespace vbd
