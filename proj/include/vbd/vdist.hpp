#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/bundles.hpp"
#include "vbd/distributions.hpp"
#include "vbd/geometry.hpp"
#include "vbd/sections.hpp"

namespace vbd {

/// One term of a tensor-form vector distribution: a smooth section times a
/// scalar distribution coefficient.
struct TensorTerm {
  Section section;
  ScalarDistribution coeff;
};

/// Vector-valued distribution in tensor form: a finite sum of
/// section (x) scalar-distribution terms.
class TensorRep {
 public:
  static constexpr int kMaxTerms = 64;

  explicit TensorRep(BundlePtr bundle) : bundle_(std::move(bundle)) {
    if (!bundle_) throw std::invalid_argument("TensorRep: null bundle");
  }

  TensorRep(BundlePtr bundle, std::vector<TensorTerm> terms)
      : bundle_(std::move(bundle)), terms_(std::move(terms)) {
    if (!bundle_) throw std::invalid_argument("TensorRep: null bundle");
    if (terms_.size() > kMaxTerms) throw std::invalid_argument("TensorRep: term budget exceeded");
    for (const TensorTerm& t : terms_) {
      if (!t.section.bundle()->same_fibers(*bundle_) ||
          t.section.bundle()->is_dual() != bundle_->is_dual())
        throw std::invalid_argument("TensorRep: term section lives in a different bundle");
      require_same_grid(*t.coeff.base(), *bundle_->base(), "TensorRep");
    }
  }

  const BundlePtr& bundle() const { return bundle_; }
  std::span<const TensorTerm> terms() const { return terms_; }

 private:
  BundlePtr bundle_;
  std::vector<TensorTerm> terms_;
};

/// Vector-valued distribution in coordinate form: one scalar distribution
/// per ambient component. Canonical representatives satisfy the projector
/// compatibility enforced by canonicalize_coords.
class CoordRep {
 public:
  CoordRep(BundlePtr bundle, std::vector<ScalarDistribution> coords)
      : bundle_(std::move(bundle)), coords_(std::move(coords)) {
    if (!bundle_) throw std::invalid_argument("CoordRep: null bundle");
    if (coords_.size() != static_cast<std::size_t>(bundle_->ambient_dim()))
      throw std::invalid_argument("CoordRep: need one coordinate per ambient dimension");
    for (const ScalarDistribution& c : coords_)
      require_same_grid(*c.base(), *bundle_->base(), "CoordRep");
  }

  const BundlePtr& bundle() const { return bundle_; }
  std::span<const ScalarDistribution> coords() const { return coords_; }
  const ScalarDistribution& coord(int i) const { return coords_.at(static_cast<std::size_t>(i)); }

 private:
  BundlePtr bundle_;
  std::vector<ScalarDistribution> coords_;
};

/// Vector-valued distribution as a function-linear functional on sections
/// of the dual bundle, stored by its values on the dual frame generators.
/// Function-linearity makes those values determine the whole map.
class HomRep {
 public:
  HomRep(BundlePtr bundle, std::vector<ScalarDistribution> generator_values)
      : bundle_(std::move(bundle)), gen_values_(std::move(generator_values)) {
    if (!bundle_) throw std::invalid_argument("HomRep: null bundle");
    if (gen_values_.size() != static_cast<std::size_t>(bundle_->ambient_dim()))
      throw std::invalid_argument("HomRep: need one value per dual frame generator");
    for (const ScalarDistribution& v : gen_values_)
      require_same_grid(*v.base(), *bundle_->base(), "HomRep");
  }

  const BundlePtr& bundle() const { return bundle_; }
  std::span<const ScalarDistribution> generator_values() const { return gen_values_; }

  /// Value on an arbitrary dual section, by expanding it over the dual
  /// frame: t = sum_i t_i eps_i with t_i the ambient components, so
  /// l(t) = sum_i t_i * l(eps_i).
  ScalarDistribution evaluate(const Section& t) const {
    if (!t.bundle()->same_fibers(*bundle_) || t.bundle()->is_dual() == bundle_->is_dual())
      throw std::invalid_argument("HomRep::evaluate: argument is not a dual section");
    ScalarDistribution acc(bundle_->base());
    for (int i = 0; i < bundle_->ambient_dim(); ++i)
      acc = add(acc, mod_mul(t.component_function(i),
                             gen_values_[static_cast<std::size_t>(i)]));
    return acc;
  }

 private:
  BundlePtr bundle_;
  std::vector<ScalarDistribution> gen_values_;
};

/// One battery element for pairing-based comparison of vector
/// distributions: a dual section together with a scalar test density.
struct DualDensity {
  Section dual_section;
  TestDensity density;
};

/// Full duality pairing of a tensor-form distribution with a dual section
/// and a density: sum_j < v_j, (s_j . t) w >.
inline double pair_vdist(const TensorRep& u, const Section& t, const TestDensity& w) {
  double acc = 0.0;
  for (const TensorTerm& term : u.terms())
    acc += pair(term.coeff, scaled(w, contract(term.section, t)));
  return acc;
}

inline double pair_vdist(const TensorRep& u, const DualDensity& t) {
  return pair_vdist(u, t.dual_section, t.density);
}

/// Contraction of a tensor-form distribution against one dual section,
/// producing the scalar distribution sum_j (s_j . t) * v_j.
inline ScalarDistribution nu_apply(const TensorRep& u, const Section& t) {
  if (!t.bundle()->same_fibers(*u.bundle()) || t.bundle()->is_dual() == u.bundle()->is_dual())
    throw std::invalid_argument("nu_apply: argument is not a dual section");
  ScalarDistribution acc(u.bundle()->base());
  for (const TensorTerm& term : u.terms())
    acc = add(acc, mod_mul(contract(term.section, t), term.coeff));
  return acc;
}

/// Tensor form to functional form: record the contraction against every
/// dual frame generator.
inline HomRep nu_tensor_to_hom(const TensorRep& u) {
  const std::vector<Section> gens = dual_generators(u.bundle());
  std::vector<ScalarDistribution> values;
  values.reserve(gens.size());
  for (const Section& g : gens) values.push_back(nu_apply(u, g));
  return HomRep(u.bundle(), std::move(values));
}

/// Projector compatibility pass: coords'_i = sum_k P_ik * coords_k. Leaves
/// pairings against dual sections unchanged and is idempotent up to
/// rounding.
inline CoordRep canonicalize_coords(const CoordRep& c) {
  const BundlePtr& e = c.bundle();
  const int amb = e->ambient_dim();
  std::vector<ScalarDistribution> out;
  out.reserve(static_cast<std::size_t>(amb));
  for (int i = 0; i < amb; ++i) {
    ScalarDistribution acc(e->base());
    for (int k = 0; k < amb; ++k) {
      std::vector<double> pik(e->base()->node_count());
      for (std::size_t node = 0; node < pik.size(); ++node)
        pik[node] = e->proj_entry(node, i, k);
      acc = add(acc, mod_mul(GridFunction(e->base(), std::move(pik)), c.coord(k)));
    }
    out.push_back(std::move(acc));
  }
  return CoordRep(e, std::move(out));
}

/// Functional form to coordinate form: evaluate on the dual frame
/// generators, then canonicalize. On a trivial bundle the generators are
/// the constant basis covectors and evaluation reduces rank by one
/// component at a time, so this is the concrete inverse of the embedding.
inline CoordRep hom_to_coord(const HomRep& l) {
  const std::vector<Section> gens = dual_generators(l.bundle());
  std::vector<ScalarDistribution> coords;
  coords.reserve(gens.size());
  for (const Section& g : gens) coords.push_back(l.evaluate(g));
  return canonicalize_coords(CoordRep(l.bundle(), std::move(coords)));
}

/// Coordinate form back to tensor form over the frame generators:
/// u = sum_i b_i (x) coords_i.
inline TensorRep coord_to_tensor(const CoordRep& c) {
  const std::vector<Section> gens = frame_generators(c.bundle());
  std::vector<TensorTerm> terms;
  for (int i = 0; i < c.bundle()->ambient_dim(); ++i) {
    if (c.coord(i).structurally_zero()) continue;
    terms.push_back({gens[static_cast<std::size_t>(i)], c.coord(i)});
  }
  return TensorRep(c.bundle(), std::move(terms));
}

/// Pushforward of a tensor-form distribution: push each section term.
inline TensorRep pushforward_vdist(const BundleMorphism& mu, const TensorRep& u) {
  if (!mu.source()->same_fibers(*u.bundle()) || mu.source()->is_dual() != u.bundle()->is_dual())
    throw std::invalid_argument("pushforward_vdist: distribution not in the morphism source");
  std::vector<TensorTerm> terms;
  terms.reserve(u.terms().size());
  for (const TensorTerm& t : u.terms()) terms.push_back({pushforward(mu, t.section), t.coeff});
  return TensorRep(mu.target(), std::move(terms));
}

/// Pushforward in functional form: precompose with the dual pullback,
/// evaluated on the target's dual frame.
inline HomRep pushforward_vdist(const BundleMorphism& mu, const HomRep& l) {
  if (!mu.source()->same_fibers(*l.bundle()) || mu.source()->is_dual() != l.bundle()->is_dual())
    throw std::invalid_argument("pushforward_vdist: distribution not in the morphism source");
  const std::vector<Section> gens = dual_generators(mu.target());
  std::vector<ScalarDistribution> values;
  values.reserve(gens.size());
  for (const Section& g : gens) values.push_back(l.evaluate(pullback_dual(mu, g)));
  return HomRep(mu.target(), std::move(values));
}

/// Module action on each representation: multiply the scalar data by the
/// function, leaving the smooth parts alone.
inline TensorRep mod_mul_vdist(const GridFunction& f, const TensorRep& u) {
  std::vector<TensorTerm> terms;
  terms.reserve(u.terms().size());
  for (const TensorTerm& t : u.terms()) terms.push_back({t.section, mod_mul(f, t.coeff)});
  return TensorRep(u.bundle(), std::move(terms));
}

inline CoordRep mod_mul_vdist(const GridFunction& f, const CoordRep& c) {
  std::vector<ScalarDistribution> coords;
  coords.reserve(c.coords().size());
  for (const ScalarDistribution& d : c.coords()) coords.push_back(mod_mul(f, d));
  return CoordRep(c.bundle(), std::move(coords));
}

inline HomRep mod_mul_vdist(const GridFunction& f, const HomRep& l) {
  std::vector<ScalarDistribution> values;
  values.reserve(l.generator_values().size());
  for (const ScalarDistribution& d : l.generator_values()) values.push_back(mod_mul(f, d));
  return HomRep(l.bundle(), std::move(values));
}

inline TensorRep add(const TensorRep& a, const TensorRep& b) {
  if (!a.bundle()->same_fibers(*b.bundle()) || a.bundle()->is_dual() != b.bundle()->is_dual())
    throw std::invalid_argument("add: tensor representations over different bundles");
  std::vector<TensorTerm> terms(a.terms().begin(), a.terms().end());
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return TensorRep(a.bundle(), std::move(terms));
}

inline TensorRep scale(const TensorRep& u, double c) {
  std::vector<TensorTerm> terms;
  terms.reserve(u.terms().size());
  for (const TensorTerm& t : u.terms()) terms.push_back({t.section, scale(t.coeff, c)});
  return TensorRep(u.bundle(), std::move(terms));
}

/// Largest pairing difference between two tensor-form distributions over a
/// battery of (dual section, density) probes.
inline double max_pairing_deviation(const TensorRep& a, const TensorRep& b,
                                    std::span<const DualDensity> battery) {
  double dev = 0.0;
  for (const DualDensity& t : battery)
    dev = std::max(dev, std::abs(pair_vdist(a, t) - pair_vdist(b, t)));
  return dev;
}

/// Largest coordinate-wise pairing difference over a density battery.
inline double max_coord_deviation(const CoordRep& a, const CoordRep& b,
                                  std::span<const TestDensity> battery) {
  if (a.bundle()->ambient_dim() != b.bundle()->ambient_dim())
    throw std::invalid_argument("max_coord_deviation: ambient dimensions differ");
  double dev = 0.0;
  for (int i = 0; i < a.bundle()->ambient_dim(); ++i)
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(a.coord(i), w) - pair(b.coord(i), w)));
  return dev;
}

/// Checks that pushforward commutes with the tensor-to-functional
/// conversion: converting then pushing equals pushing then converting.
/// Both routes are evaluated on the target's dual frame generators and the
/// resulting scalar distributions compared against the density battery.
inline bool naturality_check(const BundleMorphism& mu, const TensorRep& u,
                             std::span<const TestDensity> battery, double tol,
                             double* max_dev = nullptr) {
  const HomRep via_hom = pushforward_vdist(mu, nu_tensor_to_hom(u));
  const HomRep via_tensor = nu_tensor_to_hom(pushforward_vdist(mu, u));
  double dev = 0.0;
  for (int i = 0; i < mu.target()->ambient_dim(); ++i)
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(via_hom.generator_values()[static_cast<std::size_t>(i)], w) -
                                   pair(via_tensor.generator_values()[static_cast<std::size_t>(i)], w)));
  if (max_dev) *max_dev = dev;
  return dev <= tol;
}

}  // namespace vbd
