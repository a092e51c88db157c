#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/bundles.hpp"
#include "vbd/geometry.hpp"
#include "vbd/linalg.hpp"

namespace vbd {

/// A section of a projector bundle: one ambient vector per node, lying in
/// the fiber (P v = v) at every node. Construction validates fiber
/// compliance; smoothness is a measurement, not a gate.
class Section {
 public:
  static constexpr double kFiberTol = 1e-10;

  Section(BundlePtr bundle, std::vector<double> values)
      : bundle_(std::move(bundle)), values_(std::move(values)) {
    if (!bundle_) throw std::invalid_argument("Section: null bundle");
    const int amb = bundle_->ambient_dim();
    if (values_.size() != bundle_->base()->node_count() * static_cast<std::size_t>(amb))
      throw std::invalid_argument("Section: value count does not match bundle");
    for (std::size_t node = 0; node < bundle_->base()->node_count(); ++node) {
      const auto v = fiber(node);
      const auto pv = matvec(bundle_->proj_mat(node), v);
      for (int c = 0; c < amb; ++c)
        if (std::abs(pv[static_cast<std::size_t>(c)] - v[static_cast<std::size_t>(c)]) > kFiberTol)
          throw std::invalid_argument("Section: values leave the fiber at node " +
                                      std::to_string(node));
    }
  }

  /// Projects arbitrary ambient values into the fibers, then constructs.
  static Section project(const BundlePtr& bundle, std::vector<double> values) {
    const int amb = bundle->ambient_dim();
    if (values.size() != bundle->base()->node_count() * static_cast<std::size_t>(amb))
      throw std::invalid_argument("Section::project: value count does not match bundle");
    for (std::size_t node = 0; node < bundle->base()->node_count(); ++node) {
      std::span<double> v(values.data() + node * static_cast<std::size_t>(amb),
                          static_cast<std::size_t>(amb));
      const auto pv = matvec(bundle->proj_mat(node), v);
      std::copy(pv.begin(), pv.end(), v.begin());
    }
    return Section(bundle, std::move(values));
  }

  static Section zero(const BundlePtr& bundle) {
    return Section(bundle,
                   std::vector<double>(bundle->base()->node_count() *
                                           static_cast<std::size_t>(bundle->ambient_dim()),
                                       0.0));
  }

  const BundlePtr& bundle() const { return bundle_; }
  std::span<const double> values() const { return values_; }

  std::span<const double> fiber(std::size_t node) const {
    const std::size_t amb = static_cast<std::size_t>(bundle_->ambient_dim());
    return std::span<const double>(values_).subspan(node * amb, amb);
  }

  double component(std::size_t node, int c) const { return fiber(node)[static_cast<std::size_t>(c)]; }

  /// One ambient component as a scalar grid function.
  GridFunction component_function(int c) const {
    std::vector<double> v(bundle_->base()->node_count());
    for (std::size_t node = 0; node < v.size(); ++node) v[node] = component(node, c);
    return GridFunction(bundle_->base(), std::move(v));
  }

 private:
  BundlePtr bundle_;
  std::vector<double> values_;  // node-major ambient components
};

/// Scalar multiplication of a section by a grid function, node by node.
inline Section mod_mul(const GridFunction& f, const Section& s) {
  require_same_grid(*f.base, *s.bundle()->base(), "mod_mul");
  std::vector<double> v(s.values().begin(), s.values().end());
  const std::size_t amb = static_cast<std::size_t>(s.bundle()->ambient_dim());
  for (std::size_t node = 0; node < f.values.size(); ++node)
    for (std::size_t c = 0; c < amb; ++c) v[node * amb + c] *= f.values[node];
  return Section(s.bundle(), std::move(v));
}

inline Section add(const Section& a, const Section& b) {
  if (!a.bundle()->same_fibers(*b.bundle()) || a.bundle()->is_dual() != b.bundle()->is_dual())
    throw std::invalid_argument("add: sections of different bundles");
  std::vector<double> v(a.values().size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values()[k] + b.values()[k];
  return Section(a.bundle(), std::move(v));
}

inline Section scale(const Section& s, double c) {
  std::vector<double> v(s.values().size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = c * s.values()[k];
  return Section(s.bundle(), std::move(v));
}

inline double max_abs_diff(const Section& a, const Section& b) {
  if (a.values().size() != b.values().size())
    throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k)
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

/// Fiberwise pairing of a section with a section of the dual bundle;
/// parities must be opposite, matrices identical.
inline GridFunction contract(const Section& s, const Section& t) {
  if (!s.bundle()->same_fibers(*t.bundle()))
    throw std::invalid_argument("contract: fibers differ");
  if (s.bundle()->is_dual() == t.bundle()->is_dual())
    throw std::invalid_argument("contract: need opposite parity");
  std::vector<double> v(s.bundle()->base()->node_count());
  for (std::size_t node = 0; node < v.size(); ++node) v[node] = dot(s.fiber(node), t.fiber(node));
  return GridFunction(s.bundle()->base(), std::move(v));
}

/// Fiberwise tensor product of sections over a shared base.
inline Section fiberwise_tensor(const Section& s, const Section& t) {
  BundlePtr b = tensor(s.bundle(), t.bundle());
  const std::size_t ns = static_cast<std::size_t>(s.bundle()->ambient_dim());
  const std::size_t nt = static_cast<std::size_t>(t.bundle()->ambient_dim());
  std::vector<double> v;
  v.reserve(b->base()->node_count() * ns * nt);
  for (std::size_t node = 0; node < b->base()->node_count(); ++node) {
    const auto fs = s.fiber(node);
    const auto ft = t.fiber(node);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nt; ++j) v.push_back(fs[i] * ft[j]);
  }
  return Section(std::move(b), std::move(v));
}

/// External tensor product: a section of external_tensor(E, F) whose value
/// at (x, y) is s(x) tensor t(y).
inline Section fiberwise_external(const Section& s, const Section& t) {
  BundlePtr b = external_tensor(s.bundle(), t.bundle());
  const std::size_t ns = static_cast<std::size_t>(s.bundle()->ambient_dim());
  const std::size_t nt = static_cast<std::size_t>(t.bundle()->ambient_dim());
  const std::size_t ny = t.bundle()->base()->node_count();
  std::vector<double> v;
  v.reserve(b->base()->node_count() * ns * nt);
  for (std::size_t node = 0; node < b->base()->node_count(); ++node) {
    const auto fs = s.fiber(node / ny);
    const auto ft = t.fiber(node % ny);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nt; ++j) v.push_back(fs[i] * ft[j]);
  }
  return Section(std::move(b), std::move(v));
}

/// Applies a morphism node by node: (mu . s)(x) = A(x) s(x).
inline Section pushforward(const BundleMorphism& mu, const Section& s) {
  if (!mu.source()->same_fibers(*s.bundle()) || mu.source()->is_dual() != s.bundle()->is_dual())
    throw std::invalid_argument("pushforward: section does not live in the morphism source");
  std::vector<double> v;
  v.reserve(s.bundle()->base()->node_count() * static_cast<std::size_t>(mu.target()->ambient_dim()));
  for (std::size_t node = 0; node < s.bundle()->base()->node_count(); ++node) {
    const auto y = matvec(mu.map_mat(node), s.fiber(node));
    v.insert(v.end(), y.begin(), y.end());
  }
  return Section(mu.target(), std::move(v));
}

/// Pulls a dual section of the target back to a dual section of the source:
/// (mu* t)(x) = A(x)^T t(x).
inline Section pullback_dual(const BundleMorphism& mu, const Section& t) {
  if (!mu.target()->same_fibers(*t.bundle()) || t.bundle()->is_dual() == mu.target()->is_dual())
    throw std::invalid_argument("pullback_dual: section does not live in the dual of the target");
  std::vector<double> v;
  v.reserve(t.bundle()->base()->node_count() * static_cast<std::size_t>(mu.source()->ambient_dim()));
  for (std::size_t node = 0; node < t.bundle()->base()->node_count(); ++node) {
    const auto y = matvec(transpose(mu.map_mat(node)), t.fiber(node));
    v.insert(v.end(), y.begin(), y.end());
  }
  return Section(dual(mu.source()), std::move(v));
}

/// Columns of the projector field: P e_i for each ambient basis vector.
/// They span every fiber and generate all sections over the scalars.
inline std::vector<Section> frame_generators(const BundlePtr& e) {
  const int amb = e->ambient_dim();
  std::vector<Section> gens;
  gens.reserve(static_cast<std::size_t>(amb));
  for (int i = 0; i < amb; ++i) {
    std::vector<double> v;
    v.reserve(e->base()->node_count() * static_cast<std::size_t>(amb));
    for (std::size_t node = 0; node < e->base()->node_count(); ++node)
      for (int c = 0; c < amb; ++c) v.push_back(e->proj_entry(node, c, i));
    gens.emplace_back(e, std::move(v));
  }
  return gens;
}

/// The matching dual frame: the same columns viewed in the dual bundle.
/// Pairing frame and dual frame recovers the projector entries.
inline std::vector<Section> dual_generators(const BundlePtr& e) {
  const BundlePtr d = dual(e);
  const int amb = e->ambient_dim();
  std::vector<Section> gens;
  gens.reserve(static_cast<std::size_t>(amb));
  for (int i = 0; i < amb; ++i) {
    std::vector<double> v;
    v.reserve(e->base()->node_count() * static_cast<std::size_t>(amb));
    for (std::size_t node = 0; node < e->base()->node_count(); ++node)
      for (int c = 0; c < amb; ++c) v.push_back(e->proj_entry(node, c, i));
    gens.emplace_back(d, std::move(v));
  }
  return gens;
}

/// Largest adjacent difference divided by the spacing, over all grid edges
/// and components: an empirical Lipschitz constant.
inline double max_adjacent_jump_over_h(const Section& s) {
  const auto& m = *s.bundle()->base();
  const int amb = s.bundle()->ambient_dim();
  double worst = 0.0;
  for (std::size_t node = 0; node < m.node_count(); ++node) {
    for (int a = 0; a < m.dim(); ++a) {
      const Axis& ax = m.axis(a);
      const std::size_t idx = m.axis_index(node, a);
      if (!ax.periodic && idx + 1 == static_cast<std::size_t>(ax.n)) continue;
      const std::size_t nb = m.neighbor(node, a, +1);
      for (int c = 0; c < amb; ++c)
        worst = std::max(worst, std::abs(s.component(nb, c) - s.component(node, c)) / ax.spacing);
    }
  }
  return worst;
}

}  // namespace vbd
