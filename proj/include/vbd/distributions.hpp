#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/geometry.hpp"
#include "vbd/linalg.hpp"
#include "vbd/random_fields.hpp"
#include "vbd/rng.hpp"

namespace vbd {

/// A weighted derivative-of-delta atom. Derivatives on product grids act
/// along axis 0.
struct PointMass {
  std::size_t node = 0;
  int order = 0;
  double weight = 0.0;
};

/// Scalar distribution in atom form: at most one regular (grid function)
/// part plus a canonical list of point masses, sorted by (node, order) with
/// duplicates merged and zero weights dropped.
class ScalarDistribution {
 public:
  static constexpr int kMaxAtoms = 64;
  static constexpr int kMaxOrder = 2;

  explicit ScalarDistribution(ManifoldPtr base) : base_(std::move(base)) {
    if (!base_) throw std::invalid_argument("ScalarDistribution: null base");
  }

  ScalarDistribution(ManifoldPtr base, std::optional<GridFunction> regular,
                     std::vector<PointMass> points)
      : base_(std::move(base)), regular_(std::move(regular)), points_(std::move(points)) {
    if (!base_) throw std::invalid_argument("ScalarDistribution: null base");
    if (regular_) require_same_grid(*base_, *regular_->base, "ScalarDistribution");
    canonicalize();
  }

  static ScalarDistribution delta(const ManifoldPtr& m, std::size_t node, int order = 0,
                                  double weight = 1.0) {
    return ScalarDistribution(m, std::nullopt, {PointMass{node, order, weight}});
  }

  const ManifoldPtr& base() const { return base_; }
  bool has_regular() const { return regular_.has_value(); }
  const GridFunction& regular() const {
    if (!regular_) throw std::invalid_argument("ScalarDistribution: no regular part");
    return *regular_;
  }
  std::span<const PointMass> points() const { return points_; }
  int atom_count() const { return (regular_ ? 1 : 0) + static_cast<int>(points_.size()); }
  bool structurally_zero() const { return !regular_ && points_.empty(); }

 private:
  void canonicalize() {
    for (const PointMass& p : points_) {
      if (p.order < 0 || p.order > kMaxOrder)
        throw std::invalid_argument("ScalarDistribution: point-mass order must be 0, 1 or 2");
      if (p.node >= base_->node_count())
        throw std::invalid_argument("ScalarDistribution: point-mass node out of range");
      if (p.order >= 1 && base_->in_boundary_layer(p.node))
        throw std::invalid_argument(
            "ScalarDistribution: derivative point mass in a boundary layer");
    }
    std::stable_sort(points_.begin(), points_.end(), [](const PointMass& a, const PointMass& b) {
      return a.node != b.node ? a.node < b.node : a.order < b.order;
    });
    std::vector<PointMass> merged;
    for (const PointMass& p : points_) {
      if (!merged.empty() && merged.back().node == p.node && merged.back().order == p.order)
        merged.back().weight += p.weight;
      else
        merged.push_back(p);
    }
    std::erase_if(merged, [](const PointMass& p) { return p.weight == 0.0; });
    points_ = std::move(merged);
    if (atom_count() > kMaxAtoms)
      throw std::invalid_argument("ScalarDistribution: atom budget exceeded (" +
                                  std::to_string(atom_count()) + " > " +
                                  std::to_string(kMaxAtoms) + ")");
  }

  ManifoldPtr base_;
  std::optional<GridFunction> regular_;
  std::vector<PointMass> points_;
};

inline ScalarDistribution embed_function(const GridFunction& f) {
  return ScalarDistribution(f.base, f, {});
}

/// Duality pairing against a test density. Regular parts integrate by
/// quadrature; a point mass of order k contributes weight * (-1)^k times
/// the stencil derivative of the density.
inline double pair(const ScalarDistribution& u, const TestDensity& w) {
  require_same_grid(*u.base(), *w.base(), "pair");
  double acc = 0.0;
  if (u.has_regular()) {
    const GridFunction& f = u.regular();
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
      terms[i] = u.base()->weight(i) * f.values[i] * w.value(i);
    acc += pairwise_sum(terms);
  }
  for (const PointMass& p : u.points()) {
    const Stencil s = deriv_stencil(*u.base(), p.node, p.order);
    const double sign = (p.order % 2 == 0) ? 1.0 : -1.0;
    acc += p.weight * sign * apply_stencil(s, w.values());
  }
  return acc;
}

/// Multiplication by a smooth function. On the regular part this is the
/// node-wise product. On point masses it is the exact adjoint of
/// multiplying the test density: the unique atom combination satisfying
/// pair(g*u, w) == pair(u, g*w) to rounding under the centered stencils.
/// The coefficients agree with the smooth Leibniz expansion to O(h^2).
inline ScalarDistribution mod_mul(const GridFunction& g, const ScalarDistribution& u) {
  require_same_grid(*g.base, *u.base(), "mod_mul");
  std::optional<GridFunction> reg;
  if (u.has_regular()) reg = multiply(g, u.regular());
  std::vector<PointMass> pts;
  for (const PointMass& p : u.points()) {
    const double g0 = g.values[p.node];
    if (p.order == 0) {
      pts.push_back({p.node, 0, p.weight * g0});
      continue;
    }
    const double h = u.base()->axis(0).spacing;
    const double gm = g.values[u.base()->neighbor(p.node, 0, -1)];
    const double gp = g.values[u.base()->neighbor(p.node, 0, +1)];
    const double avg = 0.5 * (gp + gm);
    const double d1 = (gp - gm) / (2.0 * h);
    const double d2 = (gp - 2.0 * g0 + gm) / (h * h);
    if (p.order == 1) {
      pts.push_back({p.node, 0, -p.weight * d1});
      pts.push_back({p.node, 1, p.weight * avg});
      pts.push_back({p.node, 2, -p.weight * 0.5 * h * h * d1});
    } else {
      pts.push_back({p.node, 0, p.weight * d2});
      pts.push_back({p.node, 1, -2.0 * p.weight * d1});
      pts.push_back({p.node, 2, p.weight * avg});
    }
  }
  return ScalarDistribution(u.base(), std::move(reg),
                            std::move(pts));
}

inline ScalarDistribution add(const ScalarDistribution& u, const ScalarDistribution& v) {
  require_same_grid(*u.base(), *v.base(), "add");
  std::optional<GridFunction> reg;
  if (u.has_regular() && v.has_regular())
    reg = vbd::add(u.regular(), v.regular());
  else if (u.has_regular())
    reg = u.regular();
  else if (v.has_regular())
    reg = v.regular();
  std::vector<PointMass> pts(u.points().begin(), u.points().end());
  pts.insert(pts.end(), v.points().begin(), v.points().end());
  return ScalarDistribution(u.base(), std::move(reg), std::move(pts));
}

inline ScalarDistribution scale(const ScalarDistribution& u, double c) {
  std::optional<GridFunction> reg;
  if (u.has_regular()) reg = vbd::scale(u.regular(), c);
  std::vector<PointMass> pts(u.points().begin(), u.points().end());
  for (PointMass& p : pts) p.weight *= c;
  return ScalarDistribution(u.base(), std::move(reg), std::move(pts));
}

/// Pairing-based equality over the deterministic density battery (all
/// admissible hats plus `battery_size` seeded smooth densities).
inline bool equal(const ScalarDistribution& u, const ScalarDistribution& v, int battery_size,
                  double tol, std::uint64_t seed = kDefaultSeed, double* max_dev = nullptr) {
  require_same_grid(*u.base(), *v.base(), "equal");
  double dev = 0.0;
  for (const TestDensity& w : density_battery(u.base(), battery_size, seed))
    dev = std::max(dev, std::abs(pair(u, w) - pair(v, w)));
  if (max_dev) *max_dev = dev;
  return dev <= tol;
}

}  // namespace vbd
