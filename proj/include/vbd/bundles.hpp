#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/geometry.hpp"
#include "vbd/linalg.hpp"

namespace vbd {

class ProjectorBundle;
using BundlePtr = std::shared_ptr<const ProjectorBundle>;

/// A vector bundle presented as a field of orthogonal projector matrices
/// inside a trivial ambient bundle. The fiber over node x is the image of
/// P(x); rank is constant. A parity flag distinguishes a bundle from its
/// dual, which carries the same matrices.
class ProjectorBundle {
 public:
  static constexpr double kFiberTol = 1e-10;
  static constexpr double kRankTol = 1e-8;
  static constexpr double kDefaultSmoothness = 10.0;

  ProjectorBundle(ManifoldPtr base, int ambient_dim, std::vector<double> projectors,
                  bool dual_space = false, double smoothness = kDefaultSmoothness)
      : base_(std::move(base)), ambient_(ambient_dim), dual_(dual_space),
        proj_(std::move(projectors)) {
    if (!base_) throw std::invalid_argument("ProjectorBundle: null base");
    if (ambient_ < 0) throw std::invalid_argument("ProjectorBundle: negative ambient dimension");
    const std::size_t per_node = static_cast<std::size_t>(ambient_) * static_cast<std::size_t>(ambient_);
    if (proj_.size() != per_node * base_->node_count())
      throw std::invalid_argument("ProjectorBundle: projector field size mismatch");

    if (ambient_ == 0) {
      rank_ = 0;
      return;
    }

    double trace0 = 0.0;
    for (std::size_t node = 0; node < base_->node_count(); ++node) {
      const Mat p = proj_mat(node);
      double trace = 0.0;
      for (int i = 0; i < ambient_; ++i) {
        trace += p(i, i);
        for (int j = 0; j < ambient_; ++j) {
          if (std::abs(p(i, j) - p(j, i)) > kFiberTol)
            throw std::invalid_argument("ProjectorBundle: projector not symmetric at node " +
                                        std::to_string(node));
        }
      }
      if (max_abs(p * p - p) > kFiberTol)
        throw std::invalid_argument("ProjectorBundle: projector not idempotent at node " +
                                    std::to_string(node));
      if (node == 0) {
        trace0 = trace;
        rank_ = static_cast<int>(std::llround(trace));
        if (std::abs(trace - static_cast<double>(rank_)) > kRankTol || rank_ < 0 || rank_ > ambient_)
          throw std::invalid_argument("ProjectorBundle: trace is not an admissible integer rank");
      } else if (std::abs(trace - trace0) > kRankTol) {
        throw std::invalid_argument("ProjectorBundle: rank varies across nodes");
      }
    }

    // Adjacent-node variation bounded by smoothness * spacing; checked once
    // per undirected grid edge.
    for (std::size_t node = 0; node < base_->node_count(); ++node) {
      for (int a = 0; a < base_->dim(); ++a) {
        const Axis& ax = base_->axis(a);
        const std::size_t idx = base_->axis_index(node, a);
        if (!ax.periodic && idx + 1 == static_cast<std::size_t>(ax.n)) continue;
        const std::size_t nb = base_->neighbor(node, a, +1);
        const Mat d = proj_mat(nb) - proj_mat(node);
        if (max_abs(d) > smoothness * ax.spacing)
          throw std::invalid_argument("ProjectorBundle: projector field varies too fast near node " +
                                      std::to_string(node));
      }
    }
  }

  const ManifoldPtr& base() const { return base_; }
  int ambient_dim() const { return ambient_; }
  int rank() const { return rank_; }
  bool is_dual() const { return dual_; }

  std::span<const double> proj(std::size_t node) const {
    const std::size_t per_node = static_cast<std::size_t>(ambient_) * static_cast<std::size_t>(ambient_);
    if (node >= base_->node_count()) throw std::invalid_argument("proj: node out of range");
    return std::span<const double>(proj_).subspan(node * per_node, per_node);
  }

  Mat proj_mat(std::size_t node) const {
    const auto s = proj(node);
    return Mat(ambient_, ambient_, std::vector<double>(s.begin(), s.end()));
  }

  double proj_entry(std::size_t node, int i, int j) const {
    return proj(node)[static_cast<std::size_t>(i) * ambient_ + j];
  }

  /// Same grid, ambient dimension and projector matrices (parity ignored).
  bool same_fibers(const ProjectorBundle& other, double tol = 1e-12) const {
    if (!base_->same_grid(*other.base_) || ambient_ != other.ambient_) return false;
    for (std::size_t k = 0; k < proj_.size(); ++k)
      if (std::abs(proj_[k] - other.proj_[k]) > tol) return false;
    return true;
  }

 private:
  ManifoldPtr base_;
  int ambient_ = 0;
  int rank_ = 0;
  bool dual_ = false;
  std::vector<double> proj_;  // node-major, ambient*ambient row-major blocks
};

/// Trivial bundle of the given rank: ambient = rank, projector = identity.
inline BundlePtr trivial_bundle(const ManifoldPtr& m, int r) {
  if (r < 0) throw std::invalid_argument("trivial_bundle: negative rank");
  std::vector<double> proj(m->node_count() * static_cast<std::size_t>(r) * r, 0.0);
  for (std::size_t node = 0; node < m->node_count(); ++node)
    for (int i = 0; i < r; ++i)
      proj[node * static_cast<std::size_t>(r) * r + static_cast<std::size_t>(i) * r + i] = 1.0;
  return std::make_shared<const ProjectorBundle>(m, r, std::move(proj));
}

/// Rank-1 subbundle of the trivial rank-2 bundle over a circle whose line
/// turns half a revolution per loop: P(t) = v v^T with v = (cos t/2, sin t/2).
/// Smooth across the seam because P has period 2*pi even though v does not.
inline BundlePtr mobius(const ManifoldPtr& m) {
  if (m->dim() != 1 || !m->axis(0).periodic)
    throw std::invalid_argument("mobius: base must be a circle");
  std::vector<double> proj(m->node_count() * 4);
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    const double t = m->coord(node, 0);
    const double c = std::cos(0.5 * t);
    const double s = std::sin(0.5 * t);
    proj[node * 4 + 0] = c * c;
    proj[node * 4 + 1] = c * s;
    proj[node * 4 + 2] = c * s;
    proj[node * 4 + 3] = s * s;
  }
  return std::make_shared<const ProjectorBundle>(m, 2, std::move(proj));
}

/// Orthogonal complement inside the ambient bundle: projector I - P.
inline BundlePtr complement(const BundlePtr& e) {
  const int amb = e->ambient_dim();
  std::vector<double> proj(e->base()->node_count() * static_cast<std::size_t>(amb) * amb);
  for (std::size_t node = 0; node < e->base()->node_count(); ++node) {
    const auto p = e->proj(node);
    const std::size_t off = node * static_cast<std::size_t>(amb) * amb;
    for (int i = 0; i < amb; ++i)
      for (int j = 0; j < amb; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * amb + j;
        proj[off + k] = (i == j ? 1.0 - p[k] : -p[k]);
      }
  }
  return std::make_shared<const ProjectorBundle>(e->base(), amb, std::move(proj), e->is_dual());
}

/// Dual bundle: identical projector field, flipped parity.
inline BundlePtr dual(const BundlePtr& e) {
  const auto n = e->base()->node_count();
  const std::size_t per = static_cast<std::size_t>(e->ambient_dim()) * e->ambient_dim();
  std::vector<double> proj(n * per);
  for (std::size_t node = 0; node < n; ++node) {
    const auto p = e->proj(node);
    std::copy(p.begin(), p.end(), proj.begin() + static_cast<std::ptrdiff_t>(node * per));
  }
  return std::make_shared<const ProjectorBundle>(e->base(), e->ambient_dim(), std::move(proj),
                                                 !e->is_dual());
}

inline void require_compatible_pair(const ProjectorBundle& a, const ProjectorBundle& b,
                                    const char* what) {
  if (!a.base()->same_grid(*b.base()))
    throw std::invalid_argument(std::string(what) + ": bundles live over different grids");
  if (a.is_dual() != b.is_dual())
    throw std::invalid_argument(std::string(what) + ": mixed parity");
}

/// Direct sum: block-diagonal projectors, ambient dimensions add.
inline BundlePtr whitney_sum(const BundlePtr& a, const BundlePtr& b) {
  require_compatible_pair(*a, *b, "whitney_sum");
  const int amb = a->ambient_dim() + b->ambient_dim();
  std::vector<double> proj(a->base()->node_count() * static_cast<std::size_t>(amb) * amb, 0.0);
  for (std::size_t node = 0; node < a->base()->node_count(); ++node) {
    const std::size_t off = node * static_cast<std::size_t>(amb) * amb;
    for (int i = 0; i < a->ambient_dim(); ++i)
      for (int j = 0; j < a->ambient_dim(); ++j)
        proj[off + static_cast<std::size_t>(i) * amb + j] = a->proj_entry(node, i, j);
    for (int i = 0; i < b->ambient_dim(); ++i)
      for (int j = 0; j < b->ambient_dim(); ++j)
        proj[off + static_cast<std::size_t>(a->ambient_dim() + i) * amb +
             (a->ambient_dim() + j)] = b->proj_entry(node, i, j);
  }
  return std::make_shared<const ProjectorBundle>(a->base(), amb, std::move(proj), a->is_dual());
}

/// Fiberwise tensor product over a shared base: Kronecker projectors.
inline BundlePtr tensor(const BundlePtr& a, const BundlePtr& b) {
  require_compatible_pair(*a, *b, "tensor");
  const int amb = a->ambient_dim() * b->ambient_dim();
  std::vector<double> proj;
  proj.reserve(a->base()->node_count() * static_cast<std::size_t>(amb) * amb);
  for (std::size_t node = 0; node < a->base()->node_count(); ++node) {
    const Mat k = kron(a->proj_mat(node), b->proj_mat(node));
    proj.insert(proj.end(), k.data().begin(), k.data().end());
  }
  return std::make_shared<const ProjectorBundle>(a->base(), amb, std::move(proj), a->is_dual());
}

/// External tensor product over the product of the two bases:
/// P(x, y) = kron(P_a(x), P_b(y)).
inline BundlePtr external_tensor(const BundlePtr& a, const BundlePtr& b) {
  if (a->is_dual() != b->is_dual())
    throw std::invalid_argument("external_tensor: mixed parity");
  ManifoldPtr base = product(a->base(), b->base());
  const int amb = a->ambient_dim() * b->ambient_dim();
  const std::size_t nb = b->base()->node_count();
  std::vector<double> proj;
  proj.reserve(base->node_count() * static_cast<std::size_t>(amb) * amb);
  for (std::size_t node = 0; node < base->node_count(); ++node) {
    const std::size_t xa = node / nb;
    const std::size_t xb = node % nb;
    const Mat k = kron(a->proj_mat(xa), b->proj_mat(xb));
    proj.insert(proj.end(), k.data().begin(), k.data().end());
  }
  return std::make_shared<const ProjectorBundle>(std::move(base), amb, std::move(proj),
                                                 a->is_dual());
}

/// Fiberwise linear map between bundles over one grid, stored as ambient
/// matrices A(x) constrained by A = P_target A P_source at every node.
class BundleMorphism {
 public:
  static constexpr double kFiberTol = 1e-10;

  BundleMorphism(BundlePtr source, BundlePtr target, std::vector<double> maps)
      : source_(std::move(source)), target_(std::move(target)), maps_(std::move(maps)) {
    if (!source_ || !target_) throw std::invalid_argument("BundleMorphism: null bundle");
    require_same_grid(*source_->base(), *target_->base(), "BundleMorphism");
    const std::size_t per = per_node();
    if (maps_.size() != per * source_->base()->node_count())
      throw std::invalid_argument("BundleMorphism: map field size mismatch");
    for (std::size_t node = 0; node < source_->base()->node_count(); ++node) {
      const Mat a = map_mat(node);
      const Mat squeezed = target_->proj_mat(node) * a * source_->proj_mat(node);
      if (max_abs(squeezed - a) > kFiberTol)
        throw std::invalid_argument(
            "BundleMorphism: map does not respect the fibers at node " + std::to_string(node));
    }
  }

  const BundlePtr& source() const { return source_; }
  const BundlePtr& target() const { return target_; }

  std::span<const double> map(std::size_t node) const {
    return std::span<const double>(maps_).subspan(node * per_node(), per_node());
  }

  Mat map_mat(std::size_t node) const {
    const auto s = map(node);
    return Mat(target_->ambient_dim(), source_->ambient_dim(),
               std::vector<double>(s.begin(), s.end()));
  }

  double entry(std::size_t node, int i, int j) const {
    return map(node)[static_cast<std::size_t>(i) * source_->ambient_dim() + j];
  }

 private:
  std::size_t per_node() const {
    return static_cast<std::size_t>(target_->ambient_dim()) *
           static_cast<std::size_t>(source_->ambient_dim());
  }

  BundlePtr source_;
  BundlePtr target_;
  std::vector<double> maps_;  // node-major, ambT x ambS row-major blocks
};

namespace detail {
inline BundleMorphism from_node_maps(const BundlePtr& src, const BundlePtr& tgt,
                                     const std::function<Mat(std::size_t)>& f) {
  std::vector<double> maps;
  maps.reserve(src->base()->node_count() * static_cast<std::size_t>(tgt->ambient_dim()) *
               src->ambient_dim());
  for (std::size_t node = 0; node < src->base()->node_count(); ++node) {
    const Mat a = f(node);
    maps.insert(maps.end(), a.data().begin(), a.data().end());
  }
  return BundleMorphism(src, tgt, std::move(maps));
}
}  // namespace detail

inline BundleMorphism identity_morphism(const BundlePtr& e) {
  return detail::from_node_maps(e, e, [&](std::size_t node) { return e->proj_mat(node); });
}

inline BundleMorphism zero_morphism(const BundlePtr& src, const BundlePtr& tgt) {
  return detail::from_node_maps(src, tgt, [&](std::size_t) {
    return Mat(tgt->ambient_dim(), src->ambient_dim());
  });
}

/// Constant multiple of the identity on a bundle.
inline BundleMorphism scale_morphism(const BundlePtr& e, double c) {
  return detail::from_node_maps(e, e, [&](std::size_t node) { return c * e->proj_mat(node); });
}

inline BundleMorphism compose(const BundleMorphism& outer, const BundleMorphism& inner) {
  if (!inner.target()->same_fibers(*outer.source()) ||
      inner.target()->is_dual() != outer.source()->is_dual())
    throw std::invalid_argument("compose: inner target does not match outer source");
  return detail::from_node_maps(inner.source(), outer.target(), [&](std::size_t node) {
    return outer.map_mat(node) * inner.map_mat(node);
  });
}

/// Inclusion of a bundle into its trivial ambient bundle; the map is P
/// viewed with a larger target.
inline BundleMorphism inclusion(const BundlePtr& e) {
  BundlePtr ambient = trivial_bundle(e->base(), e->ambient_dim());
  if (e->is_dual()) ambient = dual(ambient);
  return detail::from_node_maps(e, ambient, [&](std::size_t node) { return e->proj_mat(node); });
}

/// Orthogonal projection of the trivial ambient bundle onto a subbundle.
inline BundleMorphism projection(const BundlePtr& e) {
  BundlePtr ambient = trivial_bundle(e->base(), e->ambient_dim());
  if (e->is_dual()) ambient = dual(ambient);
  return detail::from_node_maps(ambient, e, [&](std::size_t node) { return e->proj_mat(node); });
}

/// Biproduct injection of factor `which` (0 or 1) into whitney_sum(a, b).
inline BundleMorphism whitney_inclusion(const BundlePtr& a, const BundlePtr& b, int which) {
  if (which != 0 && which != 1) throw std::invalid_argument("whitney_inclusion: which must be 0 or 1");
  BundlePtr sum = whitney_sum(a, b);
  const BundlePtr& f = which == 0 ? a : b;
  const int row0 = which == 0 ? 0 : a->ambient_dim();
  return detail::from_node_maps(f, sum, [&](std::size_t node) {
    Mat m(sum->ambient_dim(), f->ambient_dim());
    for (int i = 0; i < f->ambient_dim(); ++i)
      for (int j = 0; j < f->ambient_dim(); ++j) m(row0 + i, j) = f->proj_entry(node, i, j);
    return m;
  });
}

/// Biproduct projection of whitney_sum(a, b) onto factor `which`.
inline BundleMorphism whitney_projection(const BundlePtr& a, const BundlePtr& b, int which) {
  if (which != 0 && which != 1) throw std::invalid_argument("whitney_projection: which must be 0 or 1");
  BundlePtr sum = whitney_sum(a, b);
  const BundlePtr& f = which == 0 ? a : b;
  const int col0 = which == 0 ? 0 : a->ambient_dim();
  return detail::from_node_maps(sum, f, [&](std::size_t node) {
    Mat m(f->ambient_dim(), sum->ambient_dim());
    for (int i = 0; i < f->ambient_dim(); ++i)
      for (int j = 0; j < f->ambient_dim(); ++j) m(i, col0 + j) = f->proj_entry(node, i, j);
    return m;
  });
}

}  // namespace vbd
