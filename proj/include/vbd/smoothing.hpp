#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vbd/bundles.hpp"
#include "vbd/csv.hpp"
#include "vbd/distributions.hpp"
#include "vbd/geometry.hpp"
#include "vbd/sections.hpp"
#include "vbd/vdist.hpp"

namespace vbd {

/// Scalar kernel kappa(x, y) mapping distributions on the source grid to
/// functions on the target grid via (K u)(y) = < u, kappa(., y) >.
/// Values are stored source-major: index x * n_target + y. A normalized
/// kernel has unit mass against the source quadrature in every column.
class ScalarSmoothingKernel {
 public:
  static constexpr double kNormTol = 1e-10;

  ScalarSmoothingKernel(ManifoldPtr source, ManifoldPtr target, std::vector<double> values,
                        bool normalized)
      : source_(std::move(source)), target_(std::move(target)), values_(std::move(values)),
        normalized_(normalized) {
    if (!source_ || !target_) throw std::invalid_argument("ScalarSmoothingKernel: null grid");
    if (values_.size() != source_->node_count() * target_->node_count())
      throw std::invalid_argument("ScalarSmoothingKernel: value count mismatch");
    if (normalized_) {
      std::vector<double> terms(source_->node_count());
      for (std::size_t y = 0; y < target_->node_count(); ++y) {
        for (std::size_t x = 0; x < source_->node_count(); ++x)
          terms[x] = source_->weight(x) * value(x, y);
        if (std::abs(pairwise_sum(terms) - 1.0) > kNormTol)
          throw std::invalid_argument("ScalarSmoothingKernel: column " + std::to_string(y) +
                                      " is not normalized");
      }
    }
  }

  const ManifoldPtr& source() const { return source_; }
  const ManifoldPtr& target() const { return target_; }
  bool normalized() const { return normalized_; }

  double value(std::size_t x, std::size_t y) const {
    return values_[x * target_->node_count() + y];
  }
  std::span<const double> values() const { return values_; }

  /// Column kappa(., y) as a function on the source grid.
  GridFunction column(std::size_t y) const {
    std::vector<double> v(source_->node_count());
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = value(x, y);
    return GridFunction(source_, std::move(v));
  }

 private:
  ManifoldPtr source_;
  ManifoldPtr target_;
  std::vector<double> values_;  // source-major: x * n_target + y
  bool normalized_;
};

/// Evaluates one output node of a scalar kernel application without
/// materializing the full output grid.
inline double apply_scalar_at(const ScalarSmoothingKernel& k, const ScalarDistribution& u,
                              std::size_t y) {
  require_same_grid(*k.source(), *u.base(), "apply_scalar");
  double acc = 0.0;
  if (u.has_regular()) {
    const GridFunction& f = u.regular();
    std::vector<double> terms(f.values.size());
    for (std::size_t x = 0; x < terms.size(); ++x)
      terms[x] = k.source()->weight(x) * f.values[x] * k.value(x, y);
    acc += pairwise_sum(terms);
  }
  for (const PointMass& p : u.points()) {
    const Stencil s = deriv_stencil(*u.base(), p.node, p.order);
    const double sign = (p.order % 2 == 0) ? 1.0 : -1.0;
    double d = 0.0;
    for (int t = 0; t < s.count; ++t) d += s.taps[t].coeff * k.value(s.taps[t].node, y);
    acc += p.weight * sign * d;
  }
  return acc;
}

/// Smooths a scalar distribution into a function on the target grid.
inline GridFunction apply_scalar(const ScalarSmoothingKernel& k, const ScalarDistribution& u) {
  std::vector<double> out(k.target()->node_count());
  for (std::size_t y = 0; y < out.size(); ++y) out[y] = apply_scalar_at(k, u, y);
  return GridFunction(k.target(), std::move(out));
}

/// Wrapped Gaussian mollifier on a 1-d grid, normalized column by column
/// against the grid quadrature so that constants are reproduced exactly.
/// Requires eps to resolve at least three grid spacings.
inline ScalarSmoothingKernel mollifier(const ManifoldPtr& m, double eps) {
  if (m->dim() != 1) throw std::invalid_argument("mollifier: grid must be 1-d");
  const Axis& ax = m->axis(0);
  if (eps < 3.0 * ax.spacing)
    throw std::invalid_argument("mollifier: eps must be at least three grid spacings");
  const std::size_t n = m->node_count();
  const double period = ax.periodic ? ax.spacing * static_cast<double>(ax.n) : 0.0;
  std::vector<double> raw(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const double cx = m->coord(x, 0);
    for (std::size_t y = 0; y < n; ++y) {
      double d = std::abs(cx - m->coord(y, 0));
      if (ax.periodic) d = std::min(d, period - d);
      raw[x * n + y] = std::exp(-0.5 * d * d / (eps * eps));
    }
  }
  std::vector<double> terms(n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) terms[x] = m->weight(x) * raw[x * n + y];
    const double mass = pairwise_sum(terms);
    for (std::size_t x = 0; x < n; ++x) raw[x * n + y] /= mass;
  }
  return ScalarSmoothingKernel(m, m, std::move(raw), true);
}

/// Matrix kernel K(x, y) from fibers of a source bundle to fibers of a
/// target bundle, constrained by P_target(y) K(x, y) P_source(x) = K(x, y).
class VectorKernel {
 public:
  static constexpr double kFiberTol = 1e-10;

  VectorKernel(BundlePtr source, BundlePtr target, std::vector<double> mats)
      : source_(std::move(source)), target_(std::move(target)), mats_(std::move(mats)) {
    if (!source_ || !target_) throw std::invalid_argument("VectorKernel: null bundle");
    if (mats_.size() != block_size() * source_->base()->node_count() * target_->base()->node_count())
      throw std::invalid_argument("VectorKernel: matrix field size mismatch");
    for (std::size_t x = 0; x < source_->base()->node_count(); ++x) {
      const Mat ps = source_->proj_mat(x);
      for (std::size_t y = 0; y < target_->base()->node_count(); ++y) {
        const Mat k = mat_at(x, y);
        if (max_abs(target_->proj_mat(y) * k * ps - k) > kFiberTol)
          throw std::invalid_argument("VectorKernel: matrices leave the fibers");
      }
    }
  }

  /// Squeezes arbitrary matrices into the fibers, then constructs.
  static VectorKernel project(const BundlePtr& source, const BundlePtr& target,
                              std::vector<double> mats) {
    const std::size_t amb_s = static_cast<std::size_t>(source->ambient_dim());
    const std::size_t amb_t = static_cast<std::size_t>(target->ambient_dim());
    const std::size_t block = amb_s * amb_t;
    if (mats.size() != block * source->base()->node_count() * target->base()->node_count())
      throw std::invalid_argument("VectorKernel::project: matrix field size mismatch");
    for (std::size_t x = 0; x < source->base()->node_count(); ++x) {
      const Mat ps = source->proj_mat(x);
      for (std::size_t y = 0; y < target->base()->node_count(); ++y) {
        const std::size_t off = (x * target->base()->node_count() + y) * block;
        Mat k(static_cast<int>(amb_t), static_cast<int>(amb_s),
              std::vector<double>(mats.begin() + static_cast<std::ptrdiff_t>(off),
                                  mats.begin() + static_cast<std::ptrdiff_t>(off + block)));
        const Mat q = target->proj_mat(y) * k * ps;
        std::copy(q.data().begin(), q.data().end(),
                  mats.begin() + static_cast<std::ptrdiff_t>(off));
      }
    }
    return VectorKernel(source, target, std::move(mats));
  }

  const BundlePtr& source_bundle() const { return source_; }
  const BundlePtr& target_bundle() const { return target_; }

  Mat mat_at(std::size_t x, std::size_t y) const {
    const std::size_t off = (x * target_->base()->node_count() + y) * block_size();
    return Mat(target_->ambient_dim(), source_->ambient_dim(),
               std::vector<double>(mats_.begin() + static_cast<std::ptrdiff_t>(off),
                                   mats_.begin() + static_cast<std::ptrdiff_t>(off + block_size())));
  }

  double entry(std::size_t x, std::size_t y, int i, int j) const {
    const std::size_t off = (x * target_->base()->node_count() + y) * block_size();
    return mats_[off + static_cast<std::size_t>(i) * source_->ambient_dim() +
                 static_cast<std::size_t>(j)];
  }

 private:
  std::size_t block_size() const {
    return static_cast<std::size_t>(source_->ambient_dim()) *
           static_cast<std::size_t>(target_->ambient_dim());
  }

  BundlePtr source_;
  BundlePtr target_;
  std::vector<double> mats_;  // (x * nTarget + y)-major ambT x ambS blocks
};

/// Kernel K(x, y) = P(y) P(x) of the identity-like smoothing pair on one
/// bundle; composing it with a normalized scalar mollifier gives an
/// operator that converges to the identity on smooth sections.
inline VectorKernel projector_kernel(const BundlePtr& e) {
  const std::size_t n = e->base()->node_count();
  const std::size_t amb = static_cast<std::size_t>(e->ambient_dim());
  std::vector<double> mats;
  mats.reserve(n * n * amb * amb);
  for (std::size_t x = 0; x < n; ++x) {
    const Mat px = e->proj_mat(x);
    for (std::size_t y = 0; y < n; ++y) {
      const Mat k = e->proj_mat(y) * px;
      mats.insert(mats.end(), k.data().begin(), k.data().end());
    }
  }
  return VectorKernel(e, e, std::move(mats));
}

/// Node-wise product of a scalar kernel with a function on the product
/// grid (source slowest). Normalization is not preserved.
inline ScalarSmoothingKernel multiply_kernel(const GridFunction& f,
                                             const ScalarSmoothingKernel& k) {
  if (f.values.size() != k.values().size())
    throw std::invalid_argument("multiply_kernel: function does not live on the product grid");
  std::vector<double> v(k.values().begin(), k.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= f.values[i];
  return ScalarSmoothingKernel(k.source(), k.target(), std::move(v), false);
}

/// Node-wise product of a matrix kernel with a function on the product grid.
inline VectorKernel scale_kernel(const GridFunction& f, const VectorKernel& k) {
  const std::size_t nx = k.source_bundle()->base()->node_count();
  const std::size_t ny = k.target_bundle()->base()->node_count();
  if (f.values.size() != nx * ny)
    throw std::invalid_argument("scale_kernel: function does not live on the product grid");
  const std::size_t block = static_cast<std::size_t>(k.source_bundle()->ambient_dim()) *
                            static_cast<std::size_t>(k.target_bundle()->ambient_dim());
  std::vector<double> mats;
  mats.reserve(nx * ny * block);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const Mat m = f.values[x * ny + y] * k.mat_at(x, y);
      mats.insert(mats.end(), m.data().begin(), m.data().end());
    }
  return VectorKernel(k.source_bundle(), k.target_bundle(), std::move(mats));
}

/// A finite sum of (matrix kernel, scalar kernel) pairs acting on
/// tensor-form distributions. All pairs share source and target.
class SmoothingOperator {
 public:
  static constexpr int kMaxPairs = 16;

  explicit SmoothingOperator(std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> pairs)
      : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw std::invalid_argument("SmoothingOperator: needs at least one pair");
    if (pairs_.size() > kMaxPairs)
      throw std::invalid_argument("SmoothingOperator: pair budget exceeded");
    const auto& first = pairs_.front();
    for (const auto& [vk, sk] : pairs_) {
      if (!vk.source_bundle()->same_fibers(*first.first.source_bundle()) ||
          !vk.target_bundle()->same_fibers(*first.first.target_bundle()))
        throw std::invalid_argument("SmoothingOperator: pair bundles disagree");
      if (!sk.source()->same_grid(*vk.source_bundle()->base()) ||
          !sk.target()->same_grid(*vk.target_bundle()->base()))
        throw std::invalid_argument("SmoothingOperator: scalar kernel grids disagree");
    }
  }

  std::span<const std::pair<VectorKernel, ScalarSmoothingKernel>> pairs() const { return pairs_; }
  const BundlePtr& source_bundle() const { return pairs_.front().first.source_bundle(); }
  const BundlePtr& target_bundle() const { return pairs_.front().first.target_bundle(); }

 private:
  std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> pairs_;
};

/// Applies a smoothing operator through the module action: for each pair
/// and tensor term, contract the matrix kernel with the section, multiply
/// the contraction into the scalar coefficient, then evaluate the scalar
/// kernel at the output node. The output is projected into the target
/// fibers as a final (numerically near-idempotent) step.
inline Section apply_vector(const SmoothingOperator& op, const TensorRep& u) {
  const BundlePtr& src = op.source_bundle();
  const BundlePtr& tgt = op.target_bundle();
  if (!src->same_fibers(*u.bundle()) || src->is_dual() != u.bundle()->is_dual())
    throw std::invalid_argument("apply_vector: distribution not in the operator source");
  const std::size_t ny = tgt->base()->node_count();
  const std::size_t nx = src->base()->node_count();
  const int amb_t = tgt->ambient_dim();
  const int amb_s = src->ambient_dim();
  std::vector<double> out(ny * static_cast<std::size_t>(amb_t), 0.0);

  std::vector<double> g(nx);
  for (const auto& [vk, sk] : op.pairs()) {
    for (const TensorTerm& term : u.terms()) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (int c = 0; c < amb_t; ++c) {
          for (std::size_t x = 0; x < nx; ++x) {
            const auto fiber = term.section.fiber(x);
            double acc = 0.0;
            for (int e = 0; e < amb_s; ++e) acc += vk.entry(x, y, c, e) * fiber[static_cast<std::size_t>(e)];
            g[x] = acc;
          }
          const ScalarDistribution m = mod_mul(GridFunction(src->base(), g), term.coeff);
          out[y * static_cast<std::size_t>(amb_t) + static_cast<std::size_t>(c)] +=
              apply_scalar_at(sk, m, y);
        }
      }
    }
  }
  return Section::project(tgt, std::move(out));
}

/// Independent route: every output component is a full duality pairing of
/// the input against a kernel-row test section and a scalar-kernel density.
/// Shares no intermediate decomposition with apply_vector.
inline Section direct_kernel_apply(const VectorKernel& vk, const ScalarSmoothingKernel& sk,
                                   const TensorRep& u) {
  const BundlePtr& src = vk.source_bundle();
  const BundlePtr& tgt = vk.target_bundle();
  if (!src->same_fibers(*u.bundle()) || src->is_dual() != u.bundle()->is_dual())
    throw std::invalid_argument("direct_kernel_apply: distribution not in the kernel source");
  if (!sk.source()->same_grid(*src->base()) || !sk.target()->same_grid(*tgt->base()))
    throw std::invalid_argument("direct_kernel_apply: scalar kernel grids disagree");
  const BundlePtr dual_src = dual(src);
  const std::size_t ny = tgt->base()->node_count();
  const std::size_t nx = src->base()->node_count();
  const int amb_t = tgt->ambient_dim();
  const int amb_s = src->ambient_dim();
  std::vector<double> out(ny * static_cast<std::size_t>(amb_t), 0.0);
  for (std::size_t y = 0; y < ny; ++y) {
    const TestDensity w(sk.source(), sk.column(y).values);
    for (int c = 0; c < amb_t; ++c) {
      std::vector<double> row(nx * static_cast<std::size_t>(amb_s));
      for (std::size_t x = 0; x < nx; ++x)
        for (int e = 0; e < amb_s; ++e)
          row[x * static_cast<std::size_t>(amb_s) + static_cast<std::size_t>(e)] =
              vk.entry(x, y, c, e);
      const Section t(dual_src, std::move(row));
      out[y * static_cast<std::size_t>(amb_t) + static_cast<std::size_t>(c)] =
          pair_vdist(u, t, w);
    }
  }
  return Section(tgt, std::move(out));
}

/// Verifies that a function on the product grid can move between the
/// matrix-kernel slot and the scalar-kernel slot without changing the
/// operator's action on the given input.
inline bool balanced_move_check(const SmoothingOperator& op, const GridFunction& f,
                                const TensorRep& u, double tol, double* max_dev = nullptr) {
  std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> on_matrix;
  std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> on_scalar;
  for (const auto& [vk, sk] : op.pairs()) {
    on_matrix.emplace_back(scale_kernel(f, vk), sk);
    on_scalar.emplace_back(vk, multiply_kernel(f, sk));
  }
  const Section a = apply_vector(SmoothingOperator(std::move(on_matrix)), u);
  const Section b = apply_vector(SmoothingOperator(std::move(on_scalar)), u);
  const double dev = max_abs_diff(a, b);
  if (max_dev) *max_dev = dev;
  return dev <= tol;
}

/// Dumps a scalar kernel as a product-grid CSV: one row per (x, y) node
/// pair with the node indices and the kernel value.
inline void write_kernel_csv(const std::string& path, const ScalarSmoothingKernel& k) {
  CsvWriter out(path);
  out.row({"x", "y", "value"});
  for (std::size_t x = 0; x < k.source()->node_count(); ++x)
    for (std::size_t y = 0; y < k.target()->node_count(); ++y)
      out.row({std::to_string(x), std::to_string(y), format_double(k.value(x, y))});
}

/// Sup-norm error of mollifier smoothing against a reference section, for
/// each width in `eps`. Rows are (eps, error), in input order.
inline std::vector<std::pair<double, double>> convergence_study(std::span<const double> eps,
                                                                const TensorRep& u,
                                                                const Section& reference) {
  const BundlePtr& e = u.bundle();
  if (!reference.bundle()->same_fibers(*e) || reference.bundle()->is_dual() != e->is_dual())
    throw std::invalid_argument("convergence_study: reference lives in a different bundle");
  std::vector<std::pair<double, double>> rows;
  rows.reserve(eps.size());
  const VectorKernel vk = projector_kernel(e);
  for (double width : eps) {
    SmoothingOperator op({{vk, mollifier(e->base(), width)}});
    rows.emplace_back(width, max_abs_diff(apply_vector(op, u), reference));
  }
  return rows;
}

}  // namespace vbd
