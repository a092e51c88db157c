#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbd/linalg.hpp"

namespace vbd {

/// One coordinate axis of a grid. Periodic axes wrap (circle of
/// circumference n*spacing); non-periodic axes discretize [0, 1].
struct Axis {
  int n = 0;
  bool periodic = false;
  double spacing = 0.0;
};

class DiscreteManifold;
using ManifoldPtr = std::shared_ptr<const DiscreteManifold>;

/// A product of 1-d grids with quadrature weights. Node order is
/// lexicographic with the first axis slowest. Immutable once built.
class DiscreteManifold {
 public:
  static constexpr int kMinAxisNodes = 8;
  static constexpr int kMaxDim = 2;

  explicit DiscreteManifold(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > kMaxDim)
      throw std::invalid_argument("DiscreteManifold: dimension must be 1 or " +
                                  std::to_string(kMaxDim));
    std::size_t count = 1;
    for (const Axis& ax : axes_) {
      if (ax.n < kMinAxisNodes)
        throw std::invalid_argument("DiscreteManifold: axis needs at least " +
                                    std::to_string(kMinAxisNodes) + " nodes");
      if (ax.spacing <= 0.0) throw std::invalid_argument("DiscreteManifold: spacing must be positive");
      count *= static_cast<std::size_t>(ax.n);
    }
    strides_.assign(axes_.size(), 1);
    for (int a = static_cast<int>(axes_.size()) - 2; a >= 0; --a)
      strides_[a] = strides_[a + 1] * static_cast<std::size_t>(axes_[a + 1].n);

    // Per-axis quadrature: uniform weights on periodic axes, trapezoid on
    // non-periodic ones.
    std::vector<std::vector<double>> axis_w;
    for (const Axis& ax : axes_) {
      std::vector<double> w(static_cast<std::size_t>(ax.n), ax.spacing);
      if (!ax.periodic) {
        w.front() = 0.5 * ax.spacing;
        w.back() = 0.5 * ax.spacing;
      }
      axis_w.push_back(std::move(w));
    }

    coords_.resize(count * axes_.size());
    weights_.resize(count);
    for (std::size_t node = 0; node < count; ++node) {
      double w = 1.0;
      for (std::size_t a = 0; a < axes_.size(); ++a) {
        const std::size_t idx = (node / strides_[a]) % static_cast<std::size_t>(axes_[a].n);
        coords_[node * axes_.size() + a] = static_cast<double>(idx) * axes_[a].spacing;
        w *= axis_w[a][idx];
      }
      weights_[node] = w;
    }
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t node_count() const { return weights_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }

  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t node) const { return weights_.at(node); }

  std::span<const double> coords(std::size_t node) const {
    check_node(node);
    return std::span<const double>(coords_).subspan(node * axes_.size(), axes_.size());
  }
  double coord(std::size_t node, int a) const { return coords(node)[static_cast<std::size_t>(a)]; }

  /// Index of `node` along axis `a`.
  std::size_t axis_index(std::size_t node, int a) const {
    check_node(node);
    check_axis(a);
    return (node / strides_[static_cast<std::size_t>(a)]) % static_cast<std::size_t>(axes_[a].n);
  }

  /// Flat node index from per-axis indices.
  std::size_t flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != axes_.size()) throw std::invalid_argument("flat_index: arity mismatch");
    std::size_t node = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (idx[a] >= static_cast<std::size_t>(axes_[a].n))
        throw std::invalid_argument("flat_index: index out of range");
      node += idx[a] * strides_[a];
    }
    return node;
  }

  /// True when any non-periodic axis places the node on its first or last
  /// layer, where centered stencils cannot reach and test densities vanish.
  bool in_boundary_layer(std::size_t node) const {
    for (int a = 0; a < dim(); ++a) {
      if (axes_[a].periodic) continue;
      const std::size_t idx = axis_index(node, a);
      if (idx == 0 || idx + 1 == static_cast<std::size_t>(axes_[a].n)) return true;
    }
    return false;
  }

  /// Neighbor along one axis. Wraps on periodic axes; throws if a
  /// non-periodic edge would be crossed.
  std::size_t neighbor(std::size_t node, int a, int step) const {
    check_node(node);
    check_axis(a);
    const int n = axes_[a].n;
    const long idx = static_cast<long>(axis_index(node, a));
    long j = idx + step;
    if (axes_[a].periodic) {
      j = ((j % n) + n) % n;
    } else if (j < 0 || j >= n) {
      throw std::invalid_argument("neighbor: stencil crosses a non-periodic boundary");
    }
    return node + (static_cast<std::size_t>(j) - static_cast<std::size_t>(idx)) * strides_[a];
  }

  /// Structural grid equality: same axes in the same order.
  bool same_grid(const DiscreteManifold& other) const {
    if (this == &other) return true;
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (axes_[a].n != other.axes_[a].n || axes_[a].periodic != other.axes_[a].periodic ||
          axes_[a].spacing != other.axes_[a].spacing)
        return false;
    }
    return true;
  }

 private:
  void check_node(std::size_t node) const {
    if (node >= node_count()) throw std::invalid_argument("node index out of range");
  }
  void check_axis(int a) const {
    if (a < 0 || a >= dim()) throw std::invalid_argument("axis index out of range");
  }

  std::vector<Axis> axes_;
  std::vector<double> coords_;   // node-major, dim entries per node
  std::vector<double> weights_;
  std::vector<std::size_t> strides_;
};

/// Uniform periodic grid on the circle of circumference 2*pi.
inline ManifoldPtr make_circle(int n) {
  return std::make_shared<const DiscreteManifold>(
      std::vector<Axis>{{n, true, 2.0 * std::numbers::pi / static_cast<double>(n)}});
}

/// Uniform grid on [0, 1] with trapezoid weights.
inline ManifoldPtr make_interval(int n) {
  if (n < 2) throw std::invalid_argument("make_interval: need at least 2 nodes");
  return std::make_shared<const DiscreteManifold>(
      std::vector<Axis>{{n, false, 1.0 / static_cast<double>(n - 1)}});
}

/// Product grid; weights multiply, node order is lexicographic with the
/// first factor slowest.
inline ManifoldPtr product(const ManifoldPtr& a, const ManifoldPtr& b) {
  if (!a || !b) throw std::invalid_argument("product: null factor");
  std::vector<Axis> axes = a->axes();
  axes.insert(axes.end(), b->axes().begin(), b->axes().end());
  return std::make_shared<const DiscreteManifold>(std::move(axes));
}

/// Scalar samples on every node of a grid.
struct GridFunction {
  ManifoldPtr base;
  std::vector<double> values;

  GridFunction(ManifoldPtr b, std::vector<double> v) : base(std::move(b)), values(std::move(v)) {
    if (!base) throw std::invalid_argument("GridFunction: null base");
    if (values.size() != base->node_count())
      throw std::invalid_argument("GridFunction: value count does not match grid");
  }

  double value(std::size_t node) const { return values.at(node); }
};

inline GridFunction grid_function(const ManifoldPtr& m,
                                  const std::function<double(std::span<const double>)>& f) {
  std::vector<double> v(m->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(m->coords(i));
  return GridFunction(m, std::move(v));
}

inline GridFunction constant_function(const ManifoldPtr& m, double c) {
  return GridFunction(m, std::vector<double>(m->node_count(), c));
}

inline void require_same_grid(const DiscreteManifold& a, const DiscreteManifold& b,
                              const char* what) {
  if (!a.same_grid(b)) throw std::invalid_argument(std::string(what) + ": grids differ");
}

inline GridFunction multiply(const GridFunction& f, const GridFunction& g) {
  require_same_grid(*f.base, *g.base, "multiply");
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.values[i] * g.values[i];
  return GridFunction(f.base, std::move(v));
}

inline GridFunction add(const GridFunction& f, const GridFunction& g) {
  require_same_grid(*f.base, *g.base, "add");
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.values[i] + g.values[i];
  return GridFunction(f.base, std::move(v));
}

inline GridFunction scale(const GridFunction& f, double c) {
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * f.values[i];
  return GridFunction(f.base, std::move(v));
}

/// Quadrature: weighted sum of samples over the whole grid.
inline double quad(const GridFunction& f) {
  std::vector<double> terms(f.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = f.base->weight(i) * f.values[i];
  return pairwise_sum(terms);
}

struct StencilTap {
  std::size_t node = 0;
  double coeff = 0.0;
};

/// Centered finite-difference stencil, at most three taps.
struct Stencil {
  std::array<StencilTap, 3> taps{};
  int count = 0;
};

/// Stencil of the order-`order` derivative along `axis` at `node`.
/// Order 0 is the identity; orders 1 and 2 are the centered second-order
/// differences. Throws when a non-periodic edge blocks the stencil.
inline Stencil deriv_stencil(const DiscreteManifold& m, std::size_t node, int order,
                             int axis = 0) {
  if (order < 0 || order > 2) throw std::invalid_argument("deriv_stencil: order must be 0, 1 or 2");
  Stencil s;
  if (order == 0) {
    s.taps[0] = {node, 1.0};
    s.count = 1;
    return s;
  }
  const double h = m.axis(axis).spacing;
  const std::size_t minus = m.neighbor(node, axis, -1);
  const std::size_t plus = m.neighbor(node, axis, +1);
  if (order == 1) {
    s.taps[0] = {minus, -0.5 / h};
    s.taps[1] = {plus, 0.5 / h};
    s.count = 2;
  } else {
    s.taps[0] = {minus, 1.0 / (h * h)};
    s.taps[1] = {node, -2.0 / (h * h)};
    s.taps[2] = {plus, 1.0 / (h * h)};
    s.count = 3;
  }
  return s;
}

inline double apply_stencil(const Stencil& s, std::span<const double> values) {
  double acc = 0.0;
  for (int t = 0; t < s.count; ++t) acc += s.taps[t].coeff * values[s.taps[t].node];
  return acc;
}

/// Pointwise derivative of a grid function.
inline double deriv(const GridFunction& f, std::size_t node, int order, int axis = 0) {
  return apply_stencil(deriv_stencil(*f.base, node, order, axis), f.values);
}

/// Non-negative-free scalar density against which distributions are paired.
/// Must vanish exactly on the boundary layer of every non-periodic axis so
/// that stencil adjoints never reach across an edge.
class TestDensity {
 public:
  TestDensity(ManifoldPtr base, std::vector<double> values)
      : base_(std::move(base)), values_(std::move(values)) {
    if (!base_) throw std::invalid_argument("TestDensity: null base");
    if (values_.size() != base_->node_count())
      throw std::invalid_argument("TestDensity: value count does not match grid");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (base_->in_boundary_layer(i) && values_[i] != 0.0)
        throw std::invalid_argument("TestDensity: support touches a boundary layer");
    }
  }

  /// Indicator of one node. Invalid at boundary-layer nodes.
  static TestDensity hat(const ManifoldPtr& m, std::size_t node) {
    if (m->in_boundary_layer(node))
      throw std::invalid_argument("TestDensity::hat: node lies in a boundary layer");
    std::vector<double> v(m->node_count(), 0.0);
    v.at(node) = 1.0;
    return TestDensity(m, std::move(v));
  }

  const ManifoldPtr& base() const { return base_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t node) const { return values_.at(node); }

 private:
  ManifoldPtr base_;
  std::vector<double> values_;
};

/// Node-wise product of a density with a grid function; exact zeros on the
/// boundary layer are preserved.
inline TestDensity scaled(const TestDensity& w, const GridFunction& g) {
  require_same_grid(*w.base(), *g.base, "scaled");
  std::vector<double> v(w.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.value(i) * g.values[i];
  return TestDensity(w.base(), std::move(v));
}

}  // namespace vbd
