#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "vbd/battery.hpp"
#include "vbd/bundles.hpp"
#include "vbd/csv.hpp"
#include "vbd/distributions.hpp"
#include "vbd/geometry.hpp"
#include "vbd/random_fields.hpp"
#include "vbd/rng.hpp"
#include "vbd/scene.hpp"
#include "vbd/sections.hpp"
#include "vbd/smoothing.hpp"
#include "vbd/vdist.hpp"

namespace vbd {

struct CheckResult {
  std::string name;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckOptions {
  std::uint64_t seed = kDefaultSeed;
  int resolution = 128;
  std::map<std::string, double> tol_overrides;
  const Scene* scene = nullptr;
};

struct CheckDef {
  std::string name;
  double default_tolerance;
  std::function<double(const CheckOptions&)> deviation;
};

namespace check_detail {

/// Bundle suite exercised by the representation checks: both trivial ranks,
/// the twisted line bundle, and its sums and squares.
inline std::vector<std::pair<std::string, BundlePtr>> bundle_suite(const ManifoldPtr& m) {
  const BundlePtr mob = mobius(m);
  return {
      {"trivial-1", trivial_bundle(m, 1)},
      {"trivial-2", trivial_bundle(m, 2)},
      {"twisted", mob},
      {"twisted-plus-complement", whitney_sum(mob, complement(mob))},
      {"twisted-plus-twisted", whitney_sum(mob, mob)},
      {"twisted-square", tensor(mob, mob)},
  };
}

inline double projector_law_deviation(const ProjectorBundle& e) {
  double dev = 0.0;
  for (std::size_t node = 0; node < e.base()->node_count(); ++node) {
    const Mat p = e.proj_mat(node);
    dev = std::max(dev, max_abs(p * p - p));
    dev = std::max(dev, max_abs(p - transpose(p)));
    double trace = 0.0;
    for (int i = 0; i < e.ambient_dim(); ++i) trace += p(i, i);
    dev = std::max(dev, std::abs(trace - static_cast<double>(e.rank())));
  }
  return dev;
}

inline double morphism_diff(const BundleMorphism& a, const BundleMorphism& b) {
  double dev = 0.0;
  for (std::size_t node = 0; node < a.source()->base()->node_count(); ++node)
    dev = std::max(dev, max_abs(a.map_mat(node) - b.map_mat(node)));
  return dev;
}

inline double scalar_battery_dev(const ScalarDistribution& u, const ScalarDistribution& v,
                                 std::span<const TestDensity> battery) {
  double dev = 0.0;
  for (const TestDensity& w : battery) dev = std::max(dev, std::abs(pair(u, w) - pair(v, w)));
  return dev;
}

// -------------------------------------------------------------- geometry

inline double quad_exactness(const CheckOptions& o) {
  const ManifoldPtr c = make_circle(o.resolution);
  const ManifoldPtr iv = make_interval(o.resolution + 1);
  double dev = std::abs(quad(constant_function(c, 1.0)) - 2.0 * std::numbers::pi);
  dev = std::max(dev, std::abs(quad(grid_function(
                          c, [](std::span<const double> x) { return std::sin(x[0]); }))));
  dev = std::max(dev, std::abs(quad(constant_function(iv, 1.0)) - 1.0));
  const ManifoldPtr p = product(make_circle(16), make_circle(16));
  dev = std::max(dev, std::abs(quad(constant_function(p, 1.0)) -
                               4.0 * std::numbers::pi * std::numbers::pi));
  return dev;
}

inline double quad_product_factorization(const CheckOptions& o) {
  SeededRng rng = SeededRng(o.seed).fork("quad-product");
  const ManifoldPtr a = make_circle(16);
  const ManifoldPtr b = make_interval(17);
  const ManifoldPtr p = product(a, b);
  const GridFunction fa = random_smooth_function(a, rng);
  const GridFunction fb = random_smooth_function(b, rng);
  std::vector<double> v(p->node_count());
  for (std::size_t node = 0; node < v.size(); ++node)
    v[node] = fa.values[node / b->node_count()] * fb.values[node % b->node_count()];
  return std::abs(quad(GridFunction(p, std::move(v))) - quad(fa) * quad(fb));
}

inline double deriv_stencil_accuracy(const CheckOptions& o) {
  const ManifoldPtr c = make_circle(o.resolution);
  const GridFunction s =
      grid_function(c, [](std::span<const double> x) { return std::sin(x[0]); });
  double dev = 0.0;
  for (std::size_t node = 0; node < c->node_count(); ++node) {
    const double t = c->coord(node, 0);
    dev = std::max(dev, std::abs(deriv(s, node, 1) - std::cos(t)));
    dev = std::max(dev, std::abs(deriv(s, node, 2) + std::sin(t)));
  }
  return dev;
}

inline double deriv_exact_cases(const CheckOptions& o) {
  const ManifoldPtr c = make_circle(o.resolution);
  const ManifoldPtr iv = make_interval(o.resolution);
  const GridFunction k = constant_function(c, 3.25);
  const GridFunction lin =
      grid_function(iv, [](std::span<const double> x) { return 2.0 * x[0] - 0.5; });
  double dev = 0.0;
  for (std::size_t node = 0; node < c->node_count(); ++node) {
    dev = std::max(dev, std::abs(deriv(k, node, 1)));
    dev = std::max(dev, std::abs(deriv(k, node, 2)));
  }
  for (std::size_t node = 1; node + 1 < iv->node_count(); ++node)
    dev = std::max(dev, std::abs(deriv(lin, node, 1) - 2.0));
  return dev;
}

// --------------------------------------------------------------- bundles

inline double projector_laws(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  double dev = 0.0;
  for (const auto& [name, e] : bundle_suite(m)) dev = std::max(dev, projector_law_deviation(*e));
  dev = std::max(dev, projector_law_deviation(
                          *external_tensor(mobius(make_circle(16)), trivial_bundle(make_circle(16), 1))));
  return dev;
}

inline double complement_resolution(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr mob = mobius(m);
  const BundlePtr com = complement(mob);
  const BundlePtr invol = complement(com);
  double dev = 0.0;
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    dev = std::max(dev, max_abs(mob->proj_mat(node) + com->proj_mat(node) -
                                Mat::identity(mob->ambient_dim())));
    dev = std::max(dev, max_abs(invol->proj_mat(node) - mob->proj_mat(node)));
  }
  return dev;
}

inline double retraction_identities(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr mob = mobius(m);
  const BundlePtr com = complement(mob);
  double dev = morphism_diff(compose(projection(mob), inclusion(mob)), identity_morphism(mob));
  const BundleMorphism i0 = whitney_inclusion(mob, com, 0);
  const BundleMorphism i1 = whitney_inclusion(mob, com, 1);
  const BundleMorphism p0 = whitney_projection(mob, com, 0);
  const BundleMorphism p1 = whitney_projection(mob, com, 1);
  dev = std::max(dev, morphism_diff(compose(p0, i0), identity_morphism(mob)));
  dev = std::max(dev, morphism_diff(compose(p1, i1), identity_morphism(com)));
  dev = std::max(dev, morphism_diff(compose(p1, i0), zero_morphism(mob, com)));
  dev = std::max(dev, morphism_diff(compose(p0, i1), zero_morphism(com, mob)));
  const BundlePtr sum = i0.target();
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    const Mat resolved = compose(i0, p0).map_mat(node) + compose(i1, p1).map_mat(node);
    dev = std::max(dev, max_abs(resolved - sum->proj_mat(node)));
  }
  return dev;
}

// -------------------------------------------------------------- sections

inline double section_module_axioms(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("section-axioms");
  double dev = 0.0;
  for (const auto& [name, e] : bundle_suite(m)) {
    const Section s = random_section(e, rng);
    const Section t = random_section(e, rng);
    const GridFunction f = random_smooth_function(m, rng);
    const GridFunction g = random_smooth_function(m, rng);
    dev = std::max(dev, max_abs_diff(mod_mul(f, add(s, t)),
                                     add(mod_mul(f, s), mod_mul(f, t))));
    dev = std::max(dev, max_abs_diff(mod_mul(multiply(f, g), s), mod_mul(f, mod_mul(g, s))));
  }
  return dev;
}

inline double generator_expansion(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("generator-expansion");
  double dev = 0.0;
  for (const auto& [name, e] : bundle_suite(m)) {
    const std::vector<Section> frame = frame_generators(e);
    const std::vector<Section> dual_frame = dual_generators(e);
    for (int rep = 0; rep < 2; ++rep) {
      const Section s = random_section(e, rng);
      Section acc = Section::zero(e);
      for (std::size_t i = 0; i < frame.size(); ++i)
        acc = add(acc, mod_mul(contract(s, dual_frame[i]), frame[i]));
      dev = std::max(dev, max_abs_diff(acc, s));
    }
  }
  return dev;
}

inline double pushforward_adjoint(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("pushforward-adjoint");
  double dev = 0.0;
  for (const MorphismCase& mc : naturality_suite(m)) {
    const Section s = random_section(mc.morphism.source(), rng);
    const Section t = random_dual_section(mc.morphism.target(), rng);
    const GridFunction lhs = contract(pushforward(mc.morphism, s), t);
    const GridFunction rhs = contract(s, pullback_dual(mc.morphism, t));
    for (std::size_t node = 0; node < m->node_count(); ++node)
      dev = std::max(dev, std::abs(lhs.values[node] - rhs.values[node]));
  }
  return dev;
}

// --------------------------------------------------------- distributions

inline double pairing_linearity(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("pairing-linearity");
  const ScalarDistribution u = random_distribution(m, rng, 2);
  const ScalarDistribution v = random_distribution(m, rng, 2);
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (const TestDensity& w : battery) {
    dev = std::max(dev, std::abs(pair(add(u, v), w) - (pair(u, w) + pair(v, w))));
    dev = std::max(dev, std::abs(pair(scale(u, -2.5), w) + 2.5 * pair(u, w)));
  }
  return dev;
}

inline double embed_quad_compat(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("embed-quad");
  const GridFunction f = random_smooth_function(m, rng);
  const auto battery = density_battery(m, 4, o.seed);
  double dev = 0.0;
  for (const TestDensity& w : battery) {
    GridFunction wf(m, std::vector<double>(w.values().begin(), w.values().end()));
    dev = std::max(dev, std::abs(pair(embed_function(f), w) - quad(multiply(f, wf))));
  }
  return dev;
}

inline double mod_mul_adjoint(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("mod-mul-adjoint");
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const GridFunction g = random_smooth_function(m, rng);
    const ScalarDistribution u = random_distribution(m, rng, 2);
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(mod_mul(g, u), w) - pair(u, scaled(w, g))));
  }
  return dev;
}

inline double module_associativity(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  SeededRng rng = SeededRng(o.seed).fork("module-associativity");
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const GridFunction f = random_smooth_function(m, rng);
    const GridFunction g = random_smooth_function(m, rng);
    const ScalarDistribution u = random_distribution(m, rng, 2);
    dev = std::max(dev, scalar_battery_dev(mod_mul(multiply(f, g), u),
                                           mod_mul(f, mod_mul(g, u)), battery));
  }
  return dev;
}

// ----------------------------------------------------------------- vdist

inline double vdist_round_trip(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  double dev = 0.0;
  for (const auto& [name, e] : bundle_suite(m)) {
    SeededRng rng = SeededRng(o.seed).fork("round-trip-" + name);
    const auto battery = pairing_battery(e, 20, o.seed);
    for (int rep = 0; rep < 2; ++rep) {
      const TensorRep u = random_tensor_rep(e, rng);
      const TensorRep back = coord_to_tensor(hom_to_coord(nu_tensor_to_hom(u)));
      dev = std::max(dev, max_pairing_deviation(u, back, battery));
    }
  }
  return dev;
}

inline double nu_module_linear(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr e = mobius(m);
  SeededRng rng = SeededRng(o.seed).fork("nu-module-linear");
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const TensorRep u = random_tensor_rep(e, rng);
    const GridFunction f = random_smooth_function(m, rng);
    const Section t = random_dual_section(e, rng);
    dev = std::max(dev, scalar_battery_dev(nu_apply(mod_mul_vdist(f, u), t),
                                           mod_mul(f, nu_apply(u, t)), battery));
  }
  return dev;
}

inline double hom_eval_linear(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr e = mobius(m);
  SeededRng rng = SeededRng(o.seed).fork("hom-eval-linear");
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const HomRep l = nu_tensor_to_hom(random_tensor_rep(e, rng));
    const GridFunction f = random_smooth_function(m, rng);
    const Section t = random_dual_section(e, rng);
    dev = std::max(dev, scalar_battery_dev(l.evaluate(mod_mul(f, t)),
                                           mod_mul(f, l.evaluate(t)), battery));
  }
  return dev;
}

inline double vdist_naturality(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const auto battery = density_battery(m, 8, o.seed);
  double dev = 0.0;
  for (const MorphismCase& mc : naturality_suite(m)) {
    SeededRng rng = SeededRng(o.seed).fork("naturality-" + mc.name);
    for (int rep = 0; rep < 2; ++rep) {
      const TensorRep u = random_tensor_rep(mc.morphism.source(), rng, 2);
      double d = 0.0;
      naturality_check(mc.morphism, u, battery, 0.0, &d);
      dev = std::max(dev, d);
    }
  }
  return dev;
}

inline double biproduct_concat(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr a = mobius(m);
  const BundlePtr b = complement(a);
  SeededRng rng = SeededRng(o.seed).fork("biproduct-concat");
  const auto battery = density_battery(m, 6, o.seed);
  const TensorRep ua = random_tensor_rep(a, rng, 2);
  const TensorRep ub = random_tensor_rep(b, rng, 2);
  const TensorRep u = add(pushforward_vdist(whitney_inclusion(a, b, 0), ua),
                          pushforward_vdist(whitney_inclusion(a, b, 1), ub));
  const CoordRep cu = hom_to_coord(nu_tensor_to_hom(u));
  const CoordRep ca = hom_to_coord(nu_tensor_to_hom(ua));
  const CoordRep cb = hom_to_coord(nu_tensor_to_hom(ub));
  double dev = 0.0;
  for (int i = 0; i < a->ambient_dim(); ++i)
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(cu.coord(i), w) - pair(ca.coord(i), w)));
  for (int i = 0; i < b->ambient_dim(); ++i)
    for (const TestDensity& w : battery)
      dev = std::max(dev, std::abs(pair(cu.coord(a->ambient_dim() + i), w) - pair(cb.coord(i), w)));
  return dev;
}

inline double canonicalize_idempotent(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const auto battery = density_battery(m, 6, o.seed);
  double dev = 0.0;
  for (const auto& [name, e] : bundle_suite(m)) {
    SeededRng rng = SeededRng(o.seed).fork("canonicalize-" + name);
    std::vector<ScalarDistribution> coords;
    for (int i = 0; i < e->ambient_dim(); ++i) coords.push_back(random_distribution(m, rng));
    const CoordRep raw(e, std::move(coords));
    const CoordRep once = canonicalize_coords(raw);
    const CoordRep twice = canonicalize_coords(once);
    dev = std::max(dev, max_coord_deviation(once, twice, battery));
  }
  return dev;
}

// ------------------------------------------------------------- smoothing

inline SmoothingOperator standard_operator(const ManifoldPtr& m, const BundlePtr& src,
                                           const BundlePtr& tgt, SeededRng& rng) {
  // Two pairs: a fixed random bridge matrix sandwiched between the fiber
  // projectors and modulated by a smooth separable factor, each pair with
  // its own mollifier width.
  std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> pairs;
  const std::size_t nx = src->base()->node_count();
  const std::size_t ny = tgt->base()->node_count();
  const std::size_t block = static_cast<std::size_t>(src->ambient_dim()) *
                            static_cast<std::size_t>(tgt->ambient_dim());
  const double h = m->axis(0).spacing;
  const double widths[2] = {std::max(0.4, 3.2 * h), std::max(0.55, 3.2 * h)};
  for (int k = 0; k < 2; ++k) {
    const GridFunction fx = random_smooth_function(src->base(), rng);
    const GridFunction fy = random_smooth_function(tgt->base(), rng);
    Mat bridge(tgt->ambient_dim(), src->ambient_dim());
    for (double& v : bridge.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<double> mats(nx * ny * block);
    for (std::size_t x = 0; x < nx; ++x) {
      const Mat px = src->proj_mat(x);
      for (std::size_t y = 0; y < ny; ++y) {
        const double g = 1.0 + 0.5 * fx.values[x] * fy.values[y];
        const Mat full = tgt->proj_mat(y) * (g * bridge) * px;
        std::copy(full.data().begin(), full.data().end(),
                  mats.begin() + static_cast<std::ptrdiff_t>((x * ny + y) * block));
      }
    }
    pairs.emplace_back(VectorKernel(src, tgt, std::move(mats)), mollifier(m, widths[k]));
  }
  return SmoothingOperator(std::move(pairs));
}

inline double oracle_equivalence(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr src = mobius(m);
  const BundlePtr tgt = trivial_bundle(m, 2);
  SeededRng rng = SeededRng(o.seed).fork("oracle-equivalence");
  double dev = 0.0;
  for (int rep = 0; rep < 2; ++rep) {
    const SmoothingOperator op = standard_operator(m, src, tgt, rng);
    const TensorRep u = random_tensor_rep(src, rng, 3, 1);
    const Section via_module = apply_vector(op, u);
    Section via_direct = Section::zero(tgt);
    for (const auto& [vk, sk] : op.pairs())
      via_direct = add(via_direct, direct_kernel_apply(vk, sk, u));
    dev = std::max(dev, max_abs_diff(via_module, via_direct));
  }
  return dev;
}

inline double balanced_move(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr src = mobius(m);
  const BundlePtr tgt = trivial_bundle(m, 2);
  SeededRng rng = SeededRng(o.seed).fork("balanced-move");
  double dev = 0.0;
  for (int rep = 0; rep < 2; ++rep) {
    const SmoothingOperator op = standard_operator(m, src, tgt, rng);
    const TensorRep u = random_tensor_rep(src, rng, 2, 1);
    const GridFunction fx = random_smooth_function(m, rng);
    const GridFunction fy = random_smooth_function(m, rng);
    std::vector<double> fv(m->node_count() * m->node_count());
    for (std::size_t x = 0; x < m->node_count(); ++x)
      for (std::size_t y = 0; y < m->node_count(); ++y)
        fv[x * m->node_count() + y] = 1.0 + 0.5 * fx.values[x] * fy.values[y];
    const GridFunction f(product(m, m), std::move(fv));
    double d = 0.0;
    balanced_move_check(op, f, u, 0.0, &d);
    dev = std::max(dev, d);
  }
  return dev;
}

inline double output_smoothness(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr e = mobius(m);
  SeededRng rng = SeededRng(o.seed).fork("output-smoothness");
  const double eps = std::max(0.4, 3.2 * m->axis(0).spacing);
  const SmoothingOperator op({{projector_kernel(e), mollifier(m, eps)}});
  const TensorRep u = random_tensor_rep(e, rng, 3, 0);
  return max_adjacent_jump_over_h(apply_vector(op, u));
}

inline double smoothing_module_compat(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const BundlePtr e = mobius(m);
  SeededRng rng = SeededRng(o.seed).fork("smoothing-module-compat");
  const double eps = std::max(0.4, 3.2 * m->axis(0).spacing);
  const SmoothingOperator op({{projector_kernel(e), mollifier(m, eps)}});
  const TensorRep u = random_tensor_rep(e, rng, 2, 1);
  const GridFunction b = random_smooth_function(m, rng);
  std::vector<double> fv(m->node_count() * m->node_count());
  for (std::size_t x = 0; x < m->node_count(); ++x)
    for (std::size_t y = 0; y < m->node_count(); ++y)
      fv[x * m->node_count() + y] = b.values[y];
  const GridFunction by(product(m, m), std::move(fv));
  std::vector<std::pair<VectorKernel, ScalarSmoothingKernel>> scaled_pairs;
  for (const auto& [vk, sk] : op.pairs()) scaled_pairs.emplace_back(scale_kernel(by, vk), sk);
  const Section lhs = mod_mul(b, apply_vector(op, u));
  const Section rhs = apply_vector(SmoothingOperator(std::move(scaled_pairs)), u);
  return max_abs_diff(lhs, rhs);
}

inline double delta_slice(const CheckOptions& o) {
  const ManifoldPtr m = make_circle(o.resolution);
  const ScalarSmoothingKernel k = mollifier(m, std::max(0.3, 3.2 * m->axis(0).spacing));
  const std::size_t p = m->node_count() / 3;
  const GridFunction out = apply_scalar(k, ScalarDistribution::delta(m, p));
  double dev = 0.0;
  for (std::size_t y = 0; y < m->node_count(); ++y)
    dev = std::max(dev, std::abs(out.values[y] - k.value(p, y)));
  return dev;
}

/// |ratio - 4| over successive sup-error ratios for eps halving on the
/// fixed 256-node circle with a sine reference.
inline double mollifier_convergence(const CheckOptions&) {
  const ManifoldPtr m = make_circle(256);
  const BundlePtr e = trivial_bundle(m, 1);
  const GridFunction s =
      grid_function(m, [](std::span<const double> x) { return std::sin(x[0]); });
  std::vector<double> values(s.values);
  const Section ref(e, std::move(values));
  const TensorRep u(e, {{ref, embed_function(constant_function(m, 1.0))}});
  const double eps[3] = {0.4, 0.2, 0.1};
  const auto rows = convergence_study(eps, u, ref);
  double dev = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    dev = std::max(dev, std::abs(rows[i].second / rows[i + 1].second - 4.0));
  return dev;
}

inline double scene_round_trip(const CheckOptions& o) {
  if (!o.scene || !o.scene->vdist) return 0.0;
  const TensorRep& u = *o.scene->vdist;
  const auto battery = pairing_battery(u.bundle(), 20, o.seed);
  const TensorRep back = coord_to_tensor(hom_to_coord(nu_tensor_to_hom(u)));
  return max_pairing_deviation(u, back, battery);
}

}  // namespace check_detail

/// The named invariant suite behind cmd_check. Order is fixed; names are
/// the keys accepted by tolerance overrides.
inline std::vector<CheckDef> check_registry(bool with_scene) {
  using namespace check_detail;
  std::vector<CheckDef> defs = {
      {"geometry.quad-exactness", 1e-12, quad_exactness},
      {"geometry.quad-product-factorization", 1e-12, quad_product_factorization},
      {"geometry.deriv-stencil-accuracy", 1e-3, deriv_stencil_accuracy},
      {"geometry.deriv-exact-cases", 1e-12, deriv_exact_cases},
      {"bundles.projector-laws", 1e-10, projector_laws},
      {"bundles.complement-resolution", 1e-12, complement_resolution},
      {"bundles.retraction-identities", 1e-12, retraction_identities},
      {"sections.module-axioms", 1e-12, section_module_axioms},
      {"sections.generator-expansion", 1e-12, generator_expansion},
      {"sections.pushforward-adjoint", 1e-12, pushforward_adjoint},
      {"distributions.pairing-linearity", 1e-10, pairing_linearity},
      {"distributions.embed-quad-compat", 1e-13, embed_quad_compat},
      {"distributions.mod-mul-adjoint", 1e-8, mod_mul_adjoint},
      {"distributions.module-associativity", 1e-8, module_associativity},
      {"vdist.round-trip", 1e-8, vdist_round_trip},
      {"vdist.nu-module-linear", 1e-8, nu_module_linear},
      {"vdist.hom-eval-linear", 1e-8, hom_eval_linear},
      {"vdist.naturality", 1e-8, vdist_naturality},
      {"vdist.biproduct-concat", 1e-10, biproduct_concat},
      {"vdist.canonicalize-idempotent", 1e-10, canonicalize_idempotent},
      {"smoothing.oracle-equivalence", 1e-9, oracle_equivalence},
      {"smoothing.balanced-move", 1e-8, balanced_move},
      {"smoothing.output-smoothness", ProjectorBundle::kDefaultSmoothness, output_smoothness},
      {"smoothing.module-compat", 1e-10, smoothing_module_compat},
      {"smoothing.delta-slice", 1e-12, delta_slice},
      {"smoothing.mollifier-convergence", 0.8, mollifier_convergence},
  };
  if (with_scene) defs.push_back({"scene.round-trip", 1e-8, scene_round_trip});
  return defs;
}

inline std::vector<CheckResult> run_all_checks(const CheckOptions& opts) {
  if (opts.resolution < DiscreteManifold::kMinAxisNodes)
    throw std::invalid_argument("run_all_checks: resolution must be at least " +
                                std::to_string(DiscreteManifold::kMinAxisNodes));
  const std::vector<CheckDef> defs = check_registry(opts.scene != nullptr);
  for (const auto& [name, value] : opts.tol_overrides) {
    if (value <= 0.0) throw std::invalid_argument("tolerance override must be positive: " + name);
    bool known = false;
    for (const CheckDef& d : defs) known = known || d.name == name;
    if (!known) throw std::invalid_argument("unknown check name in tolerance override: " + name);
  }
  std::vector<CheckResult> results;
  results.reserve(defs.size());
  for (const CheckDef& d : defs) {
    CheckResult r;
    r.name = d.name;
    const auto it = opts.tol_overrides.find(d.name);
    r.tolerance = it != opts.tol_overrides.end() ? it->second : d.default_tolerance;
    r.max_deviation = d.deviation(opts);
    r.pass = r.max_deviation <= r.tolerance;
    results.push_back(std::move(r));
  }
  return results;
}

/// Deterministic JSON report for a check run: same bytes for same seed,
/// resolution, overrides and scene.
inline std::string report_json(const CheckOptions& opts, const std::vector<CheckResult>& results) {
  nlohmann::ordered_json j;
  j["seed"] = opts.seed;
  j["resolution"] = opts.resolution;
  j["checks"] = nlohmann::ordered_json::array();
  bool all = true;
  for (const CheckResult& r : results) {
    nlohmann::ordered_json c;
    c["name"] = r.name;
    c["max_deviation"] = r.max_deviation;
    c["tolerance"] = r.tolerance;
    c["pass"] = r.pass;
    j["checks"].push_back(std::move(c));
    all = all && r.pass;
  }
  j["all_pass"] = all;
  return j.dump(2) + "\n";
}

}  // namespace vbd
