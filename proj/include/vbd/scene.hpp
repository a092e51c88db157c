#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "vbd/bundles.hpp"
#include "vbd/distributions.hpp"
#include "vbd/geometry.hpp"
#include "vbd/sections.hpp"
#include "vbd/vdist.hpp"

namespace vbd {

/// Error in a scene description (missing field, wrong type, inconsistent
/// sizes). Maps to the configuration-error exit code in the CLI.
struct SceneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parsed scene: a grid, a bundle over it, and optionally a tensor-form
/// vector distribution.
struct Scene {
  ManifoldPtr manifold;
  std::vector<ManifoldPtr> factors;  // the two factor grids of a product, else empty
  BundlePtr bundle;
  std::optional<TensorRep> vdist;
};

namespace scene_detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* name,
                                   const std::string& where) {
  if (!j.is_object() || !j.contains(name))
    throw SceneError(where + ": missing field '" + name + "'");
  return j.at(name);
}

inline std::string kind_of(const nlohmann::json& j, const std::string& where) {
  const nlohmann::json& k = field(j, "kind", where);
  if (!k.is_string()) throw SceneError(where + ": 'kind' must be a string");
  return k.get<std::string>();
}

inline int int_field(const nlohmann::json& j, const char* name, const std::string& where) {
  const nlohmann::json& v = field(j, name, where);
  if (!v.is_number_integer()) throw SceneError(where + ": '" + name + "' must be an integer");
  return v.get<int>();
}

inline double num_field(const nlohmann::json& j, const char* name, const std::string& where,
                        std::optional<double> fallback = std::nullopt) {
  if (j.is_object() && !j.contains(name) && fallback) return *fallback;
  const nlohmann::json& v = field(j, name, where);
  if (!v.is_number()) throw SceneError(where + ": '" + name + "' must be a number");
  return v.get<double>();
}

}  // namespace scene_detail

inline ManifoldPtr parse_manifold(const nlohmann::json& j, std::vector<ManifoldPtr>* factors,
                                  const std::string& where = "manifold") {
  using scene_detail::field;
  using scene_detail::int_field;
  const std::string kind = scene_detail::kind_of(j, where);
  try {
    if (kind == "circle") return make_circle(int_field(j, "n", where));
    if (kind == "interval") return make_interval(int_field(j, "n", where));
    if (kind == "product") {
      const nlohmann::json& f = field(j, "factors", where);
      if (!f.is_array() || f.size() != 2)
        throw SceneError(where + ": 'factors' must be an array of two grids");
      ManifoldPtr a = parse_manifold(f.at(0), nullptr, where + ".factors[0]");
      ManifoldPtr b = parse_manifold(f.at(1), nullptr, where + ".factors[1]");
      if (factors) *factors = {a, b};
      return product(a, b);
    }
  } catch (const std::invalid_argument& e) {
    throw SceneError(where + ": " + e.what());
  }
  throw SceneError(where + ": unknown kind '" + kind + "'");
}

inline BundlePtr parse_bundle(const nlohmann::json& j, const ManifoldPtr& m,
                              const std::vector<ManifoldPtr>& factors,
                              const std::string& where = "bundle") {
  using scene_detail::field;
  const std::string kind = scene_detail::kind_of(j, where);
  try {
    if (kind == "trivial") return trivial_bundle(m, scene_detail::int_field(j, "rank", where));
    if (kind == "mobius") return mobius(m);
    if (kind == "sum" || kind == "tensor") {
      BundlePtr a = parse_bundle(field(j, "a", where), m, factors, where + ".a");
      BundlePtr b = parse_bundle(field(j, "b", where), m, factors, where + ".b");
      return kind == "sum" ? whitney_sum(a, b) : tensor(a, b);
    }
    if (kind == "complement")
      return complement(parse_bundle(field(j, "of", where), m, factors, where + ".of"));
    if (kind == "dual")
      return dual(parse_bundle(field(j, "of", where), m, factors, where + ".of"));
    if (kind == "external") {
      if (factors.size() != 2)
        throw SceneError(where + ": 'external' needs a product manifold");
      BundlePtr a = parse_bundle(field(j, "a", where), factors[0], {}, where + ".a");
      BundlePtr b = parse_bundle(field(j, "b", where), factors[1], {}, where + ".b");
      return external_tensor(a, b);
    }
  } catch (const std::invalid_argument& e) {
    throw SceneError(where + ": " + e.what());
  }
  throw SceneError(where + ": unknown kind '" + kind + "'");
}

inline GridFunction parse_function(const nlohmann::json& j, const ManifoldPtr& m,
                                   const std::string& where) {
  using scene_detail::num_field;
  const std::string kind = scene_detail::kind_of(j, where);
  if (kind == "const") {
    return constant_function(m, num_field(j, "value", where));
  }
  if (kind == "sin" || kind == "cos") {
    const double freq = num_field(j, "freq", where, 1.0);
    const double amplitude = num_field(j, "amplitude", where, 1.0);
    const double phase = num_field(j, "phase", where, 0.0);
    int axis = 0;
    if (j.contains("axis")) axis = scene_detail::int_field(j, "axis", where);
    if (axis < 0 || axis >= m->dim()) throw SceneError(where + ": axis out of range");
    const bool is_sin = kind == "sin";
    return grid_function(m, [=](std::span<const double> x) {
      const double arg = freq * x[static_cast<std::size_t>(axis)] + phase;
      return amplitude * (is_sin ? std::sin(arg) : std::cos(arg));
    });
  }
  if (kind == "values") {
    const nlohmann::json& v = scene_detail::field(j, "values", where);
    if (!v.is_array() || v.size() != m->node_count())
      throw SceneError(where + ": 'values' must list one number per node (" +
                       std::to_string(m->node_count()) + ")");
    std::vector<double> values;
    values.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) throw SceneError(where + ": 'values' entries must be numbers");
      values.push_back(x.get<double>());
    }
    return GridFunction(m, std::move(values));
  }
  throw SceneError(where + ": unknown kind '" + kind + "'");
}

inline ScalarDistribution parse_distribution(const nlohmann::json& j, const ManifoldPtr& m,
                                             const std::string& where) {
  const nlohmann::json& atoms = scene_detail::field(j, "atoms", where);
  if (!atoms.is_array()) throw SceneError(where + ": 'atoms' must be an array");
  std::optional<GridFunction> reg;
  std::vector<PointMass> pts;
  std::size_t idx = 0;
  for (const auto& a : atoms) {
    const std::string aw = where + ".atoms[" + std::to_string(idx++) + "]";
    const std::string kind = scene_detail::kind_of(a, aw);
    if (kind == "regular") {
      GridFunction f = parse_function(scene_detail::field(a, "f", aw), m, aw + ".f");
      reg = reg ? add(*reg, f) : f;
    } else if (kind == "delta") {
      const int node = scene_detail::int_field(a, "node", aw);
      if (node < 0 || static_cast<std::size_t>(node) >= m->node_count())
        throw SceneError(aw + ": node out of range");
      int order = 0;
      if (a.contains("order")) order = scene_detail::int_field(a, "order", aw);
      const double weight = scene_detail::num_field(a, "weight", aw, 1.0);
      pts.push_back({static_cast<std::size_t>(node), order, weight});
    } else {
      throw SceneError(aw + ": unknown kind '" + kind + "'");
    }
  }
  try {
    return ScalarDistribution(m, std::move(reg), std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw SceneError(where + ": " + e.what());
  }
}

inline TensorRep parse_vdist(const nlohmann::json& j, const BundlePtr& e,
                             const std::string& where = "vdist") {
  const nlohmann::json& terms = scene_detail::field(j, "terms", where);
  if (!terms.is_array()) throw SceneError(where + ": 'terms' must be an array");
  std::vector<TensorTerm> out;
  std::size_t idx = 0;
  for (const auto& t : terms) {
    const std::string tw = where + ".terms[" + std::to_string(idx++) + "]";
    const nlohmann::json& sec = scene_detail::field(t, "section", tw);
    const nlohmann::json& comps = scene_detail::field(sec, "components", tw + ".section");
    if (!comps.is_array() || comps.size() != static_cast<std::size_t>(e->ambient_dim()))
      throw SceneError(tw + ".section: 'components' must list one function per ambient dimension (" +
                       std::to_string(e->ambient_dim()) + ")");
    std::vector<double> values(e->base()->node_count() *
                               static_cast<std::size_t>(e->ambient_dim()));
    for (int c = 0; c < e->ambient_dim(); ++c) {
      GridFunction f = parse_function(comps.at(static_cast<std::size_t>(c)), e->base(),
                                      tw + ".section.components[" + std::to_string(c) + "]");
      for (std::size_t node = 0; node < e->base()->node_count(); ++node)
        values[node * static_cast<std::size_t>(e->ambient_dim()) + static_cast<std::size_t>(c)] =
            f.values[node];
    }
    Section s = Section::project(e, std::move(values));
    ScalarDistribution d =
        parse_distribution(scene_detail::field(t, "coeff", tw), e->base(), tw + ".coeff");
    out.push_back({std::move(s), std::move(d)});
  }
  try {
    return TensorRep(e, std::move(out));
  } catch (const std::invalid_argument& e2) {
    throw SceneError(where + ": " + e2.what());
  }
}

inline Scene parse_scene(const nlohmann::json& j) {
  Scene scene;
  scene.manifold = parse_manifold(scene_detail::field(j, "manifold", "scene"), &scene.factors);
  scene.bundle = parse_bundle(scene_detail::field(j, "bundle", "scene"), scene.manifold,
                              scene.factors);
  // The bundle's base is the authoritative grid object (external tensor
  // products rebuild the product grid).
  scene.manifold = scene.bundle->base();
  if (j.contains("vdist")) scene.vdist = parse_vdist(j.at("vdist"), scene.bundle);
  return scene;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError("cannot open scene file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SceneError("scene file " + path + " is not valid JSON: " + e.what());
  }
  return parse_scene(j);
}

}  // namespace vbd
