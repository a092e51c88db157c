// Command-line front end: invariant check suites, coordinate dumps, and
// mollifier convergence studies over scene files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vbd/vbd.hpp"

namespace {

/// Configuration problem reported by a subcommand: maps to exit code 2,
/// like a flag-parse error, as opposed to an invariant failure (1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::uint64_t seed = vbd::kDefaultSeed;
  int resolution = 128;
  std::string out_dir = ".";
  std::string scene_path;
  std::vector<std::string> tol_kvs;
  std::string eps_csv = "0.4,0.2,0.1";
};

std::map<std::string, double> parse_tol_overrides(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    const std::size_t pos = kv.find('=');
    if (pos == std::string::npos || pos == 0 || pos + 1 == kv.size())
      throw UsageError("--tol expects NAME=VALUE, got '" + kv + "'");
    const std::string name = kv.substr(0, pos);
    const std::string val = kv.substr(pos + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(val, &used);
    } catch (const std::exception&) {
      throw UsageError("--tol value for '" + name + "' is not a number: '" + val + "'");
    }
    if (used != val.size())
      throw UsageError("--tol value for '" + name + "' is not a number: '" + val + "'");
    if (value <= 0.0) throw UsageError("--tol value for '" + name + "' must be positive");
    out[name] = value;
  }
  return out;
}

std::vector<double> parse_eps_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  if (csv.empty()) return out;
  while (true) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("--eps entry is not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw UsageError("--eps entry is not a number: '" + tok + "'");
    if (value <= 0.0) throw UsageError("--eps entries must be positive");
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

vbd::Scene load_scene_or_usage(const std::string& path) {
  try {
    return vbd::load_scene(path);
  } catch (const vbd::SceneError&) {
    throw;
  } catch (const std::exception& e) {
    throw vbd::SceneError(std::string("scene file ") + path + ": " + e.what());
  }
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  const std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

int cmd_check(const GlobalOpts& g) {
  if (g.resolution < vbd::DiscreteManifold::kMinAxisNodes)
    throw UsageError("--resolution must be at least " +
                     std::to_string(vbd::DiscreteManifold::kMinAxisNodes));
  std::optional<vbd::Scene> scene;
  if (!g.scene_path.empty()) scene = load_scene_or_usage(g.scene_path);

  vbd::CheckOptions opts;
  opts.seed = g.seed;
  opts.resolution = g.resolution;
  opts.tol_overrides = parse_tol_overrides(g.tol_kvs);
  if (scene) opts.scene = &*scene;

  // Unknown override names are a configuration error, not a check failure.
  const std::vector<vbd::CheckDef> defs = vbd::check_registry(scene.has_value());
  for (const auto& [name, value] : opts.tol_overrides) {
    bool known = false;
    for (const vbd::CheckDef& d : defs) known = known || d.name == name;
    if (!known) throw UsageError("unknown check name in --tol: '" + name + "'");
  }

  const std::vector<vbd::CheckResult> results = vbd::run_all_checks(opts);
  bool all = true;
  for (const vbd::CheckResult& r : results) {
    std::printf("%-38s %-4s  max_dev=%s  tol=%s\n", r.name.c_str(), r.pass ? "ok" : "FAIL",
                vbd::format_double(r.max_deviation).c_str(),
                vbd::format_double(r.tolerance).c_str());
    all = all && r.pass;
  }

  const std::filesystem::path out = prepare_out_dir(g.out_dir) / "report.json";
  {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + out.string() + " for writing");
    f << vbd::report_json(opts, results);
  }
  std::printf("%zu checks, %s; report: %s\n", results.size(), all ? "all passed" : "FAILURES",
              out.string().c_str());
  return all ? 0 : 1;
}

int cmd_coords(const GlobalOpts& g) {
  if (g.scene_path.empty()) throw UsageError("coords requires --scene FILE.json");
  const vbd::Scene scene = load_scene_or_usage(g.scene_path);
  if (!scene.vdist) throw UsageError("coords requires a scene with a 'vdist' entry");

  const vbd::CoordRep coords = vbd::hom_to_coord(vbd::nu_tensor_to_hom(*scene.vdist));
  const vbd::ManifoldPtr& m = scene.manifold;
  std::vector<std::size_t> hat_nodes;
  for (std::size_t node = 0; node < m->node_count(); ++node)
    if (!m->in_boundary_layer(node)) hat_nodes.push_back(node);

  const std::filesystem::path out = prepare_out_dir(g.out_dir);
  for (int i = 0; i < coords.bundle()->ambient_dim(); ++i) {
    const std::filesystem::path path = out / ("coords_" + std::to_string(i) + ".csv");
    vbd::CsvWriter w(path.string());
    w.row({"node", "value"});
    for (std::size_t node : hat_nodes) {
      const double v = vbd::pair(coords.coord(i), vbd::TestDensity::hat(m, node));
      w.row({std::to_string(node), vbd::format_double(v)});
    }
    std::printf("wrote %s\n", path.string().c_str());
  }
  return 0;
}

int cmd_regularize(const GlobalOpts& g) {
  if (g.scene_path.empty()) throw UsageError("regularize requires --scene FILE.json");
  const vbd::Scene scene = load_scene_or_usage(g.scene_path);
  if (!scene.vdist) throw UsageError("regularize requires a scene with a 'vdist' entry");
  const vbd::TensorRep& u = *scene.vdist;
  const vbd::BundlePtr& e = u.bundle();
  const vbd::ManifoldPtr& m = e->base();
  if (m->dim() != 1) throw UsageError("regularize needs a 1-d base grid");

  const std::vector<double> eps = parse_eps_list(g.eps_csv);
  for (double width : eps)
    if (width < 3.0 * m->axis(0).spacing)
      throw UsageError("--eps entries must be at least three grid spacings (" +
                       vbd::format_double(3.0 * m->axis(0).spacing) + ")");

  const std::filesystem::path out = prepare_out_dir(g.out_dir);
  const vbd::VectorKernel vk = vbd::projector_kernel(e);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const vbd::SmoothingOperator op({{vk, vbd::mollifier(m, eps[k])}});
    const vbd::Section s = vbd::apply_vector(op, u);
    const std::filesystem::path path = out / ("smoothed_" + std::to_string(k) + ".csv");
    vbd::CsvWriter w(path.string());
    std::vector<std::string> header{"node"};
    for (int c = 0; c < e->ambient_dim(); ++c) header.push_back("c" + std::to_string(c));
    w.row(header);
    for (std::size_t node = 0; node < m->node_count(); ++node) {
      std::vector<std::string> row{std::to_string(node)};
      for (int c = 0; c < e->ambient_dim(); ++c)
        row.push_back(vbd::format_double(s.fiber(node)[static_cast<std::size_t>(c)]));
      w.row(row);
    }
    std::printf("wrote %s\n", path.string().c_str());
  }

  // A sup-error column needs a smooth reference, which exists exactly when
  // every coefficient is atom-free: the distribution then acts like the
  // density-weighted sum of its sections.
  bool regular_only = true;
  for (const vbd::TensorTerm& t : u.terms()) regular_only = regular_only && t.coeff.points().empty();
  if (regular_only) {
    vbd::Section ref = vbd::Section::zero(e);
    for (const vbd::TensorTerm& t : u.terms()) {
      if (!t.coeff.has_regular()) continue;
      ref = vbd::add(ref, vbd::mod_mul(t.coeff.regular(), t.section));
    }
    const auto rows = vbd::convergence_study(eps, u, ref);
    const std::filesystem::path path = out / "convergence.csv";
    vbd::CsvWriter w(path.string());
    w.row({"eps", "sup_error"});
    for (const auto& [width, err] : rows) w.numeric_row({width, err});
    std::printf("wrote %s\n", path.string().c_str());
  } else {
    std::printf("input has point atoms; skipping convergence table (no smooth reference)\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vector-bundle distribution toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed (default 0x5EED)");
  app.add_option("--resolution", g.resolution, "grid nodes per axis for generated grids");
  app.add_option("--out", g.out_dir, "output directory (created if absent)");
  app.add_option("--scene", g.scene_path, "scene description, JSON");
  app.add_option("--tol", g.tol_kvs, "tolerance override NAME=VALUE (repeatable)");
  app.add_option("--eps", g.eps_csv, "comma-separated mollifier widths");

  CLI::App* check = app.add_subcommand("check", "run the invariant check suites");
  CLI::App* coords = app.add_subcommand("coords", "dump coordinate pairings of a scene's vdist");
  CLI::App* regularize =
      app.add_subcommand("regularize", "smooth a scene's vdist and tabulate convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check(g);
    if (coords->parsed()) return cmd_coords(g);
    if (regularize->parsed()) return cmd_regularize(g);
    std::fprintf(stderr, "no subcommand given\n");
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const vbd::SceneError& e) {
    std::fprintf(stderr, "scene error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 1;
  }
}
