// ivgl: network-aware instrumental-variable regression.
//
// Subcommands:
//   simulate   run replicated benchmark protocols and write summary tables
//   fit        fit one method to user-supplied CSV data
//   screen     marginal-correlation instrument screening
//   laplacian  build a graph Laplacian from an edge list or coordinates
//
// Exit codes: 0 success, 2 usage or data errors, 1 internal errors.
// The IVGL_SEED environment variable, when set, overrides --seed.

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "ivgl/graph.hpp"
#include "ivgl/invalid_iv.hpp"
#include "ivgl/io.hpp"
#include "ivgl/simulate.hpp"
#include "ivgl/solver.hpp"
#include "ivgl/two_stage.hpp"

namespace {

using namespace ivgl;

/// IVGL_SEED wins over the flag when present; garbage in the variable is a
/// usage error rather than a silent fallback.
std::uint64_t seed_with_env(std::uint64_t flag_value) {
  const char* env = std::getenv("IVGL_SEED");
  if (env == nullptr || *env == '\0') return flag_value;
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0') {
    throw std::invalid_argument(std::string("IVGL_SEED is not an integer: '") + env + "'");
  }
  return static_cast<std::uint64_t>(v);
}

LaplacianKind parse_laplacian_kind(const std::string& s) {
  if (s == "normalized") return LaplacianKind::normalized;
  if (s == "unnormalized") return LaplacianKind::unnormalized;
  throw std::invalid_argument("unknown Laplacian kind '" + s +
                              "' (expected normalized or unnormalized)");
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::string field;
  std::istringstream ss(csv);
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    Method m = parse_method(field);
    for (Method seen : out) {
      if (seen == m) throw std::invalid_argument("method '" + field + "' listed twice");
    }
    out.push_back(m);
  }
  if (out.empty()) throw std::invalid_argument("--methods lists no methods");
  return out;
}

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

/// Writes content and records (relative path, size, digest) for the manifest.
void emit(const std::filesystem::path& dir, const std::string& rel,
          const std::string& content, std::vector<ManifestEntry>& entries) {
  std::filesystem::path full = dir / rel;
  ensure_parent_dir(full.string());
  write_text_file(full.string(), content);
  entries.push_back({rel, content.size(), fnv1a64_hex(content)});
}

// --------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int setup = 1;
  double si = 1.0;
  int s0 = 4;
  int reps = 100;
  std::uint64_t seed = 0;
  std::string methods = "ivl,ivgl";
  std::string out;
  int jobs = 1;
  bool dump_data = false;
};

int cmd_simulate(const SimulateArgs& args) {
  auto t0 = std::chrono::steady_clock::now();

  SimConfig cfg;
  cfg.setup = args.setup;
  cfg.si = args.si;
  cfg.s0 = args.s0;
  cfg.n_replicates = args.reps;
  cfg.base_seed = seed_with_env(args.seed);
  std::vector<Method> methods = parse_method_list(args.methods);

  std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir);

  SummaryTable table = run_replications(cfg, methods, args.jobs);

  std::vector<ManifestEntry> outputs;
  emit(dir, "summary.csv", summary_csv(table), outputs);
  emit(dir, "replicates.csv", replicates_csv(table), outputs);
  emit(dir, "mcc_long.csv", mcc_long_csv(table), outputs);

  if (args.dump_data) {
    // First replicate's dataset, full precision, so a `fit` run on these
    // files with --seed base+1 reproduces the in-memory estimates exactly.
    SimData d = gen_dataset(cfg, cfg.base_seed + 1);
    emit(dir, "data/y.csv", vector_csv(d.dataset.Y, "y"), outputs);
    emit(dir, "data/x.csv", matrix_csv(d.dataset.X, effective_node_names(d.dataset)),
         outputs);
    emit(dir, "data/z.csv", matrix_csv(d.dataset.Z, effective_instrument_names(d.dataset)),
         outputs);
    emit(dir, "data/edges.tsv", edges_tsv(d.truth.graph), outputs);
    if (d.truth.coords.size() > 0) {
      emit(dir, "data/coords.csv", matrix_csv(d.truth.coords, {"x", "y", "z"}), outputs);
    }
  }

  double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string manifest =
      manifest_json("simulate", cfg, methods, /*inputs=*/{}, outputs, runtime);
  write_text_file((dir / "manifest.json").string(), manifest);

  for (const CellSummary& c : table.cells) {
    std::printf("%-6s mean MSE %s (SE %s)  median MCC %s [%s, %s]  n_ok %d/%d\n",
                method_tag(c.method).c_str(), format_stat(c.mean_mse).c_str(),
                format_stat(c.se_mse).c_str(), format_stat(c.median_mcc).c_str(),
                format_stat(c.mcc_q1).c_str(), format_stat(c.mcc_q3).c_str(), c.n_ok,
                args.reps);
  }
  std::printf("wrote %s in %.1fs\n", dir.string().c_str(), runtime);
  return 0;
}

// --------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string y_path;
  std::string x_path;
  std::string z_path;
  std::string edges_path;
  std::string coords_path;
  double threshold = 30.0;
  std::string method = "ivgl";
  std::string laplacian_kind = "normalized";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_fit(const FitArgs& args) {
  Method method = parse_method(args.method);

  Dataset ds;
  std::string y_name;
  ds.Y = read_vector_csv(args.y_path, &y_name);
  NamedMatrix x = read_matrix_csv(args.x_path);
  ds.X = x.values;
  ds.node_names = x.names;
  if (!args.z_path.empty()) {
    NamedMatrix z = read_matrix_csv(args.z_path);
    ds.Z = z.values;
    ds.instrument_names = z.names;
  } else if (method != Method::GL) {
    throw std::invalid_argument("--z is required for method '" + args.method + "'");
  }

  if (ds.X.rows() != ds.Y.size()) {
    throw std::invalid_argument(args.x_path + " has " + std::to_string(ds.X.rows()) +
                                " rows but " + args.y_path + " has " +
                                std::to_string(ds.Y.size()));
  }
  if (ds.Z.size() > 0 && ds.Z.rows() != ds.Y.size()) {
    throw std::invalid_argument(args.z_path + " has " + std::to_string(ds.Z.rows()) +
                                " rows but " + args.y_path + " has " +
                                std::to_string(ds.Y.size()));
  }
  auto check_finite = [](const Eigen::MatrixXd& m, const std::string& path) {
    if (!m.allFinite()) {
      throw std::invalid_argument(path + " contains non-finite values");
    }
  };
  check_finite(ds.Y, args.y_path);
  check_finite(ds.X, args.x_path);
  if (ds.Z.size() > 0) check_finite(ds.Z, args.z_path);

  const int p = static_cast<int>(ds.X.cols());
  Laplacian L;
  bool need_graph = method != Method::IVL;
  if (!args.edges_path.empty() && !args.coords_path.empty()) {
    throw std::invalid_argument("give only one of --edges and --coords");
  }
  if (need_graph) {
    Graph g;
    if (!args.edges_path.empty()) {
      g = read_edges_tsv(args.edges_path, p);
    } else if (!args.coords_path.empty()) {
      NamedMatrix coords = read_matrix_csv(args.coords_path);
      if (coords.values.rows() != p) {
        throw std::invalid_argument(args.coords_path + " has " +
                                    std::to_string(coords.values.rows()) + " rows but " +
                                    args.x_path + " has " + std::to_string(p) +
                                    " columns");
      }
      g = build_distance_graph(coords.values, args.threshold);
    } else {
      throw std::invalid_argument("either --edges or --coords is required for method '" +
                                  args.method + "'");
    }
    L = laplacian(g, parse_laplacian_kind(args.laplacian_kind));
  }

  SolverConfig cfg;
  cfg.rng_seed = seed_with_env(args.seed);

  FitResult fit;
  switch (method) {
    case Method::GL:
      fit = gl_fit(ds, L, cfg);
      break;
    case Method::IVL:
      fit = ivl_fit(ds, cfg);
      break;
    case Method::IVGL:
      fit = ivgl_fit(ds, L, cfg);
      break;
    case Method::IVGLS:
      fit = ivgls_fit(ds, L, cfg);
      break;
  }

  ensure_parent_dir(args.out);
  write_text_file(args.out,
                  fit_json(fit, effective_node_names(ds), effective_instrument_names(ds)));

  std::printf("%s: %d of %d exposures selected, lambda1 %s, lambda2 %s%s\n",
              method_tag(fit.method).c_str(), static_cast<int>(fit.support.size()), p,
              format_stat(fit.lambda1).c_str(), format_stat(fit.lambda2).c_str(),
              fit.converged ? "" : " (not converged)");
  std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

// --------------------------------------------------------------------------
// screen

struct ScreenArgs {
  std::string z_path;
  std::string x_path;
  int top = 300;
  std::string out;
};

int cmd_screen(const ScreenArgs& args) {
  NamedMatrix z = read_matrix_csv(args.z_path);
  NamedMatrix x = read_matrix_csv(args.x_path);
  if (z.values.rows() != x.values.rows()) {
    throw std::invalid_argument(args.z_path + " has " + std::to_string(z.values.rows()) +
                                " rows but " + args.x_path + " has " +
                                std::to_string(x.values.rows()));
  }
  Eigen::VectorXd scores = sis_scores(z.values, x.values);
  std::vector<int> selected = sis_screen(z.values, x.values, args.top);

  ensure_parent_dir(args.out);
  write_text_file(args.out, screen_csv(selected, scores, z.names));
  std::printf("selected %d of %d instruments, wrote %s\n", args.top,
              static_cast<int>(z.values.cols()), args.out.c_str());
  return 0;
}

// --------------------------------------------------------------------------
// laplacian

struct LaplacianArgs {
  std::string edges_path;
  std::string coords_path;
  double threshold = 30.0;
  std::string kind = "normalized";
  std::string out;
};

int cmd_laplacian(const LaplacianArgs& args) {
  if (!args.edges_path.empty() && !args.coords_path.empty()) {
    throw std::invalid_argument("give only one of --edges and --coords");
  }
  Graph g;
  if (!args.edges_path.empty()) {
    g = read_edges_tsv(args.edges_path, 0);
  } else if (!args.coords_path.empty()) {
    NamedMatrix coords = read_matrix_csv(args.coords_path);
    g = build_distance_graph(coords.values, args.threshold);
  } else {
    throw std::invalid_argument("either --edges or --coords is required");
  }

  int isolated = 0;
  for (Eigen::Index j = 0; j < g.degrees().size(); ++j) {
    if (g.degrees()[j] == 0.0) ++isolated;
  }
  if (isolated > 0) {
    std::fprintf(stderr, "warning: %d isolated node(s)\n", isolated);
  }

  LaplacianKind kind = parse_laplacian_kind(args.kind);
  Laplacian L = laplacian(g, kind);

  ensure_parent_dir(args.out);
  write_text_file(args.out, laplacian_csv(L.matrix));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L.matrix,
                                                     Eigen::EigenvaluesOnly);
  std::printf("%s Laplacian, %d nodes, %d edges\n", to_string(kind).c_str(),
              g.node_count(), static_cast<int>(g.edges().size()));
  std::printf("eigenvalues in [%s, %s]\n",
              format_stat(eig.eigenvalues().minCoeff()).c_str(),
              format_stat(eig.eigenvalues().maxCoeff()).c_str());
  if (kind == LaplacianKind::unnormalized) {
    double max_row_sum = L.matrix.rowwise().sum().cwiseAbs().maxCoeff();
    std::printf("max |row sum| = %s\n", format_stat(max_row_sum).c_str());
  }
  std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app(
      "Network-aware instrumental-variable regression: graph-constrained "
      "two-stage lasso estimators, invalid-instrument-robust fitting, and "
      "replicated simulation benchmarks. IVGL_SEED overrides --seed when set.");
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Run a replicated benchmark and write summaries");
  sim_cmd->add_option("--setup", sim.setup, "Protocol: 1 (ring, valid IVs) or 2 (distance graph, invalid IVs)")
      ->check(CLI::IsMember({1, 2}));
  sim_cmd->add_option("--si", sim.si, "Signal intensity multiplier")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--s0", sim.s0, "True support size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--reps", sim.reps, "Number of replicates")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Base seed; replicate r uses seed + r");
  sim_cmd->add_option("--methods", sim.methods, "Comma-separated: gl,ivl,ivgl,ivgls");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_option("--jobs", sim.jobs, "Worker threads for replicates");
  sim_cmd->add_flag("--dump-data", sim.dump_data,
                    "Also write the first replicate's dataset under data/");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit one method to CSV data");
  fit_cmd->add_option("--y", fit.y_path, "Outcome CSV (single column)")->required();
  fit_cmd->add_option("--x", fit.x_path, "Exposure matrix CSV")->required();
  fit_cmd->add_option("--z", fit.z_path, "Instrument matrix CSV (not needed for gl)");
  fit_cmd->add_option("--edges", fit.edges_path, "Edge list TSV (src dst weight, 1-based)");
  fit_cmd->add_option("--coords", fit.coords_path, "Node coordinate CSV (x,y,z)");
  fit_cmd->add_option("--threshold", fit.threshold, "Distance threshold for --coords")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--method", fit.method, "gl, ivl, ivgl, or ivgls");
  fit_cmd->add_option("--laplacian", fit.laplacian_kind, "normalized or unnormalized")
      ->check(CLI::IsMember({"normalized", "unnormalized"}));
  fit_cmd->add_option("--seed", fit.seed, "Seed for cross-validation folds");
  fit_cmd->add_option("--out", fit.out, "Output fit JSON path")->required();

  ScreenArgs screen;
  CLI::App* screen_cmd =
      app.add_subcommand("screen", "Rank instruments by marginal correlation");
  screen_cmd->add_option("--z", screen.z_path, "Instrument matrix CSV")->required();
  screen_cmd->add_option("--x", screen.x_path, "Exposure matrix CSV")->required();
  screen_cmd->add_option("--top", screen.top, "Number of instruments to keep")
      ->check(CLI::PositiveNumber);
  screen_cmd->add_option("--out", screen.out, "Output CSV path")->required();

  LaplacianArgs lap;
  CLI::App* lap_cmd =
      app.add_subcommand("laplacian", "Build a graph Laplacian and report its spectrum");
  lap_cmd->add_option("--edges", lap.edges_path, "Edge list TSV (src dst weight, 1-based)");
  lap_cmd->add_option("--coords", lap.coords_path, "Node coordinate CSV (x,y,z)");
  lap_cmd->add_option("--threshold", lap.threshold, "Distance threshold for --coords")
      ->check(CLI::PositiveNumber);
  lap_cmd->add_option("--kind", lap.kind, "normalized or unnormalized")
      ->check(CLI::IsMember({"normalized", "unnormalized"}));
  lap_cmd->add_option("--out", lap.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (screen_cmd->parsed()) return cmd_screen(screen);
    if (lap_cmd->parsed()) return cmd_laplacian(lap);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
