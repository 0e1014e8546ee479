// Python bindings for the core estimators, graph utilities, metrics, and the
// simulation data generator. Matrices cross the boundary as numpy arrays via
// Eigen; node/instrument indices are 0-based on the python side.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivgl/graph.hpp"
#include "ivgl/invalid_iv.hpp"
#include "ivgl/io.hpp"
#include "ivgl/metrics.hpp"
#include "ivgl/simulate.hpp"
#include "ivgl/solver.hpp"
#include "ivgl/two_stage.hpp"

namespace py = pybind11;
using namespace ivgl;

namespace {

LaplacianKind kind_from_string(const std::string& s) {
  if (s == "normalized") return LaplacianKind::normalized;
  if (s == "unnormalized") return LaplacianKind::unnormalized;
  throw std::invalid_argument("unknown Laplacian kind '" + s +
                              "' (expected normalized or unnormalized)");
}

Graph graph_from_edges(int node_count, const std::vector<std::tuple<int, int, double>>& edges) {
  std::vector<Edge> list;
  list.reserve(edges.size());
  for (const auto& [src, dst, w] : edges) list.push_back({src, dst, w});
  return Graph(node_count, std::move(list));
}

py::dict fit_to_dict(const FitResult& fit) {
  py::dict d;
  d["method"] = method_tag(fit.method);
  d["beta"] = fit.beta;
  d["alpha"] = fit.alpha;
  d["intercept"] = fit.intercept;
  d["lambda1"] = fit.lambda1;
  d["lambda2"] = fit.lambda2;
  d["lambda3"] = fit.lambda3;
  d["support"] = fit.support;
  d["objective"] = fit.objective;
  d["converged"] = fit.converged;
  d["alt_iterations"] = fit.alt_iterations;
  d["kkt_violation"] = fit.max_kkt;
  d["seed"] = fit.seed;
  return d;
}

py::dict fit_any(const std::string& method, const Eigen::VectorXd& y,
                 const Eigen::MatrixXd& x, std::optional<Eigen::MatrixXd> z,
                 std::optional<Laplacian> L, std::uint64_t seed,
                 std::optional<std::vector<double>> lambda2_grid) {
  Dataset ds;
  ds.Y = y;
  ds.X = x;
  if (z) ds.Z = *z;

  SolverConfig cfg;
  cfg.rng_seed = seed;
  std::vector<double> grid = lambda2_grid ? *lambda2_grid : default_lambda2_grid();

  Method m = parse_method(method);
  if (m != Method::IVL && !L) {
    throw std::invalid_argument("method '" + method + "' needs a laplacian");
  }

  FitResult fit;
  switch (m) {
    case Method::GL:
      fit = gl_fit(ds, *L, cfg, grid);
      break;
    case Method::IVL:
      fit = ivl_fit(ds, cfg);
      break;
    case Method::IVGL:
      fit = ivgl_fit(ds, *L, cfg, grid);
      break;
    case Method::IVGLS: {
      IvglsOptions opts;
      opts.lambda2_grid = grid;
      fit = ivgls_fit(ds, *L, cfg, opts);
      break;
    }
  }
  return fit_to_dict(fit);
}

py::dict dataset_to_dict(const SimData& d) {
  py::dict out;
  out["y"] = d.dataset.Y;
  out["x"] = d.dataset.X;
  out["z"] = d.dataset.Z;
  out["beta0"] = d.truth.beta0;
  out["alpha0"] = d.truth.alpha0;
  out["S0"] = d.truth.S0;
  std::vector<std::tuple<int, int, double>> edges;
  for (const Edge& e : d.truth.graph.edges()) edges.emplace_back(e.src, e.dst, e.weight);
  out["edges"] = edges;
  out["node_count"] = d.truth.graph.node_count();
  out["coords"] = d.truth.coords;
  out["laplacian_kind"] = to_string(d.truth.laplacian_kind);
  out["seed"] = d.seed;
  return out;
}

py::dict generate(int setup, double si, int s0, std::uint64_t seed, int n, int p, int q,
                  int n_replicate_offset) {
  SimConfig cfg;
  cfg.setup = setup;
  cfg.si = si;
  cfg.s0 = s0;
  cfg.n = n;
  cfg.p = p;
  cfg.q = q;
  cfg.base_seed = seed;
  return dataset_to_dict(gen_dataset(cfg, seed + static_cast<std::uint64_t>(n_replicate_offset)));
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Graph-constrained instrumental-variable regression";

  py::class_<Graph>(mod, "Graph")
      .def(py::init(&graph_from_edges), py::arg("node_count"), py::arg("edges"),
           "Undirected weighted graph; edges are (src, dst, weight) with 0-based nodes")
      .def_property_readonly("node_count", &Graph::node_count)
      .def_property_readonly("degrees", &Graph::degrees)
      .def("adjacency", &Graph::adjacency)
      .def("edges", [](const Graph& g) {
        std::vector<std::tuple<int, int, double>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.src, e.dst, e.weight);
        return out;
      });

  py::class_<Laplacian>(mod, "Laplacian")
      .def_property_readonly("kind", [](const Laplacian& L) { return to_string(L.kind); })
      .def_readonly("matrix", &Laplacian::matrix)
      .def_readonly("sqrt_factor", &Laplacian::sqrt_factor);

  mod.def("ring_graph", &build_ring, py::arg("node_count"),
          "Cycle graph over node_count >= 3 nodes with unit weights");
  mod.def("distance_graph", &build_distance_graph, py::arg("coords"), py::arg("threshold"),
          "Unit-weight edges between rows of coords closer than threshold");
  mod.def(
      "laplacian",
      [](const Graph& g, const std::string& kind) { return laplacian(g, kind_from_string(kind)); },
      py::arg("graph"), py::arg("kind") = "normalized");
  mod.def(
      "contiguous_cluster",
      [](const Graph& g, int seed_node, int size) { return contiguous_cluster(g, seed_node, size); },
      py::arg("graph"), py::arg("seed_node"), py::arg("size"),
      "Breadth-first cluster of the requested size around seed_node");

  mod.def("fit", &fit_any, py::arg("method"), py::arg("y"), py::arg("x"),
          py::arg("z") = py::none(), py::arg("laplacian") = py::none(), py::arg("seed") = 0,
          py::arg("lambda2_grid") = py::none(),
          "Fit gl/ivl/ivgl/ivgls; returns a dict of estimates and diagnostics");

  mod.def("sis_screen", &sis_screen, py::arg("z"), py::arg("x"), py::arg("top"),
          "Indices (0-based) of the top instruments by marginal correlation");
  mod.def("sis_scores", &sis_scores, py::arg("z"), py::arg("x"));

  mod.def("mse", &mse, py::arg("beta_hat"), py::arg("beta0"),
          "Mean squared error over coordinates");
  mod.def(
      "mcc",
      [](const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
        return mcc(selection_outcome(beta_hat, beta0));
      },
      py::arg("beta_hat"), py::arg("beta0"),
      "Matthews correlation of the selected support against the true one");
  mod.def("sign_recovery", &sign_recovery, py::arg("beta_hat"), py::arg("beta0"));

  mod.def("generate", &generate, py::arg("setup"), py::arg("si") = 1.0, py::arg("s0") = 4,
          py::arg("seed") = 1, py::arg("n") = 100, py::arg("p") = 70, py::arg("q") = 500,
          py::arg("replicate") = 0,
          "One synthetic dataset from benchmark setup 1 or 2, as a dict of arrays");

  mod.attr("__version__") = version_string();
}
