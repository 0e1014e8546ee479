#pragma once

// Simulation protocols and the Monte Carlo replication harness.
//
// Setup 1 (valid instruments): exposures on a ring network, confounded by a
// shared latent factor, outcome driven by a contiguous block of exposures.
// Setup 2 (invalid instruments): exposures on a 3-d distance graph, a block
// of instruments with direct outcome effects, true support grown as a
// connected cluster.
//
// Every random draw comes from named Philox streams keyed by the replicate
// seed, so datasets are reproducible bit-for-bit independent of scheduling.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ivgl/graph.hpp"
#include "ivgl/invalid_iv.hpp"
#include "ivgl/solver.hpp"
#include "ivgl/two_stage.hpp"

namespace ivgl {

struct SimConfig {
  int setup = 1;
  int n = 100;
  int p = 70;
  int q = 500;
  int s0 = 4;            ///< true support size
  double si = 1.0;       ///< signal intensity multiplier on beta0
  int n_replicates = 100;
  std::uint64_t base_seed = 0;

  double first_stage_density = 0.10;  ///< fraction of instruments per exposure
  double gamma_min = 0.2;             ///< confounding loading range
  double gamma_max = 0.7;

  // setup 2
  int n_invalid = 10;
  double alpha_value = 5.0;
  double coord_max = 100.0;
  double distance_threshold = 30.0;

  SolverConfig solver;
  std::vector<double> lambda2_grid = default_lambda2_grid();
  IvglsOptions ivgls;
};

struct SimTruth {
  Eigen::VectorXd beta0;    ///< p
  Eigen::VectorXd alpha0;   ///< q (all zero in setup 1)
  Eigen::MatrixXd A0;       ///< q x p first-stage coefficients
  std::vector<int> S0;      ///< true support, ascending 0-based
  Eigen::VectorXd gamma_x;  ///< p confounder loadings on exposures
  double gamma_y = 0.0;     ///< confounder loading on the outcome
  Eigen::VectorXd U;        ///< n latent confounder
  Graph graph;
  Eigen::MatrixXd coords;   ///< p x 3 node coordinates (setup 2; empty otherwise)
  LaplacianKind laplacian_kind = LaplacianKind::normalized;
};

struct SimData {
  Dataset dataset;
  SimTruth truth;
  std::uint64_t seed = 0;
};

/// Ring network, all instruments valid, S0 = first s0 nodes.
SimData gen_setup1(const SimConfig& cfg, std::uint64_t seed);

/// Distance graph from uniform 3-d coordinates, first n_invalid instruments
/// carry direct effects, S0 grown by BFS from a random seed node.
SimData gen_setup2(const SimConfig& cfg, std::uint64_t seed);

/// Dispatches on cfg.setup.
SimData gen_dataset(const SimConfig& cfg, std::uint64_t seed);

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  Method method = Method::IVGL;
  bool ok = false;
  std::string error;
  double mse = 0.0;
  double mcc_value = 0.0;
  bool sign_ok = false;
  int support_size = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  bool converged = false;
  double kkt = 0.0;            ///< worst KKT violation across the method's solves
  double irrep = 0.0;          ///< irrepresentability at the selected lambda2 (NaN if unavailable)
  bool invalid_detected = false;  ///< IVGL-S: every truly invalid instrument flagged
  double runtime_sec = 0.0;
};

struct CellSummary {
  int setup = 1;
  double si = 1.0;
  int s0 = 4;
  Method method = Method::IVGL;
  int n_ok = 0;
  double mean_mse = 0.0;
  double se_mse = 0.0;   ///< NaN when fewer than 2 successful replicates
  double median_mcc = 0.0;
  double mcc_q1 = 0.0;
  double mcc_q3 = 0.0;
};

struct SummaryTable {
  SimConfig config;
  std::vector<ReplicateRecord> records;  ///< replicate-major, then method order
  std::vector<CellSummary> cells;        ///< one per method
};

/// Runs n_replicates independent datasets (seed = base_seed + r) and fits the
/// requested methods on each. The stage-1 fit is shared across IV methods
/// within a replicate. jobs > 1 distributes replicates over threads; results
/// are merged by replicate index, so output is identical for any job count.
SummaryTable run_replications(const SimConfig& cfg, const std::vector<Method>& methods,
                              int jobs = 1);

/// Per-method summary rows from a set of replicate records.
std::vector<CellSummary> summarize(const SimConfig& cfg,
                                   const std::vector<ReplicateRecord>& records,
                                   const std::vector<Method>& methods);

/// Type-7 (linear interpolation) quantile of a sample; q in [0, 1].
double quantile_type7(std::vector<double> values, double q);

}  // namespace ivgl
