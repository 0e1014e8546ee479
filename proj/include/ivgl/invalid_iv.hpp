#pragma once

// Invalid-instrument-robust extension: jointly estimates exposure effects
// (beta, graph-penalized) and direct instrument effects (alpha, l1) by
// alternating two penalized regressions:
//
//   beta-step:   graph lasso of (Y - Z alpha) on X_hat
//   alpha-step:  lasso of (Y - X_hat beta) on Z
//
// The beta block runs first, so from the (0, 0) start the opening step is
// exactly the plain IVGL second stage and the alpha block only ever sees
// outcomes residualized against the current exposure fit. (Alpha-first would
// lasso the raw outcome on Z, which with q >= n soaks up the mediated causal
// signal and strands the alternation at a useless fixed point.)
//
// Because X_hat lies in the instrument column space, each step is an exact
// block minimization of the projected objective
//
//   (1/2) ||P_Z (Y - X beta - Z alpha)||^2
//     + lambda1 ||beta||_1 + lambda2 beta' L beta + lambda3 ||alpha||_1
//
// with X_hat substituted for X. By default each step re-selects its penalty
// level by cross-validation; fixed_lambdas turns that off and yields a plain
// monotone block coordinate descent.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "ivgl/graph.hpp"
#include "ivgl/solver.hpp"
#include "ivgl/two_stage.hpp"

namespace ivgl {

/// Orthogonal projector onto the column space of a matrix, stored as an
/// orthonormal basis B with P = B B' (rank cut at sigma > 1e-10 * sigma_max).
struct Projector {
  Eigen::MatrixXd basis;  ///< n x rank
  int rank = 0;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return basis * (basis.transpose() * v);
  }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
    return basis * (basis.transpose() * m);
  }
};

Projector projector(const Eigen::MatrixXd& Z);

/// One alternation iterate.
struct AlternatingState {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  int iteration = 0;
  double delta = std::numeric_limits<double>::infinity();
  bool converged = false;
};

struct IvglsOptions {
  int max_alt_iters = 30;
  double alt_tol = 1e-6;      ///< relative sup-norm change across one alternation
  bool use_raw_x = false;     ///< beta-step on observed X instead of X_hat
  bool one_se_cv = false;     ///< per-step CV uses the one-standard-error rule
  bool fixed_lambdas = false; ///< skip per-step CV and use the levels below
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  std::vector<double> lambda2_grid = default_lambda2_grid();
};

/// The projected objective above, evaluated with the observed X.
double objective_eq3(const Dataset& ds, const Laplacian& L, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& alpha, double lambda1, double lambda2,
                     double lambda3);

/// Full IVGL-S fit: stage 1, then the alternation from (beta, alpha) = (0, 0).
FitResult ivgls_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg = {},
                    const IvglsOptions& opts = {});
FitResult ivgls_fit_with_stage1(const Dataset& ds, const Laplacian& L,
                                const Stage1Fit& stage1, const SolverConfig& cfg = {},
                                const IvglsOptions& opts = {});

}  // namespace ivgl
