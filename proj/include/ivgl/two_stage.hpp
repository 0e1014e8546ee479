#pragma once

// Two-stage network-penalized instrumental-variable estimators.
//
// Stage 1 regresses each exposure column on the instruments with a
// cross-validated lasso and forms predicted exposures X_hat = Z * A_hat.
// Stage 2 regresses the outcome on X_hat with an l1 penalty plus an optional
// graph-Laplacian smoothness penalty over the exposure network:
//
//   IVGL   cross-validated graph lasso of y on X_hat
//   IVL    cross-validated lasso of y on X_hat (no network)
//   GL     cross-validated graph lasso of y on the observed X (no instruments)
//
// sis_screen provides the marginal-correlation instrument screening used to
// cut very large instrument panels down before stage 1.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ivgl/graph.hpp"
#include "ivgl/solver.hpp"

namespace ivgl {

struct Dataset {
  Eigen::VectorXd Y;            ///< outcome, length n
  Eigen::MatrixXd X;            ///< exposures, n x p
  Eigen::MatrixXd Z;            ///< instruments, n x q (may be empty for GL)
  std::vector<std::string> node_names;        ///< length p (defaulted if empty)
  std::vector<std::string> instrument_names;  ///< length q (defaulted if empty)
};

/// Throws invalid_argument on dimension mismatches, non-finite values, or a
/// missing instrument block when require_z is set.
void validate_dataset(const Dataset& ds, bool require_z);

/// "x1".."xp" / "z1".."zq" when the dataset carries no names.
std::vector<std::string> effective_node_names(const Dataset& ds);
std::vector<std::string> effective_instrument_names(const Dataset& ds);

struct Stage1Fit {
  Eigen::MatrixXd A_hat;             ///< q x p, column j from the lasso of X_j on Z
  Eigen::MatrixXd X_hat;             ///< n x p predicted exposures, exactly Z * A_hat
  Eigen::VectorXd per_column_lambda; ///< CV-selected lambda per exposure column
  double max_kkt = 0.0;              ///< worst KKT violation across the p fits
  bool converged = true;             ///< all column fits converged
};

/// Per-column cross-validated lasso of X on Z. Intercepts are dropped so that
/// X_hat stays exactly in the column space of Z (any constant offset is
/// absorbed by the centered stage-2 fit).
Stage1Fit stage1_fit(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X,
                     const SolverConfig& cfg = {});

enum class Method { GL, IVL, IVGL, IVGLS };

std::string method_tag(Method m);

struct FitResult {
  Method method = Method::IVGL;
  Eigen::VectorXd beta;               ///< exposure coefficients, length p
  Eigen::VectorXd alpha;              ///< direct instrument effects (IVGL-S only)
  double intercept = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;               ///< IVGL-S only
  std::vector<int> support;           ///< nonzero beta indices, 0-based ascending
  std::vector<double> objective_trace;
  double objective = 0.0;             ///< final objective value
  bool converged = true;
  int alt_iterations = 0;             ///< IVGL-S alternations used
  double max_kkt = 0.0;               ///< worst KKT violation across internal solves
  std::uint64_t seed = 0;             ///< rng seed the fit ran under
};

/// IVGL: stage 1, then CV graph lasso of Y on X_hat over lambda2_grid.
FitResult ivgl_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg = {},
                   const std::vector<double>& lambda2_grid = default_lambda2_grid());
FitResult ivgl_fit_with_stage1(const Dataset& ds, const Laplacian& L,
                               const Stage1Fit& stage1, const SolverConfig& cfg = {},
                               const std::vector<double>& lambda2_grid = default_lambda2_grid());

/// IVL: stage 1, then CV lasso of Y on X_hat (equals ivgl_fit with grid {0}).
FitResult ivl_fit(const Dataset& ds, const SolverConfig& cfg = {});
FitResult ivl_fit_with_stage1(const Dataset& ds, const Stage1Fit& stage1,
                              const SolverConfig& cfg = {});

/// GL: CV graph lasso of Y on the observed X; instruments ignored.
FitResult gl_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg = {},
                 const std::vector<double>& lambda2_grid = default_lambda2_grid());

/// Sure-independence screening of instruments: score_l is the absolute
/// Pearson correlation between Z_l and the per-subject mean of the exposure
/// columns (0 when either side has zero variance). Returns the indices of the
/// top_k scores, descending; ties break toward the lower index.
std::vector<int> sis_screen(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X, int top_k);

/// The scores behind sis_screen, length q.
Eigen::VectorXd sis_scores(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X);

}  // namespace ivgl
