#pragma once

// Penalized least-squares solvers: coordinate-descent lasso, its
// graph-penalized extension, and K-fold cross-validation over penalty grids.
//
// All solvers minimize, over beta,
//
//   (2n)^-1 ||y - X beta||^2 + lambda1 ||beta||_1 + lambda2 beta' L beta
//
// (lambda2 = 0 for the plain lasso). The quadratic graph penalty is handled
// by augmenting the design with sqrt(2 n lambda2) S, where S'S = L, so a
// single coordinate-descent kernel covers both problems. Internally the
// kernel works on the Gram form (X'X, X'y) of the augmented, optionally
// centered/standardized problem; that makes the per-fold Gram matrices
// reusable across the many responses the two-stage pipelines fit against one
// design.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "ivgl/graph.hpp"

namespace ivgl {

// Y and the columns of X are always mean-centered before fitting (the models
// are intercept-free and coefficients are reported on the centered scale);
// `standardize` additionally scales X columns to unit sample standard
// deviation, with coefficients unscaled back. The graph penalty always
// applies to the unscaled coefficients. `intercept` exposes the centering
// offset (mean(y) - mean(x)'beta) in LassoFit::intercept instead of 0.
struct SolverConfig {
  int max_sweeps = 10000;        ///< coordinate sweeps per lambda before giving up
  /// Convergence threshold: a full coordinate pass must fail to improve any
  /// single coordinate's objective by more than tol * y_ss / (2n), i.e. the
  /// threshold is relative to the null model's loss. Returned fits are
  /// additionally polished until the KKT certificate holds at 1e-6.
  double tol = 1e-8;
  bool standardize = true;       ///< scale X columns to unit sample std
  bool intercept = false;        ///< report the centering offset as an intercept
  int lambda_grid_size = 100;    ///< points on the lambda1 path
  double lambda_min_ratio = 1e-3;///< smallest lambda1 as a fraction of lambda_max
  int cv_folds = 10;             ///< K for cross-validation
  std::uint64_t rng_seed = 0;    ///< seeds the fold shuffle
  /// Pick the largest lambda1 whose CV error is within one standard error of
  /// the minimum (the usual parsimony rule) instead of the minimizer itself.
  /// Applies along the lambda1 path only; lambda2 stays at the CV minimum.
  bool cv_one_se = false;
};

struct LassoFit {
  Eigen::VectorXd beta;              ///< coefficients on the original scale
  double intercept = 0.0;            ///< prediction offset (0 when nothing is centered)
  double lambda = 0.0;               ///< l1 level the fit was solved at
  std::vector<double> objective_trace;  ///< objective after each sweep (non-increasing)
  int n_sweeps = 0;                  ///< sweeps spent at this lambda
  double kkt_violation = 0.0;        ///< max subgradient violation at the solution
  bool converged = false;
};

/// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

/// Deterministic K-fold assignment: a seeded Fisher-Yates shuffle of the row
/// indices dealt round-robin into k folds.
struct CvFolds {
  int n = 0;
  int k = 0;
  std::vector<int> fold_of;  ///< size n, values in [0, k)

  static CvFolds make(int n, int k, std::uint64_t seed);
};

/// Preprocessed (centered/scaled) Gram matrices for one design over the full
/// sample and over each cross-validation training split. Building one of
/// these is the expensive part of a CV fit; the pipelines build it once per
/// design and reuse it across every response fitted against that design.
class DesignCache {
 public:
  /// Slot 0 holds the full sample; slot f+1 holds the training rows of fold f
  /// (folds may be empty for direct, non-CV solves). Columns are always
  /// centered; `scale` additionally standardizes them.
  DesignCache(const Eigen::MatrixXd& X, const CvFolds& folds, bool scale);

  /// Cache with CV folds derived from cfg (cv_folds, rng_seed, standardize).
  static DesignCache for_cv(const Eigen::MatrixXd& X, const SolverConfig& cfg);
  /// Single-slot cache for a direct solve.
  static DesignCache direct(const Eigen::MatrixXd& X, const SolverConfig& cfg);

  int cols() const { return static_cast<int>(x_.cols()); }
  int slots() const { return static_cast<int>(gram_.size()); }
  int rows(int slot) const { return nrows_[slot]; }
  const CvFolds& folds() const { return folds_; }
  const Eigen::MatrixXd& design() const { return x_; }

  const Eigen::MatrixXd& gram(int slot) const { return gram_[slot]; }
  const Eigen::VectorXd& col_mean(int slot) const { return mean_[slot]; }
  const Eigen::VectorXd& col_scale(int slot) const { return scale_[slot]; }
  /// Preprocessed rows held out of fold f (evaluated with fold-f training
  /// means and scales).
  const Eigen::MatrixXd& heldout(int fold) const { return heldout_x_[fold]; }
  const std::vector<int>& heldout_rows(int fold) const { return heldout_rows_[fold]; }

  /// Products the solver needs for a response on a given slot:
  /// c = X~' y~, y_ss = ||y~||^2, and the training mean of y.
  struct Response {
    Eigen::VectorXd c;
    double y_ss = 0.0;
    double y_mean = 0.0;
  };
  Response response(int slot, const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd x_;
  CvFolds folds_;
  bool scale_flag_ = false;
  std::vector<Eigen::MatrixXd> xt_;  ///< preprocessed training submatrix per slot
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> mean_;
  std::vector<Eigen::VectorXd> scale_;
  std::vector<int> nrows_;
  std::vector<std::vector<int>> slot_rows_;
  std::vector<Eigen::MatrixXd> heldout_x_;
  std::vector<std::vector<int>> heldout_rows_;
};

struct CvLassoResult {
  double lambda1 = 0.0;
  LassoFit fit;
};

struct CvGraphLassoResult {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  LassoFit fit;
};

/// Lasso at a fixed lambda.
LassoFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                  const SolverConfig& cfg = {});

/// Graph-penalized lasso at fixed (lambda1, lambda2), solved on the design
/// augmented with sqrt(2 n lambda2) S.
LassoFit graph_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Laplacian& L, double lambda1, double lambda2,
                     const SolverConfig& cfg = {});

/// K-fold CV over the lambda1 path (lambda_max down to
/// lambda_min_ratio * lambda_max, log-spaced, lambda_grid_size points),
/// followed by a refit on the full sample at the selected lambda1.
CvLassoResult cv_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const SolverConfig& cfg = {});
CvLassoResult cv_lasso(const DesignCache& cache, const Eigen::VectorXd& y,
                       const SolverConfig& cfg = {});

/// Joint CV over the lambda1 path and an explicit lambda2 grid; ties prefer
/// the larger lambda1 and the earlier lambda2 grid entry.
CvGraphLassoResult cv_graph_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Laplacian& L,
                                  const std::vector<double>& lambda2_grid,
                                  const SolverConfig& cfg = {});
CvGraphLassoResult cv_graph_lasso(const DesignCache& cache, const Eigen::VectorXd& y,
                                  const Laplacian& L,
                                  const std::vector<double>& lambda2_grid,
                                  const SolverConfig& cfg = {});

/// Grid the graph estimators cross-validate lambda2 over by default.
std::vector<double> default_lambda2_grid();

}  // namespace ivgl
