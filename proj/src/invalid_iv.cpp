#include "ivgl/invalid_iv.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <stdexcept>

#include "ivgl/metrics.hpp"

namespace ivgl {

Projector projector(const Eigen::MatrixXd& Z) {
  if (Z.rows() < 1) throw std::invalid_argument("projector: empty matrix");
  if (!Z.allFinite()) throw std::invalid_argument("projector: non-finite values");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? 1e-10 * sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) ++rank;
  }
  Projector p;
  p.rank = rank;
  p.basis = svd.matrixU().leftCols(rank);
  return p;
}

namespace {

/// Penalized residual objective the alternation descends, evaluated at the
/// optimal centering offset (both steps implicitly re-optimize it, so this is
/// the quantity that decreases monotonically at fixed penalties). It matches
/// the projected objective up to a constant because the designs span the
/// instrument column space. Solver lambdas are per-(2n) loss, hence the
/// factor n on the penalties.
double alternation_objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& xb,
                             const Eigen::MatrixXd& z, const Laplacian& L,
                             const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                             double n, double l1, double l2, double l3) {
  Eigen::VectorXd r = y - xb * beta - z * alpha;
  r.array() -= r.mean();
  return 0.5 * r.squaredNorm() +
         n * (l1 * beta.lpNorm<1>() + l2 * beta.dot(L.matrix * beta) +
              l3 * alpha.lpNorm<1>());
}

}  // namespace

double objective_eq3(const Dataset& ds, const Laplacian& L, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& alpha, double lambda1, double lambda2,
                     double lambda3) {
  validate_dataset(ds, true);
  if (L.size() != ds.X.cols()) {
    throw std::invalid_argument("objective_eq3: Laplacian does not match exposure count");
  }
  if (beta.size() != ds.X.cols() || alpha.size() != ds.Z.cols()) {
    throw std::invalid_argument("objective_eq3: coefficient lengths do not match data");
  }
  Projector p = projector(ds.Z);
  Eigen::VectorXd r = ds.Y - ds.X * beta - ds.Z * alpha;
  Eigen::VectorXd pr = p.apply(r);
  return 0.5 * pr.squaredNorm() + lambda1 * beta.lpNorm<1>() +
         lambda2 * beta.dot(L.matrix * beta) + lambda3 * alpha.lpNorm<1>();
}

FitResult ivgls_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg,
                    const IvglsOptions& opts) {
  validate_dataset(ds, true);
  Stage1Fit stage1 = stage1_fit(ds.Z, ds.X, cfg);
  return ivgls_fit_with_stage1(ds, L, stage1, cfg, opts);
}

FitResult ivgls_fit_with_stage1(const Dataset& ds, const Laplacian& L,
                                const Stage1Fit& stage1, const SolverConfig& cfg,
                                const IvglsOptions& opts) {
  validate_dataset(ds, true);
  if (L.size() != ds.X.cols()) {
    throw std::invalid_argument("ivgls_fit: Laplacian does not match exposure count");
  }
  if (opts.max_alt_iters < 1) {
    throw std::invalid_argument("ivgls_fit: max_alt_iters must be >= 1");
  }
  if (!(opts.alt_tol > 0.0)) {
    throw std::invalid_argument("ivgls_fit: alt_tol must be positive");
  }
  const int p = static_cast<int>(ds.X.cols());
  const int q = static_cast<int>(ds.Z.cols());
  const double n = static_cast<double>(ds.Y.size());
  const Eigen::MatrixXd& xb = opts.use_raw_x ? ds.X : stage1.X_hat;

  // The designs never change across alternations, only the working
  // responses, so both Gram caches are built once.
  const bool cv_mode = !opts.fixed_lambdas;
  SolverConfig step_cfg = cfg;
  step_cfg.cv_one_se = opts.one_se_cv || cfg.cv_one_se;
  std::optional<DesignCache> zc, xc;
  if (cv_mode) {
    zc.emplace(DesignCache::for_cv(ds.Z, step_cfg));
    xc.emplace(DesignCache::for_cv(xb, step_cfg));
  }

  FitResult out;
  out.method = Method::IVGLS;
  out.seed = cfg.rng_seed;
  out.max_kkt = stage1.max_kkt;
  bool steps_converged = stage1.converged;

  AlternatingState state;
  state.beta = Eigen::VectorXd::Zero(p);
  state.alpha = Eigen::VectorXd::Zero(q);
  double l1 = opts.lambda1, l2 = opts.lambda2, l3 = opts.lambda3;
  double intercept = 0.0;

  while (state.iteration < opts.max_alt_iters && !state.converged) {
    Eigen::VectorXd beta_prev = state.beta;
    Eigen::VectorXd alpha_prev = state.alpha;

    // (a) exposure effects against the alpha-adjusted outcome. Running this
    // block first matters: on the first pass (alpha = 0) it is exactly the
    // plain IVGL second stage, so the loop refines that estimate. Starting
    // with the alpha block instead would regress the raw outcome on Z, and
    // with q >= n that lasso absorbs the instrument-mediated causal signal
    // itself, leaving the beta block nothing to fit.
    Eigen::VectorXd r_beta = ds.Y - ds.Z * state.alpha;
    if (cv_mode) {
      CvGraphLassoResult res = cv_graph_lasso(*xc, r_beta, L, opts.lambda2_grid, step_cfg);
      state.beta = res.fit.beta;
      intercept = res.fit.intercept;
      l1 = res.lambda1;
      l2 = res.lambda2;
      out.max_kkt = std::max(out.max_kkt, res.fit.kkt_violation);
      steps_converged = steps_converged && res.fit.converged;
    } else {
      LassoFit fit = graph_lasso(xb, r_beta, L, opts.lambda1, opts.lambda2, cfg);
      state.beta = fit.beta;
      intercept = fit.intercept;
      out.max_kkt = std::max(out.max_kkt, fit.kkt_violation);
      steps_converged = steps_converged && fit.converged;
    }

    // (b) direct instrument effects against the current exposure fit
    Eigen::VectorXd r_alpha = ds.Y - xb * state.beta;
    if (cv_mode) {
      CvLassoResult res = cv_lasso(*zc, r_alpha, step_cfg);
      state.alpha = res.fit.beta;
      l3 = res.lambda1;
      out.max_kkt = std::max(out.max_kkt, res.fit.kkt_violation);
      steps_converged = steps_converged && res.fit.converged;
    } else {
      LassoFit fit = lasso_cd(ds.Z, r_alpha, opts.lambda3, cfg);
      state.alpha = fit.beta;
      out.max_kkt = std::max(out.max_kkt, fit.kkt_violation);
      steps_converged = steps_converged && fit.converged;
    }

    ++state.iteration;
    double prev_scale = std::max(
        {1.0, beta_prev.lpNorm<Eigen::Infinity>(), alpha_prev.lpNorm<Eigen::Infinity>()});
    double change = std::max((state.beta - beta_prev).lpNorm<Eigen::Infinity>(),
                             (state.alpha - alpha_prev).lpNorm<Eigen::Infinity>());
    state.delta = change / prev_scale;
    state.converged = state.delta < opts.alt_tol;

    out.objective_trace.push_back(alternation_objective(
        ds.Y, xb, ds.Z, L, state.beta, state.alpha, n, l1, l2, l3));
  }

  out.beta = state.beta;
  out.alpha = state.alpha;
  out.intercept = intercept;
  out.lambda1 = l1;
  out.lambda2 = l2;
  out.lambda3 = l3;
  out.alt_iterations = state.iteration;
  out.converged = state.converged && steps_converged;
  out.support = support(out.beta);
  out.objective = objective_eq3(ds, L, out.beta, out.alpha, n * l1, n * l2, n * l3);
  return out;
}

}  // namespace ivgl
