#include "ivgl/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ivgl/metrics.hpp"

namespace ivgl {

void validate_dataset(const Dataset& ds, bool require_z) {
  const auto n = ds.Y.size();
  if (n < 1) throw std::invalid_argument("dataset: empty outcome");
  if (ds.X.rows() != n) throw std::invalid_argument("dataset: X rows do not match Y length");
  if (ds.X.cols() < 1) throw std::invalid_argument("dataset: X has no columns");
  if (!ds.Y.allFinite() || !ds.X.allFinite()) {
    throw std::invalid_argument("dataset: non-finite values in Y or X");
  }
  if (require_z) {
    if (ds.Z.size() == 0) throw std::invalid_argument("dataset: instruments required");
    if (ds.Z.rows() != n) throw std::invalid_argument("dataset: Z rows do not match Y length");
    if (!ds.Z.allFinite()) throw std::invalid_argument("dataset: non-finite values in Z");
  }
  if (!ds.node_names.empty() &&
      static_cast<Eigen::Index>(ds.node_names.size()) != ds.X.cols()) {
    throw std::invalid_argument("dataset: node names do not match X columns");
  }
  if (!ds.instrument_names.empty() &&
      static_cast<Eigen::Index>(ds.instrument_names.size()) != ds.Z.cols()) {
    throw std::invalid_argument("dataset: instrument names do not match Z columns");
  }
}

namespace {

std::vector<std::string> numbered(const std::string& prefix, int count) {
  std::vector<std::string> names(count);
  for (int i = 0; i < count; ++i) names[i] = prefix + std::to_string(i + 1);
  return names;
}

}  // namespace

std::vector<std::string> effective_node_names(const Dataset& ds) {
  if (!ds.node_names.empty()) return ds.node_names;
  return numbered("x", static_cast<int>(ds.X.cols()));
}

std::vector<std::string> effective_instrument_names(const Dataset& ds) {
  if (!ds.instrument_names.empty()) return ds.instrument_names;
  return numbered("z", static_cast<int>(ds.Z.cols()));
}

std::string method_tag(Method m) {
  switch (m) {
    case Method::GL: return "GL";
    case Method::IVL: return "IVL";
    case Method::IVGL: return "IVGL";
    case Method::IVGLS: return "IVGL-S";
  }
  throw std::invalid_argument("method_tag: unknown method");
}

Stage1Fit stage1_fit(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X,
                     const SolverConfig& cfg) {
  if (Z.rows() != X.rows()) {
    throw std::invalid_argument("stage1_fit: Z and X have different numbers of rows");
  }
  if (Z.cols() < 1 || X.cols() < 1) {
    throw std::invalid_argument("stage1_fit: empty instrument or exposure block");
  }
  if (!Z.allFinite() || !X.allFinite()) {
    throw std::invalid_argument("stage1_fit: non-finite values");
  }
  const int p = static_cast<int>(X.cols());
  const int q = static_cast<int>(Z.cols());

  DesignCache cache = DesignCache::for_cv(Z, cfg);
  Stage1Fit out;
  out.A_hat.resize(q, p);
  out.per_column_lambda.resize(p);
  for (int j = 0; j < p; ++j) {
    CvLassoResult res = cv_lasso(cache, X.col(j), cfg);
    out.A_hat.col(j) = res.fit.beta;
    out.per_column_lambda[j] = res.lambda1;
    out.max_kkt = std::max(out.max_kkt, res.fit.kkt_violation);
    out.converged = out.converged && res.fit.converged;
  }
  out.X_hat = Z * out.A_hat;
  return out;
}

namespace {

FitResult second_stage(Method method, const Eigen::MatrixXd& design,
                       const Eigen::VectorXd& y, const Laplacian* L,
                       const std::vector<double>& lambda2_grid, const SolverConfig& cfg,
                       const Stage1Fit* stage1) {
  FitResult out;
  out.method = method;
  out.seed = cfg.rng_seed;
  if (L != nullptr) {
    CvGraphLassoResult res = cv_graph_lasso(design, y, *L, lambda2_grid, cfg);
    out.beta = res.fit.beta;
    out.intercept = res.fit.intercept;
    out.lambda1 = res.lambda1;
    out.lambda2 = res.lambda2;
    out.objective_trace = res.fit.objective_trace;
    out.objective = res.fit.objective_trace.empty() ? 0.0 : res.fit.objective_trace.back();
    out.converged = res.fit.converged;
    out.max_kkt = res.fit.kkt_violation;
  } else {
    CvLassoResult res = cv_lasso(design, y, cfg);
    out.beta = res.fit.beta;
    out.intercept = res.fit.intercept;
    out.lambda1 = res.lambda1;
    out.objective_trace = res.fit.objective_trace;
    out.objective = res.fit.objective_trace.empty() ? 0.0 : res.fit.objective_trace.back();
    out.converged = res.fit.converged;
    out.max_kkt = res.fit.kkt_violation;
  }
  if (stage1 != nullptr) {
    out.max_kkt = std::max(out.max_kkt, stage1->max_kkt);
    out.converged = out.converged && stage1->converged;
  }
  out.support = support(out.beta);
  return out;
}

}  // namespace

FitResult ivgl_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg,
                   const std::vector<double>& lambda2_grid) {
  validate_dataset(ds, true);
  Stage1Fit stage1 = stage1_fit(ds.Z, ds.X, cfg);
  return ivgl_fit_with_stage1(ds, L, stage1, cfg, lambda2_grid);
}

FitResult ivgl_fit_with_stage1(const Dataset& ds, const Laplacian& L,
                               const Stage1Fit& stage1, const SolverConfig& cfg,
                               const std::vector<double>& lambda2_grid) {
  validate_dataset(ds, true);
  if (L.size() != ds.X.cols()) {
    throw std::invalid_argument("ivgl_fit: Laplacian does not match exposure count");
  }
  return second_stage(Method::IVGL, stage1.X_hat, ds.Y, &L, lambda2_grid, cfg, &stage1);
}

FitResult ivl_fit(const Dataset& ds, const SolverConfig& cfg) {
  validate_dataset(ds, true);
  Stage1Fit stage1 = stage1_fit(ds.Z, ds.X, cfg);
  return ivl_fit_with_stage1(ds, stage1, cfg);
}

FitResult ivl_fit_with_stage1(const Dataset& ds, const Stage1Fit& stage1,
                              const SolverConfig& cfg) {
  validate_dataset(ds, true);
  return second_stage(Method::IVL, stage1.X_hat, ds.Y, nullptr, {}, cfg, &stage1);
}

FitResult gl_fit(const Dataset& ds, const Laplacian& L, const SolverConfig& cfg,
                 const std::vector<double>& lambda2_grid) {
  validate_dataset(ds, false);
  if (L.size() != ds.X.cols()) {
    throw std::invalid_argument("gl_fit: Laplacian does not match exposure count");
  }
  return second_stage(Method::GL, ds.X, ds.Y, &L, lambda2_grid, cfg, nullptr);
}

Eigen::VectorXd sis_scores(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X) {
  if (Z.rows() != X.rows()) {
    throw std::invalid_argument("sis_screen: Z and X have different numbers of rows");
  }
  if (Z.rows() < 2) throw std::invalid_argument("sis_screen: need at least 2 rows");
  if (!Z.allFinite() || !X.allFinite()) {
    throw std::invalid_argument("sis_screen: non-finite values");
  }
  const int q = static_cast<int>(Z.cols());
  Eigen::VectorXd avg = X.rowwise().mean();
  avg.array() -= avg.mean();
  double avg_ss = avg.squaredNorm();
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(q);
  if (avg_ss <= 0.0) return scores;
  for (int l = 0; l < q; ++l) {
    Eigen::VectorXd z = Z.col(l);
    z.array() -= z.mean();
    double z_ss = z.squaredNorm();
    if (z_ss <= 0.0) continue;
    scores[l] = std::abs(z.dot(avg)) / std::sqrt(z_ss * avg_ss);
  }
  return scores;
}

std::vector<int> sis_screen(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& X, int top_k) {
  const int q = static_cast<int>(Z.cols());
  if (top_k < 1 || top_k > q) {
    throw std::invalid_argument("sis_screen: top_k must be in [1, q]");
  }
  Eigen::VectorXd scores = sis_scores(Z, X);
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(top_k);
  return order;
}

}  // namespace ivgl
