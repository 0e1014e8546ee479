#include "ivgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ivgl {

double mse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
  if (beta_hat.size() != beta0.size()) {
    throw std::invalid_argument("mse: vectors have different lengths");
  }
  if (beta_hat.size() == 0) throw std::invalid_argument("mse: empty vectors");
  return (beta_hat - beta0).squaredNorm() / beta_hat.size();
}

SelectionOutcome selection_outcome(const std::vector<int>& selected,
                                   const std::vector<int>& truth, int p) {
  if (p < 1) throw std::invalid_argument("selection_outcome: p must be positive");
  std::vector<char> sel(p, 0), tru(p, 0);
  for (int j : selected) {
    if (j < 0 || j >= p) throw std::invalid_argument("selection_outcome: index out of range");
    sel[j] = 1;
  }
  for (int j : truth) {
    if (j < 0 || j >= p) throw std::invalid_argument("selection_outcome: index out of range");
    tru[j] = 1;
  }
  SelectionOutcome o;
  for (int j = 0; j < p; ++j) {
    if (sel[j] && tru[j]) ++o.tp;
    else if (sel[j] && !tru[j]) ++o.fp;
    else if (!sel[j] && tru[j]) ++o.fn;
    else ++o.tn;
  }
  return o;
}

SelectionOutcome selection_outcome(const Eigen::VectorXd& beta_hat,
                                   const Eigen::VectorXd& beta0) {
  if (beta_hat.size() != beta0.size()) {
    throw std::invalid_argument("selection_outcome: vectors have different lengths");
  }
  return selection_outcome(support(beta_hat), support(beta0),
                           static_cast<int>(beta_hat.size()));
}

double mcc(const SelectionOutcome& o) {
  double tp = o.tp, fp = o.fp, tn = o.tn, fn = o.fn;
  double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / denom;
}

bool sign_recovery(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
  if (beta_hat.size() != beta0.size()) {
    throw std::invalid_argument("sign_recovery: vectors have different lengths");
  }
  auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  for (int j = 0; j < beta_hat.size(); ++j) {
    if (sgn(beta_hat[j]) != sgn(beta0[j])) return false;
  }
  return true;
}

std::vector<int> support(const Eigen::VectorXd& beta) {
  std::vector<int> s;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(j);
  }
  return s;
}

double irrepresentability(const Eigen::MatrixXd& X, const Laplacian& L, double lambda2,
                          const std::vector<int>& S0, const Eigen::VectorXd& beta0_signs) {
  const int p = static_cast<int>(X.cols());
  if (L.size() != p) {
    throw std::invalid_argument("irrepresentability: Laplacian does not match X columns");
  }
  if (S0.empty()) throw std::invalid_argument("irrepresentability: empty support");
  if (static_cast<int>(S0.size()) != beta0_signs.size()) {
    throw std::invalid_argument("irrepresentability: signs do not match support size");
  }
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
    throw std::invalid_argument("irrepresentability: lambda2 must be finite and >= 0");
  }
  std::vector<char> in_s(p, 0);
  for (int j : S0) {
    if (j < 0 || j >= p) throw std::invalid_argument("irrepresentability: index out of range");
    if (in_s[j]) throw std::invalid_argument("irrepresentability: duplicate support index");
    in_s[j] = 1;
  }
  std::vector<int> comp;
  for (int j = 0; j < p; ++j) {
    if (!in_s[j]) comp.push_back(j);
  }
  const int s = static_cast<int>(S0.size());
  const int t = static_cast<int>(comp.size());
  if (t == 0) return 0.0;  // no off-support coordinates to leak onto

  Eigen::MatrixXd M = X.transpose() * X / static_cast<double>(X.rows());
  M += lambda2 * L.matrix;

  Eigen::MatrixXd inner(s, s), cross(t, s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) inner(a, b) = M(S0[a], S0[b]);
    for (int b = 0; b < t; ++b) cross(b, a) = M(comp[b], S0[a]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
  if (!lu.isInvertible()) {
    throw std::runtime_error("irrepresentability: singular on-support block");
  }
  Eigen::VectorXd v = cross * lu.solve(beta0_signs);
  return v.lpNorm<Eigen::Infinity>();
}

}  // namespace ivgl
