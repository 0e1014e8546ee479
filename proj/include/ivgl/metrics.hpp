#pragma once

// Evaluation metrics for estimated coefficient vectors against a known truth:
// coefficient MSE, support-recovery confusion counts and Matthews correlation,
// sign recovery, and the network irrepresentability diagnostic.

#include <Eigen/Dense>
#include <vector>

#include "ivgl/graph.hpp"

namespace ivgl {

/// Mean squared error over all coordinates: (1/p) sum_j (hat-beta_j - beta0_j)^2.
double mse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0);

/// Support-recovery confusion counts over p coefficients ("positive" means
/// selected, i.e. nonzero).
struct SelectionOutcome {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
};

/// Compares the selected set (0-based indices) against the true support.
SelectionOutcome selection_outcome(const std::vector<int>& selected,
                                   const std::vector<int>& truth, int p);
SelectionOutcome selection_outcome(const Eigen::VectorXd& beta_hat,
                                   const Eigen::VectorXd& beta0);

/// Matthews correlation coefficient; 0 when a marginal is empty (denominator 0).
double mcc(const SelectionOutcome& o);

/// True when sign(hat-beta_j) == sign(beta0_j) for every coordinate.
bool sign_recovery(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0);

/// Indices of the nonzero coordinates, ascending.
std::vector<int> support(const Eigen::VectorXd& beta);

/// Network irrepresentability score
///   || (Sigma_{S0c,S0} + l2 L_{S0c,S0}) (Sigma_{S0,S0} + l2 L_{S0,S0})^{-1} s ||_inf
/// with Sigma = X'X/n and s the true signs on S0. Values below 1 are the
/// regime where support recovery is plausible. Throws when the inner block is
/// singular.
double irrepresentability(const Eigen::MatrixXd& X, const Laplacian& L, double lambda2,
                          const std::vector<int>& S0, const Eigen::VectorXd& beta0_signs);

}  // namespace ivgl
