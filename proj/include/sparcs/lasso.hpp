#pragma once

// LASSO baseline: cyclic coordinate descent with active-set sweeps, and
// k-fold cross-validation over a lambda grid.

#include <Eigen/Dense>

#include <vector>

namespace sparcs {

struct LassoOptions {
  double tol = 1e-7;
  int max_iter = 10000;  // full + active-set sweeps
};

struct LassoResult {
  Eigen::VectorXd coefficients;
  int sweeps = 0;
  double objective = 0.0;
};

/// Minimizes (1/2n)||y - X b||^2 + lambda ||b||_1 (no intercept; center
/// beforehand). warm_start, when given, seeds the coefficients.
/// Stops when no coordinate update changes the fit by more than
/// tol * ||y||^2 / n (max_j of x_j^T x_j / n * delta_j^2), or when the relative
/// duality gap drops below tol. Throws NonConvergence after max_iter sweeps.
LassoResult lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& options = {},
                     const Eigen::VectorXd* warm_start = nullptr);

/// Convenience overload returning just the coefficients.
Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, double tol, int max_iter);

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& b, double lambda);

/// max_j |x_j^T y| / n: the smallest lambda giving the zero solution.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// count values log-spaced from lambda_max down to min_ratio * lambda_max.
std::vector<double> lasso_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int count = 20,
                                      double min_ratio = 1e-3);

/// Grid value minimizing mean held-out MSE over folds (sample i goes to fold
/// i mod folds); ties resolve to the larger lambda. Each training fold is
/// centered with its own means.
double cv_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds, const std::vector<double>& lambda_grid,
                 const LassoOptions& options = {});

}  // namespace sparcs
