#pragma once

// Two-stage predictor: screen on n full-dimension samples, then fit OLS on the
// l selected variables, plus the stage-1 budget allocation rule.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "sparcs/linalg.hpp"
#include "sparcs/screening.hpp"

namespace sparcs {

/// Floor on the stage-1 allocation; U-scores need n >= 3.
inline constexpr std::int64_t kMinStage1Samples = 3;

struct BudgetPlan {
  double mu = 0.0;
  std::int64_t p = 0;
  std::int64_t k = 0;
  std::int64_t t = 0;
  double c = 0.0;
  std::int64_t n_alloc = 0;
  bool feasible = false;
};

/// n = max(ceil(c ln t), 3) when c (p - k) ln t + k t <= mu, else 0.
BudgetPlan allocate_budget(double mu, std::int64_t p, std::int64_t k, std::int64_t t, double c);

struct FitOptions {
  ScreeningMethod method = ScreeningMethod::PCS_H;
  Index l = 1;
  /// Fit stage 2 on all t samples (n|t) rather than the t - n new ones.
  bool reuse_stage1 = true;
  /// Off by default: epsilon-ridge with epsilon = 1e-8 * trace / l on a
  /// singular restricted covariance.
  bool ridge = false;
};

struct TwoStageModel {
  SupportSet support;
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  Index n_stage1 = 0;
  Index t_total = 0;
  ScreeningMethod method = ScreeningMethod::PCS_H;
  bool reuse_stage1 = true;
  bool ridge = false;
  std::vector<std::string> variable_names;  // one per support entry
  double train_rmse = 0.0;
  double train_residual_mean = 0.0;
};

/// Screens stage1 and fits the stage-2 OLS. stage2 may carry either all p
/// columns or exactly the l selected ones (matched by name when both sides
/// are labeled); it may have zero rows when reuse_stage1 is set.
TwoStageModel fit(const DataMatrix& stage1, const Eigen::VectorXd& y1, const DataMatrix& stage2,
                  const Eigen::VectorXd& y2, const FitOptions& options);

/// Stage-2 fit on a support chosen elsewhere (oracle, LASSO, ...).
TwoStageModel fit_on_support(SupportSet support, const DataMatrix& stage1, const Eigen::VectorXd& y1,
                             const DataMatrix& stage2, const Eigen::VectorXd& y2, const FitOptions& options);

struct OlsFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
};

/// OLS with intercept; throws SingularRestrictedCovariance when the sample
/// covariance has condition number above 1e12 (unless ridge is set).
OlsFit ols_with_intercept(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool ridge = false);

double predict(const TwoStageModel& model, const Eigen::VectorXd& x);
/// One prediction per row; x has l columns in support order.
Eigen::VectorXd predict(const TwoStageModel& model, const Eigen::MatrixXd& x);

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

}  // namespace sparcs
