#include "sparcs/two_stage.hpp"

#include <cmath>

#include "sparcs/error.hpp"

namespace sparcs {

BudgetPlan allocate_budget(double mu, std::int64_t p, std::int64_t k, std::int64_t t, double c) {
  if (!(p > k && k >= 1 && t >= 1 && c > 0.0 && mu >= 0.0)) {
    fail(ErrorCode::InvalidParams, "allocate_budget needs p > k >= 1, t >= 1, c > 0, mu >= 0");
  }
  BudgetPlan plan{mu, p, k, t, c, 0, false};
  const double log_t = std::log(static_cast<double>(t));
  const double lhs = c * static_cast<double>(p - k) * log_t + static_cast<double>(k) * static_cast<double>(t);
  if (lhs <= mu) {
    plan.feasible = true;
    plan.n_alloc = std::max(static_cast<std::int64_t>(std::ceil(c * log_t)), kMinStage1Samples);
  }
  return plan;
}

OlsFit ols_with_intercept(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool ridge) {
  const Index m = x.rows();
  const Index l = x.cols();
  if (y.size() != m) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  if (m < 2) fail(ErrorCode::SingularRestrictedCovariance, "need at least two samples");
  if (!ridge && m - 1 < l) {
    fail(ErrorCode::SingularRestrictedCovariance,
         "restricted covariance has rank at most " + std::to_string(m - 1) + " < l = " + std::to_string(l));
  }
  const Eigen::RowVectorXd means = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - means;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double denom = static_cast<double>(m - 1);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(l, l);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / denom);
  const Eigen::VectorXd cross = xc.transpose() * yc / denom;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const bool singular = llt.info() != Eigen::Success || !(llt.rcond() >= kMinReciprocalCondition);
  if (singular) {
    if (!ridge) fail(ErrorCode::SingularRestrictedCovariance, "restricted covariance condition number exceeds 1e12");
    const double eps = 1e-8 * cov.diagonal().sum() / static_cast<double>(l);
    cov.diagonal().array() += eps;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) fail(ErrorCode::SingularRestrictedCovariance, "ridge-adjusted covariance failed");
  }
  OlsFit out;
  out.coefficients = llt.solve(cross);
  out.intercept = y_mean - means.dot(out.coefficients);
  return out;
}

namespace {

Eigen::MatrixXd aligned_stage2(const SupportSet& support, const DataMatrix& stage1, const DataMatrix& stage2) {
  const auto l = static_cast<Index>(support.size());
  const std::vector<Index> idx = support.indices();
  if (stage2.n() == 0) return Eigen::MatrixXd(0, l);
  if (stage2.p() == stage1.p() && (stage2.column_ids.empty() || stage2.column_ids == stage1.column_ids)) {
    return stage2.select_columns(idx).values;
  }
  if (stage2.p() != l) {
    fail(ErrorCode::SupportMismatch, "stage-2 data has " + std::to_string(stage2.p()) +
                                         " columns; expected l = " + std::to_string(l) + " or p = " +
                                         std::to_string(stage1.p()));
  }
  if (!stage2.column_ids.empty() && !stage1.column_ids.empty()) {
    // Match by name; order of the stage-2 file does not matter.
    Eigen::MatrixXd out(stage2.n(), l);
    for (Index j = 0; j < l; ++j) {
      const std::string& name = stage1.column_ids[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      const auto col = stage2.find_column(name);
      if (!col) fail(ErrorCode::SupportMismatch, "stage-2 data lacks selected column '" + name + "'");
      out.col(j) = stage2.values.col(*col);
    }
    return out;
  }
  return stage2.values;
}

}  // namespace

TwoStageModel fit_on_support(SupportSet support, const DataMatrix& stage1, const Eigen::VectorXd& y1,
                             const DataMatrix& stage2, const Eigen::VectorXd& y2, const FitOptions& options) {
  if (y1.size() != stage1.n() || y2.size() != stage2.n()) {
    fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  }
  if (support.size() == 0) fail(ErrorCode::SupportMismatch, "empty support");
  const std::vector<Index> idx = support.indices();
  const Eigen::MatrixXd x2 = aligned_stage2(support, stage1, stage2);
  const auto l = static_cast<Index>(idx.size());

  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  if (options.reuse_stage1) {
    x.resize(stage1.n() + x2.rows(), l);
    x.topRows(stage1.n()) = stage1.select_columns(idx).values;
    x.bottomRows(x2.rows()) = x2;
    y.resize(stage1.n() + x2.rows());
    y << y1, y2;
  } else {
    x = x2;
    y = y2;
  }
  const OlsFit ols = ols_with_intercept(x, y, options.ridge);

  TwoStageModel model;
  model.coefficients = ols.coefficients;
  model.intercept = ols.intercept;
  model.n_stage1 = stage1.n();
  model.t_total = stage1.n() + stage2.n();
  model.method = support.method;
  model.reuse_stage1 = options.reuse_stage1;
  model.ridge = options.ridge;
  for (Index j : idx) model.variable_names.push_back(stage1.column_name(j));
  const Eigen::VectorXd residual = y - ((x * ols.coefficients).array() + ols.intercept).matrix();
  model.train_residual_mean = residual.mean();
  model.train_rmse = std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
  model.support = std::move(support);
  return model;
}

TwoStageModel fit(const DataMatrix& stage1, const Eigen::VectorXd& y1, const DataMatrix& stage2,
                  const Eigen::VectorXd& y2, const FitOptions& options) {
  const ScreeningScores scores = screen_scores(stage1, y1, options.method);
  return fit_on_support(select_top_l(scores, options.l), stage1, y1, stage2, y2, options);
}

double predict(const TwoStageModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.coefficients.size()) {
    fail(ErrorCode::DimensionMismatch, "predict expects " + std::to_string(model.coefficients.size()) + " values");
  }
  return model.intercept + model.coefficients.dot(x);
}

Eigen::VectorXd predict(const TwoStageModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.coefficients.size()) {
    fail(ErrorCode::DimensionMismatch, "predict expects " + std::to_string(model.coefficients.size()) + " columns");
  }
  return (x * model.coefficients).array() + model.intercept;
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size() || y.size() < 1) fail(ErrorCode::DimensionMismatch, "rmse needs equal nonempty inputs");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

}  // namespace sparcs
