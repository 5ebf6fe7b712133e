#include "sparcs/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sparcs/error.hpp"
#include "sparcs/phase.hpp"

namespace sparcs {

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) fail(ErrorCode::DomainError, "t distribution needs positive degrees of freedom");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * reg_incomplete_beta(dof / (dof + t * t), 0.5 * dof, 0.5);
  return t < 0.0 ? tail : 1.0 - tail;
}

double paired_ttest_onesided(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "paired samples differ in length");
  const Eigen::Index m = a.size();
  if (m < 2) fail(ErrorCode::DegenerateVariance, "paired t-test needs at least two pairs");
  const Eigen::VectorXd d = a - b;
  const double mean = d.mean();
  const double var = (d.array() - mean).square().sum() / static_cast<double>(m - 1);
  if (!(var > 0.0)) fail(ErrorCode::DegenerateVariance, "paired differences have zero variance");
  const double t = mean / std::sqrt(var / static_cast<double>(m));
  return student_t_cdf(t, static_cast<double>(m - 1));
}

MeanSummary summarize(const Eigen::VectorXd& values) {
  MeanSummary s;
  s.count = values.size();
  if (s.count == 0) return s;
  s.mean = values.mean();
  if (s.count > 1) {
    const double var = (values.array() - s.mean).square().sum() / static_cast<double>(s.count - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(s.count));
  }
  return s;
}

double ks_statistic_uniform(Eigen::VectorXd sample) {
  std::sort(sample.data(), sample.data() + sample.size());
  const auto m = static_cast<double>(sample.size());
  double d = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample(i), 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - u, u - static_cast<double>(i) / m});
  }
  return d;
}

LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::DimensionMismatch, "line fit needs two or more points");
  const double mx = x.mean(), my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
  const double sxx = (dx * dx).sum();
  if (!(sxx > 0.0)) fail(ErrorCode::DegenerateVariance, "line fit needs distinct x values");
  LineFit f;
  f.slope = (dx * dy).sum() / sxx;
  f.intercept = my - f.slope * mx;
  const double syy = (dy * dy).sum();
  f.r_squared = syy > 0.0 ? (dx * dy).sum() * (dx * dy).sum() / (sxx * syy) : 1.0;
  return f;
}

}  // namespace sparcs
