#pragma once

#include <Eigen/Dense>

namespace sparcs {

/// P(T <= t) for Student's t with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// One-sided paired t-test of H1: mean(a) < mean(b). Throws
/// DegenerateVariance when the differences have zero variance.
double paired_ttest_onesided(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct MeanSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  Eigen::Index count = 0;
};

MeanSummary summarize(const Eigen::VectorXd& values);

/// Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).
double ks_statistic_uniform(Eigen::VectorXd sample);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace sparcs
