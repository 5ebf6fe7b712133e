#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version (used by the
// library) and a serial reference kept for tests and the benchmark. Each output
// element is computed by one thread with a fixed summation order, so both
// versions agree bit-for-bit regardless of the thread count.

#include <Eigen/Dense>

namespace sparcs::kernels {

/// Column means and centered sums of squares of an n x p matrix.
void column_moments_serial(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& centered_ss);
void column_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& centered_ss);

/// Helmert projection of each centered column followed by normalization.
/// Columns whose centered norm is zero are left as zeros; callers validate.
void helmert_normalize_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& means, Eigen::MatrixXd& out);
void helmert_normalize(const Eigen::MatrixXd& x, const Eigen::VectorXd& means, Eigen::MatrixXd& out);

/// out(i) = a.col(i) . v
void column_dots_serial(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, Eigen::VectorXd& out);
void column_dots(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, Eigen::VectorXd& out);

/// out(i) = ||a.col(i)||^2
void column_sq_norms_serial(const Eigen::MatrixXd& a, Eigen::VectorXd& out);
void column_sq_norms(const Eigen::MatrixXd& a, Eigen::VectorXd& out);

}  // namespace sparcs::kernels
