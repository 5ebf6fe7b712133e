#include "sparcs/kernels.hpp"

#include <cmath>

namespace sparcs::kernels {

namespace {

inline void moments_of(const Eigen::MatrixXd& x, Eigen::Index j, Eigen::VectorXd& means, Eigen::VectorXd& ss) {
  const Eigen::Index n = x.rows();
  const double* col = x.col(j).data();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += col[i];
  const double mean = sum / static_cast<double>(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = col[i] - mean;
    acc += d * d;
  }
  means(j) = mean;
  ss(j) = acc;
}

// Row k (1-based, k = 1..n-1) of the Helmert sub-matrix has weight
// 1/sqrt(k(k+1)) on entries 0..k-1 and -k/sqrt(k(k+1)) on entry k.
inline void helmert_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& means, Eigen::Index j, Eigen::MatrixXd& out) {
  const Eigen::Index n = x.rows();
  const double* col = x.col(j).data();
  double* dst = out.col(j).data();
  const double mean = means(j);
  double prefix = col[0] - mean;
  double norm_sq = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    const double c = col[k] - mean;
    const double kk = static_cast<double>(k);
    const double v = (prefix - kk * c) / std::sqrt(kk * (kk + 1.0));
    dst[k - 1] = v;
    norm_sq += v * v;
    prefix += c;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (Eigen::Index k = 0; k + 1 < n; ++k) dst[k] *= inv;
  }
}

inline double dot_of(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, Eigen::Index j) {
  const double* col = a.col(j).data();
  const double* w = v.data();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += col[i] * w[i];
  return acc;
}

inline double sq_norm_of(const Eigen::MatrixXd& a, Eigen::Index j) {
  const double* col = a.col(j).data();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += col[i] * col[i];
  return acc;
}

}  // namespace

void column_moments_serial(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& centered_ss) {
  means.resize(x.cols());
  centered_ss.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) moments_of(x, j, means, centered_ss);
}

void column_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& centered_ss) {
  means.resize(x.cols());
  centered_ss.resize(x.cols());
  const Eigen::Index p = x.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) moments_of(x, j, means, centered_ss);
}

void helmert_normalize_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& means, Eigen::MatrixXd& out) {
  out.setZero(x.rows() - 1, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) helmert_of(x, means, j, out);
}

void helmert_normalize(const Eigen::MatrixXd& x, const Eigen::VectorXd& means, Eigen::MatrixXd& out) {
  out.setZero(x.rows() - 1, x.cols());
  const Eigen::Index p = x.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) helmert_of(x, means, j, out);
}

void column_dots_serial(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out.resize(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = dot_of(a, v, j);
}

void column_dots(const Eigen::MatrixXd& a, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out.resize(a.cols());
  const Eigen::Index p = a.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) out(j) = dot_of(a, v, j);
}

void column_sq_norms_serial(const Eigen::MatrixXd& a, Eigen::VectorXd& out) {
  out.resize(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = sq_norm_of(a, j);
}

void column_sq_norms(const Eigen::MatrixXd& a, Eigen::VectorXd& out) {
  out.resize(a.cols());
  const Eigen::Index p = a.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) out(j) = sq_norm_of(a, j);
}

}  // namespace sparcs::kernels
