#include "sparcs/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "sparcs/error.hpp"
#include "sparcs/kernels.hpp"

namespace sparcs {

namespace {

// A column counts as constant when its centered norm is negligible relative
// to its raw magnitude.
bool is_constant(double centered_ss, double mean, Index n) {
  const double scale = std::abs(mean) * std::sqrt(static_cast<double>(n));
  return !(centered_ss > 0.0) || std::sqrt(centered_ss) <= 1e-13 * scale;
}

void require_samples(Index n) {
  if (n < 3) fail(ErrorCode::TooFewSamples, "need at least 3 samples, got " + std::to_string(n));
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd v, std::vector<std::string> ids) : values(std::move(v)), column_ids(std::move(ids)) {
  if (!column_ids.empty() && static_cast<Index>(column_ids.size()) != values.cols()) {
    fail(ErrorCode::DimensionMismatch, "column id count does not match column count");
  }
}

std::optional<Index> DataMatrix::find_column(const std::string& id) const {
  const auto it = std::find(column_ids.begin(), column_ids.end(), id);
  if (it == column_ids.end()) return std::nullopt;
  return static_cast<Index>(it - column_ids.begin());
}

DataMatrix DataMatrix::select_columns(const std::vector<Index>& columns) const {
  DataMatrix out;
  out.values.resize(n(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= p()) fail(ErrorCode::DimensionMismatch, "column index out of range");
    out.values.col(static_cast<Index>(j)) = values.col(columns[j]);
    if (!column_ids.empty()) out.column_ids.push_back(column_ids[static_cast<std::size_t>(columns[j])]);
  }
  return out;
}

DataMatrix DataMatrix::select_rows(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > n()) fail(ErrorCode::DimensionMismatch, "row range out of bounds");
  return DataMatrix(values.middleRows(first, count), column_ids);
}

std::string DataMatrix::column_name(Index j) const {
  if (!column_ids.empty()) return column_ids[static_cast<std::size_t>(j)];
  return "x" + std::to_string(j + 1);
}

UScoreSet compute_uscores(const DataMatrix& data) {
  require_samples(data.n());
  Eigen::VectorXd means, ss;
  kernels::column_moments(data.values, means, ss);
  for (Index j = 0; j < data.p(); ++j) {
    if (is_constant(ss(j), means(j), data.n())) {
      fail(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(j) + " (" + data.column_name(j) + ")");
    }
  }
  UScoreSet out;
  out.source_n = data.n();
  kernels::helmert_normalize(data.values, means, out.scores);
  return out;
}

UScoreSet compute_response_uscores(const Eigen::VectorXd& response) {
  require_samples(response.size());
  const Eigen::MatrixXd as_matrix = response;
  Eigen::VectorXd means, ss;
  kernels::column_moments_serial(as_matrix, means, ss);
  if (is_constant(ss(0), means(0), response.size())) fail(ErrorCode::ZeroVarianceResponse, "response is constant");
  UScoreSet out;
  out.source_n = response.size();
  kernels::helmert_normalize_serial(as_matrix, means, out.scores);
  return out;
}

MomentSummary compute_moments(const DataMatrix& data, const Eigen::VectorXd& response) {
  if (response.size() != data.n()) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  require_samples(data.n());
  const double denom = static_cast<double>(data.n() - 1);
  MomentSummary m;
  Eigen::VectorXd ss;
  kernels::column_moments(data.values, m.column_means, ss);
  m.column_sds = (ss / denom).cwiseSqrt();
  m.response_mean = response.mean();
  const Eigen::VectorXd yc = response.array() - m.response_mean;
  m.sy = yc.squaredNorm() / denom;
  kernels::column_dots(data.values, yc, m.sxy);
  // sum_i (x_ij - mean_j) yc_i == sum_i x_ij yc_i because yc sums to zero
  m.sxy /= denom;
  return m;
}

Eigen::VectorXd cross_correlation(const UScoreSet& ux, const UScoreSet& uy) {
  if (uy.p() != 1) fail(ErrorCode::DimensionMismatch, "response U-scores must have one column");
  if (ux.dim() != uy.dim()) fail(ErrorCode::DimensionMismatch, "U-score row dimensions differ");
  Eigen::VectorXd r;
  kernels::column_dots(ux.scores, uy.scores.col(0), r);
  return r.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::MatrixXd gram(const UScoreSet& ux) {
  const Index d = ux.dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  g.selfadjointView<Eigen::Lower>().rankUpdate(ux.scores);
  return g.selfadjointView<Eigen::Lower>();
}

GramFactor::GramFactor(const UScoreSet& ux) {
  llt_.compute(gram(ux));
  if (llt_.info() != Eigen::Success) {
    fail(ErrorCode::SingularGram, "Gram matrix is not positive definite (p = " + std::to_string(ux.p()) +
                                      ", n - 1 = " + std::to_string(ux.dim()) + ")");
  }
  rcond_ = llt_.rcond();
  if (!(rcond_ >= kMinReciprocalCondition)) {
    fail(ErrorCode::SingularGram, "Gram condition number estimate exceeds 1e12");
  }
}

Eigen::MatrixXd GramFactor::inverse() const {
  const Index d = llt_.matrixLLT().rows();
  return llt_.solve(Eigen::MatrixXd::Identity(d, d));
}

Eigen::MatrixXd gram_inverse(const UScoreSet& ux) { return GramFactor(ux).inverse(); }

TildeUScores tilde_uscores(const UScoreSet& ux) {
  const GramFactor factor(ux);
  TildeUScores out;
  out.tilde.source_n = ux.source_n;
  out.tilde.scores = factor.llt().solve(ux.scores);
  kernels::column_sq_norms(out.tilde.scores, out.scale_sq);
  const Index p = ux.p();
  Eigen::MatrixXd& t = out.tilde.scores;
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) t.col(j) /= std::sqrt(out.scale_sq(j));
  return out;
}

Eigen::VectorXd min_norm_coefficients(const UScoreSet& ux, const UScoreSet& uy, const MomentSummary& moments) {
  if (uy.p() != 1 || ux.dim() != uy.dim()) fail(ErrorCode::DimensionMismatch, "U-score dimensions differ");
  if (moments.column_sds.size() != ux.p()) fail(ErrorCode::DimensionMismatch, "moment summary has wrong length");

  // With A = ux * diag(sd), the centered data is H^T A sqrt(n-1) for the
  // Helmert basis H, so B = A^T (A A^T)^+ uy sqrt(s^y).
  const Eigen::MatrixXd a = ux.scores * moments.column_sds.asDiagonal();
  const Index d = ux.dim();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  w.selfadjointView<Eigen::Lower>().rankUpdate(a);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w.selfadjointView<Eigen::Lower>());
  if (eig.info() != Eigen::Success) fail(ErrorCode::SingularGram, "eigen-decomposition of weighted Gram failed");

  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = lambda.maxCoeff() * kMinReciprocalCondition;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(d);
  for (Index i = 0; i < d; ++i) {
    if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::VectorXd z = q * inv.asDiagonal() * (q.transpose() * uy.scores.col(0));
  Eigen::VectorXd b;
  kernels::column_dots(a, z, b);
  return b * std::sqrt(moments.sy);
}

Eigen::VectorXd min_norm_ols(const DataMatrix& data, const Eigen::VectorXd& response) {
  if (response.size() != data.n()) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  const UScoreSet uy = compute_response_uscores(response);
  const UScoreSet ux = compute_uscores(data);
  return min_norm_coefficients(ux, uy, compute_moments(data, response));
}

}  // namespace sparcs
