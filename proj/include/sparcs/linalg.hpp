#pragma once

// Sample moments, U-scores and the min-norm OLS solution.
//
// Nothing in this module forms a p x p matrix. Everything goes through the
// (n-1) x p U-score matrix and (n-1) x (n-1) Gram matrices, so p can be in
// the hundreds of thousands while n stays small.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sparcs {

using Eigen::Index;

/// Reciprocal condition number below which a Gram or covariance matrix is
/// treated as singular (condition number above 1e12).
inline constexpr double kMinReciprocalCondition = 1e-12;

/// n x p sample-by-variable matrix. Rows are samples, columns variables.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_ids;  // empty or one per column

  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd v, std::vector<std::string> ids = {});

  Index n() const noexcept { return values.rows(); }
  Index p() const noexcept { return values.cols(); }

  std::optional<Index> find_column(const std::string& id) const;
  DataMatrix select_columns(const std::vector<Index>& columns) const;
  DataMatrix select_rows(Index first, Index count) const;
  /// Column ids, falling back to 1-based "x<i>" names when unlabeled.
  std::string column_name(Index j) const;
};

/// (n-1) x p matrix of unit-norm columns on the sphere S_{n-2}.
struct UScoreSet {
  Eigen::MatrixXd scores;
  Index source_n = 0;

  Index dim() const noexcept { return scores.rows(); }
  Index p() const noexcept { return scores.cols(); }
};

struct MomentSummary {
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_sds;
  Eigen::VectorXd sxy;  // sample cross-covariance with the response
  double sy = 0.0;      // sample variance of the response
  double response_mean = 0.0;
};

/// U-scores of every column. Throws TooFewSamples (n < 3) or
/// ZeroVarianceColumn.
UScoreSet compute_uscores(const DataMatrix& data);

/// U-score of a single response vector. Throws ZeroVarianceResponse.
UScoreSet compute_response_uscores(const Eigen::VectorXd& response);

MomentSummary compute_moments(const DataMatrix& data, const Eigen::VectorXd& response);

/// Pearson correlations of every U-score column with a single-column
/// U-score set, clamped to [-1, 1].
Eigen::VectorXd cross_correlation(const UScoreSet& ux, const UScoreSet& uy);

/// ux * ux^T.
Eigen::MatrixXd gram(const UScoreSet& ux);

/// Cholesky factor of ux * ux^T with the singularity check applied.
class GramFactor {
 public:
  explicit GramFactor(const UScoreSet& ux);

  const Eigen::LLT<Eigen::MatrixXd>& llt() const noexcept { return llt_; }
  double reciprocal_condition() const noexcept { return rcond_; }
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double rcond_ = 0.0;
};

/// (ux ux^T)^{-1}. Throws SingularGram when the condition number exceeds 1e12.
Eigen::MatrixXd gram_inverse(const UScoreSet& ux);

/// Normalized columns of (ux ux^T)^{-1} ux together with the squared norms
/// used for normalization (the diagonal of ux^T (ux ux^T)^{-2} ux).
struct TildeUScores {
  UScoreSet tilde;
  Eigen::VectorXd scale_sq;
};

TildeUScores tilde_uscores(const UScoreSet& ux);

/// B = (S^x)^+ S^xy from U-scores and moments, via the weighted Gram matrix
/// ux D ux^T with D = diag(sample variances). Exact for any rank.
Eigen::VectorXd min_norm_coefficients(const UScoreSet& ux, const UScoreSet& uy, const MomentSummary& moments);

/// Min-norm solution of the centered least-squares problem.
Eigen::VectorXd min_norm_ols(const DataMatrix& data, const Eigen::VectorXd& response);

}  // namespace sparcs
