#pragma once

// Seeded synthetic designs: weakly block-sparse Gaussian and multivariate-t
// predictors, sparse ground-truth coefficients, linear responses and AR(1)
// inactive variables. Every generator is a pure function of its parameters
// and the random stream it is handed.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "sparcs/linalg.hpp"
#include "sparcs/rng.hpp"

namespace sparcs {

/// Omega = Omega_bs + Omega_e: unit diagonal, correlation block_corr inside
/// the leading block_size x block_size block, plus
/// decay_scale * decay_base^|i-j| on every off-diagonal entry.
struct CovarianceSpec {
  Index p = 0;
  Index block_size = 0;
  double block_corr = 0.0;
  double decay_base = 0.0;
  double decay_scale = 0.0;

  /// Defaults used when a design does not state its own: block of 1% of p,
  /// gamma = 0.5, epsilon = 0.1, beta = 0.5.
  static CovarianceSpec block_sparse_default(Index p);
  static CovarianceSpec identity(Index p);

  bool is_identity() const noexcept;
  double entry(Index i, Index j) const noexcept;
  Eigen::MatrixXd assemble() const;
  /// Lower bound on the minimum eigenvalue from the block and Toeplitz parts.
  double min_eigenvalue_bound() const;
};

/// Validated covariance and a sampler for it. When block_corr >= 0 and
/// block_corr + decay_scale <= 1 the covariance splits as
/// decay_scale * T + B, with T the stationary AR(1) correlation in decay_base
/// and B a one-factor block plus a diagonal, so rows are drawn in O(p)
/// without any p x p factor. Other valid specs use a dense Cholesky factor.
class GaussianDesign {
 public:
  enum class Sampler { Identity, Factor, Dense };

  explicit GaussianDesign(const CovarianceSpec& spec);

  const CovarianceSpec& spec() const noexcept { return spec_; }
  Sampler sampler() const noexcept { return sampler_; }

  /// n rows drawn i.i.d. N(0, Omega); rows are consumed from the stream in
  /// order, so a longer draw extends a shorter one.
  Eigen::MatrixXd sample(Index n, RandomStream& rng) const;
  /// The requested columns of sample(n, rng).
  Eigen::MatrixXd sample_columns(Index n, const std::vector<Index>& columns, RandomStream& rng) const;

 private:
  CovarianceSpec spec_;
  Sampler sampler_ = Sampler::Identity;
  Eigen::MatrixXd lower_;  // Dense only
};

DataMatrix sample_gaussian(const CovarianceSpec& spec, Index n, std::uint64_t seed);

/// Multivariate t with dispersion Omega: Gaussian rows divided by
/// sqrt(chi2_dof / dof). Mixing variables come from their own stream.
Eigen::MatrixXd sample_elliptical_t(const GaussianDesign& design, Index n, double dof, RandomStream& rows,
                                    RandomStream& mixing);
DataMatrix sample_elliptical_t(const CovarianceSpec& spec, Index n, double dof, std::uint64_t seed);

struct CoefficientLaw {
  enum class Kind { UnitNormal, BernoulliGaussian };
  Kind kind = Kind::UnitNormal;
  double sigma = 0.0;  // BernoulliGaussian: 0.5 N(1, s^2) + 0.5 N(-1, s^2)

  static CoefficientLaw unit_normal() { return {}; }
  static CoefficientLaw bernoulli_gaussian(double sigma) { return {Kind::BernoulliGaussian, sigma}; }
  std::string name() const;
};

struct GroundTruth {
  Eigen::VectorXd a;
  std::vector<Index> support;  // ascending
  double noise_var = 0.05;
};

GroundTruth gen_coefficients(Index p, Index k, const CoefficientLaw& law, RandomStream& rng, double noise_var = 0.05);
GroundTruth gen_coefficients(Index p, Index k, const CoefficientLaw& law, std::uint64_t seed, double noise_var = 0.05);

/// y = X a + N(0, noise_var) noise.
Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const GroundTruth& truth, RandomStream& rng);
Eigen::VectorXd gen_response(const DataMatrix& x, const GroundTruth& truth, std::uint64_t seed);

/// n independent AR(1) paths of length m: W(1) = e(1), W(i) = phi W(i-1) + e(i).
Eigen::MatrixXd gen_ar_inactive(Index n, Index m, double phi, RandomStream& rng);
Eigen::MatrixXd gen_ar_inactive(Index n, Index m, double phi, std::uint64_t seed);

/// p columns: i.i.d. N(0,1) at the support positions and one AR(1) path
/// laid over the remaining positions in index order.
Eigen::MatrixXd sample_ar_design(Index n, Index p, const std::vector<Index>& support, double phi, RandomStream& rng);

}  // namespace sparcs
