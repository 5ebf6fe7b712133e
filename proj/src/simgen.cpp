#include "sparcs/simgen.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparcs/error.hpp"

namespace sparcs {

namespace {

constexpr Index kDenseCheckLimit = 5000;

}  // namespace

CovarianceSpec CovarianceSpec::block_sparse_default(Index p) {
  return {p, std::max<Index>(1, p / 100), 0.5, 0.5, 0.1};
}

CovarianceSpec CovarianceSpec::identity(Index p) { return {p, 0, 0.0, 0.0, 0.0}; }

bool CovarianceSpec::is_identity() const noexcept {
  return (block_size <= 1 || block_corr == 0.0) && (decay_scale == 0.0 || decay_base == 0.0);
}

double CovarianceSpec::entry(Index i, Index j) const noexcept {
  if (i == j) return 1.0;
  double v = 0.0;
  if (i < block_size && j < block_size) v += block_corr;
  if (decay_scale != 0.0) v += decay_scale * std::pow(decay_base, static_cast<double>(std::abs(i - j)));
  return v;
}

Eigen::MatrixXd CovarianceSpec::assemble() const {
  Eigen::MatrixXd m(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) m(i, j) = entry(i, j);
  return m;
}

double CovarianceSpec::min_eigenvalue_bound() const {
  // Block part: (1-g) I + g 11^T on the block, identity elsewhere.
  double block_min = 1.0;
  if (block_size > 1) block_min = std::min({block_min, 1.0 - block_corr, 1.0 + (block_size - 1) * block_corr});
  // Toeplitz part eps (T - I) with T the AR(1) correlation: eigenvalues of T
  // are at least (1 - b) / (1 + b).
  const double b = std::abs(decay_base);
  const double toeplitz_min = decay_scale * ((1.0 - b) / (1.0 + b) - 1.0);
  return block_min + std::min(0.0, toeplitz_min);
}

GaussianDesign::GaussianDesign(const CovarianceSpec& spec) : spec_(spec) {
  if (spec.p < 1 || spec.block_size < 0 || spec.block_size > spec.p) {
    fail(ErrorCode::InvalidParams, "covariance spec needs p >= 1 and 0 <= d_x <= p");
  }
  if (!(spec.block_corr > -1.0 && spec.block_corr < 1.0) || !(spec.decay_base >= 0.0 && spec.decay_base < 1.0) ||
      !(spec.decay_scale >= 0.0)) {
    fail(ErrorCode::InvalidParams, "covariance spec parameters out of range");
  }
  if (spec.is_identity()) return;

  if (spec.p <= kDenseCheckLimit) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.assemble(), Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) fail(ErrorCode::NotPositiveDefinite, "covariance has eigenvalue <= 0");
  } else if (!(spec.min_eigenvalue_bound() > 0.0)) {
    fail(ErrorCode::NotPositiveDefinite, "covariance eigenvalue bound is not positive");
  }

  if (spec.block_corr >= 0.0 && spec.block_corr + spec.decay_scale <= 1.0 && spec.decay_scale < 1.0) {
    sampler_ = Sampler::Factor;
    return;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(spec.assemble());
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "covariance is not positive definite");
  sampler_ = Sampler::Dense;
  lower_ = llt.matrixL();
}

Eigen::MatrixXd GaussianDesign::sample(Index n, RandomStream& rng) const {
  const Index p = spec_.p;
  Eigen::MatrixXd x(n, p);
  if (sampler_ != Sampler::Factor) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    if (sampler_ == Sampler::Dense) x = x * lower_.transpose();
    return x;
  }
  // Per row: shared block factor, then an AR(1) innovation and an
  // idiosyncratic draw for every column.
  const double eps = spec_.decay_scale;
  const double beta = spec_.decay_base;
  const bool block = spec_.block_size > 1 && spec_.block_corr > 0.0;
  const double block_load = block ? std::sqrt(spec_.block_corr) : 0.0;
  const double in_block_sd = std::sqrt(std::max(0.0, 1.0 - eps - (block ? spec_.block_corr : 0.0)));
  const double out_block_sd = std::sqrt(1.0 - eps);
  const double ar_load = std::sqrt(eps);
  const double innovation_sd = std::sqrt(1.0 - beta * beta);
  for (Index i = 0; i < n; ++i) {
    const double shared = block ? rng.normal() : 0.0;
    double w = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double e = rng.normal();
      w = j == 0 ? e : beta * w + innovation_sd * e;
      const bool in_block = block && j < spec_.block_size;
      x(i, j) = ar_load * w + (in_block ? in_block_sd : out_block_sd) * rng.normal() + (in_block ? block_load * shared : 0.0);
    }
  }
  return x;
}

Eigen::MatrixXd GaussianDesign::sample_columns(Index n, const std::vector<Index>& columns, RandomStream& rng) const {
  for (Index j : columns) {
    if (j < 0 || j >= spec_.p) fail(ErrorCode::DimensionMismatch, "column index out of range");
  }
  return sample(n, rng)(Eigen::all, columns);
}

DataMatrix sample_gaussian(const CovarianceSpec& spec, Index n, std::uint64_t seed) {
  RandomStream rng(seed, stream_id(0, StreamPurpose::Design));
  return DataMatrix(GaussianDesign(spec).sample(n, rng));
}

Eigen::MatrixXd sample_elliptical_t(const GaussianDesign& design, Index n, double dof, RandomStream& rows,
                                    RandomStream& mixing) {
  if (!(dof > 2.0)) fail(ErrorCode::InvalidDof, "degrees of freedom must exceed 2");
  Eigen::MatrixXd x = design.sample(n, rows);
  for (Index i = 0; i < n; ++i) x.row(i) *= std::sqrt(dof / mixing.chi_square(dof));
  return x;
}

DataMatrix sample_elliptical_t(const CovarianceSpec& spec, Index n, double dof, std::uint64_t seed) {
  if (!(dof > 2.0)) fail(ErrorCode::InvalidDof, "degrees of freedom must exceed 2");
  RandomStream rows(seed, stream_id(0, StreamPurpose::Design));
  RandomStream mixing(seed, stream_id(0, StreamPurpose::Mixing));
  return DataMatrix(sample_elliptical_t(GaussianDesign(spec), n, dof, rows, mixing));
}

std::string CoefficientLaw::name() const {
  if (kind == Kind::UnitNormal) return "unit_normal";
  return "bernoulli_gaussian(" + std::to_string(sigma) + ")";
}

GroundTruth gen_coefficients(Index p, Index k, const CoefficientLaw& law, RandomStream& rng, double noise_var) {
  if (k < 1 || k > p) fail(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, p]");
  if (!(noise_var >= 0.0)) fail(ErrorCode::InvalidParams, "noise variance must be nonnegative");
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  GroundTruth truth;
  truth.noise_var = noise_var;
  truth.support.assign(perm.begin(), perm.begin() + k);
  std::sort(truth.support.begin(), truth.support.end());
  truth.a = Eigen::VectorXd::Zero(p);
  for (Index idx : truth.support) {
    double v = rng.normal();
    if (law.kind == CoefficientLaw::Kind::BernoulliGaussian) {
      const double sign = (rng.next_u32() & 1u) ? 1.0 : -1.0;
      v = sign + law.sigma * v;
    }
    truth.a(idx) = v;
  }
  return truth;
}

GroundTruth gen_coefficients(Index p, Index k, const CoefficientLaw& law, std::uint64_t seed, double noise_var) {
  RandomStream rng(seed, stream_id(0, StreamPurpose::Coefficients));
  return gen_coefficients(p, k, law, rng, noise_var);
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const GroundTruth& truth, RandomStream& rng) {
  if (x.cols() != truth.a.size()) fail(ErrorCode::DimensionMismatch, "coefficient length differs from p");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.rows());
  for (Index j : truth.support) y += truth.a(j) * x.col(j);
  const double sd = std::sqrt(truth.noise_var);
  for (Index i = 0; i < y.size(); ++i) y(i) += sd * rng.normal();
  return y;
}

Eigen::VectorXd gen_response(const DataMatrix& x, const GroundTruth& truth, std::uint64_t seed) {
  RandomStream rng(seed, stream_id(0, StreamPurpose::Noise));
  return gen_response(x.values, truth, rng);
}

Eigen::MatrixXd gen_ar_inactive(Index n, Index m, double phi, RandomStream& rng) {
  if (!(std::abs(phi) < 1.0)) fail(ErrorCode::InvalidPhi, "AR coefficient must satisfy |phi| < 1");
  if (m < 1 || n < 0) fail(ErrorCode::InvalidParams, "AR design needs m >= 1");
  Eigen::MatrixXd w(n, m);
  for (Index i = 0; i < n; ++i) {
    double prev = rng.normal();
    w(i, 0) = prev;
    for (Index j = 1; j < m; ++j) {
      prev = phi * prev + rng.normal();
      w(i, j) = prev;
    }
  }
  return w;
}

Eigen::MatrixXd gen_ar_inactive(Index n, Index m, double phi, std::uint64_t seed) {
  RandomStream rng(seed, stream_id(0, StreamPurpose::Design));
  return gen_ar_inactive(n, m, phi, rng);
}

Eigen::MatrixXd sample_ar_design(Index n, Index p, const std::vector<Index>& support, double phi, RandomStream& rng) {
  if (!(std::abs(phi) < 1.0)) fail(ErrorCode::InvalidPhi, "AR coefficient must satisfy |phi| < 1");
  std::vector<char> active(static_cast<std::size_t>(p), 0);
  for (Index j : support) {
    if (j < 0 || j >= p) fail(ErrorCode::DimensionMismatch, "support index out of range");
    active[static_cast<std::size_t>(j)] = 1;
  }
  Eigen::MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    bool started = false;
    double prev = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double e = rng.normal();
      if (active[static_cast<std::size_t>(j)]) {
        x(i, j) = e;
      } else {
        prev = started ? phi * prev + e : e;
        started = true;
        x(i, j) = prev;
      }
    }
  }
  return x;
}

}  // namespace sparcs
