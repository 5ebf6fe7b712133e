#include "sparcs/phase.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

#include "sparcs/error.hpp"

namespace sparcs {

namespace {

constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double dm = static_cast<double>(m);
    const double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail(ErrorCode::ConvergenceFailure, "incomplete beta continued fraction did not converge");
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void require_n(int n, int min_n) {
  if (n < min_n) fail(ErrorCode::DomainError, "n = " + std::to_string(n) + " must be at least " + std::to_string(min_n));
}

void require_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) fail(ErrorCode::DomainError, "rho must lie in [0, 1]");
}

// d P0 / d rho = -2 (1 - rho^2)^((n-4)/2) / B((n-2)/2, 1/2)
double p0_derivative(double rho, int n) {
  const double a = 0.5 * (n - 2);
  return -2.0 * std::exp(0.5 * (n - 4) * std::log1p(-rho * rho) - log_beta(a, 0.5));
}

}  // namespace

double reg_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0)) {
    fail(ErrorCode::DomainError, "reg_incomplete_beta needs x in [0,1], a > 0, b > 0");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double sphere_area(int n) {
  require_n(n, 3);
  const double half = 0.5 * (n - 1);
  return 2.0 * std::exp(half * std::log(std::numbers::pi) - std::lgamma(half));
}

double p0(double rho, int n) {
  require_n(n, 3);
  require_rho(rho);
  return reg_incomplete_beta(1.0 - rho * rho, 0.5 * (n - 2), 0.5);
}

double xi(std::int64_t p, int n, double rho) {
  if (p < 1) fail(ErrorCode::DomainError, "p must be positive");
  return static_cast<double>(p) * p0(rho, n);
}

double pvalue(std::int64_t p, int n, double rho) { return -std::expm1(-xi(p, n, rho)); }

double critical_threshold(std::int64_t p, int n) {
  require_n(n, 5);
  if (p < 1) fail(ErrorCode::DomainError, "p must be positive");
  const double scale = sphere_area(n) * static_cast<double>(p);
  if (!(scale > 1.0)) fail(ErrorCode::DomainError, "a_n * p must exceed 1");
  return std::sqrt(1.0 - std::pow(scale, -2.0 / (n - 4)));
}

double critical_threshold_numeric(std::int64_t p, int n) {
  require_n(n, 5);
  if (p < 1) fail(ErrorCode::DomainError, "p must be positive");
  // p * dP0/drho = -p  <=>  dP0/drho = -1; |dP0/drho| falls monotonically
  // from 2 / B((n-2)/2, 1/2) at rho = 0 to 0 at rho = 1.
  if (!(-p0_derivative(0.0, n) > 1.0)) {
    fail(ErrorCode::DomainError, "d xi / d rho never reaches -p for this n");
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (-p0_derivative(mid, n) > 1.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double threshold_for_xi(std::int64_t p, int n, double target) {
  if (!(target > 0.0 && target < static_cast<double>(p))) {
    fail(ErrorCode::DomainError, "target xi must lie in (0, p)");
  }
  double lo = 0.0, hi = 1.0;  // xi decreasing in rho
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (xi(p, n, mid) > target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double zeta(double e_n, int n) {
  require_n(n, 3);
  return e_n * sphere_area(n) / (n - 2);
}

double bessel_i_series(double nu, double x, double tol, int max_terms) {
  if (!(x >= 0.0) || !(nu > -1.0)) fail(ErrorCode::DomainError, "bessel_i_series needs x >= 0, nu > -1");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int l = 1;; ++l) {
    if (l > max_terms) fail(ErrorCode::ConvergenceFailure, "Bessel series exceeded term cap");
    term *= q / (l * (l + nu));
    sum += term;
    // Terms shrink monotonically once l exceeds x / 2.
    if (term < tol * sum && l > 0.5 * x) break;
  }
  return std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0)) * sum;
}

double vmf_constant(double kappa, int n, double tol, int max_terms) {
  require_n(n, 3);
  if (!(kappa >= 0.0)) fail(ErrorCode::DomainError, "kappa must be nonnegative");
  if (kappa == 0.0) return 1.0 / sphere_area(n);
  const double nu = 0.5 * (n - 1) - 1.0;
  const double bessel = bessel_i_series(nu, kappa, tol, max_terms);
  return std::exp(nu * std::log(kappa) - (nu + 1.0) * std::log(2.0 * std::numbers::pi)) / bessel;
}

double j_separable_vmf(double kappa1, double kappa2, int alpha1, int alpha2, int n, double tol, int max_terms) {
  if ((alpha1 != 1 && alpha1 != -1) || (alpha2 != 1 && alpha2 != -1)) {
    fail(ErrorCode::DomainError, "alpha must be -1 or +1");
  }
  if (kappa1 == 0.0 && kappa2 == 0.0) return 1.0;
  const double combined = std::abs(alpha1 * kappa1 + alpha2 * kappa2);
  return sphere_area(n) * vmf_constant(kappa1, n, tol, max_terms) * vmf_constant(kappa2, n, tol, max_terms) /
         vmf_constant(combined, n, tol, max_terms);
}

double coherency_diagnostic(const UScoreSet& ux, std::int64_t p) {
  if (p < 1) fail(ErrorCode::DomainError, "p must be positive");
  Eigen::MatrixXd m = gram(ux) * (static_cast<double>(ux.dim()) / static_cast<double>(p));
  m.diagonal().array() -= 1.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sparcs
