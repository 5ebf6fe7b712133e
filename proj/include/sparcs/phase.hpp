#pragma once

// Closed-form false-discovery analytics for correlation screening under the
// null: per-pair cap probability P0, expected discovery count xi, Poisson
// p-values and the critical screening threshold.

#include <cstdint>

#include "sparcs/linalg.hpp"

namespace sparcs {

/// Regularized incomplete beta I_x(a, b), continued fraction with the
/// reflection I_x(a,b) = 1 - I_{1-x}(b,a) chosen for fast convergence.
double reg_incomplete_beta(double x, double a, double b);

/// Surface area of the unit sphere S_{n-2} in R^{n-1}.
double sphere_area(int n);

/// Probability that two independent uniform points on S_{n-2} fall within
/// correlation rho of each other or of each other's antipode.
double p0(double rho, int n);

/// Expected null discovery count p * P0(rho, n).
double xi(std::int64_t p, int n, double rho);

/// 1 - exp(-xi(p, n, rho)).
double pvalue(std::int64_t p, int n, double rho);

/// sqrt(1 - (a_n p)^(-2/(n-4))). Requires n >= 5 and a_n p > 1.
double critical_threshold(std::int64_t p, int n);

/// Root of d xi / d rho = -p found numerically (bisection on the exact
/// derivative of P0). Requires n >= 5.
double critical_threshold_numeric(std::int64_t p, int n);

/// rho with xi(p, n, rho) = target, for target in (0, p).
double threshold_for_xi(std::int64_t p, int n, double target);

/// zeta_n = e_n a_n / (n - 2) for a user-supplied limit e_n.
double zeta(double e_n, int n);

/// Modified Bessel I_nu(x) through its power series, truncated when the next
/// term falls below tol times the partial sum.
double bessel_i_series(double nu, double x, double tol = 1e-12, int max_terms = 10000);

/// von Mises-Fisher normalizing constant C_{n-1}(kappa) on S_{n-2};
/// kappa = 0 returns the uniform density 1 / |S_{n-2}|.
double vmf_constant(double kappa, int n, double tol = 1e-12, int max_terms = 10000);

/// J of a separable joint density with von Mises-Fisher marginals with
/// location alpha_i * 1.
double j_separable_vmf(double kappa1, double kappa2, int alpha1, int alpha2, int n, double tol = 1e-12,
                       int max_terms = 10000);

/// Operator norm of (n-1)/p * ux ux^T - I.
double coherency_diagnostic(const UScoreSet& ux, std::int64_t p);

}  // namespace sparcs
