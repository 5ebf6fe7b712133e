#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <numbers>

#include "sparcs/error.hpp"
#include "sparcs/phase.hpp"
#include "sparcs/screening.hpp"
#include "sparcs/simgen.hpp"
#include "sparcs/stats.hpp"
#include "test_util.hpp"

using namespace sparcs;
constexpr double pi = std::numbers::pi;

TEST_CASE("regularized incomplete beta") {
  for (int i = 0; i < 100; ++i) {
    const double x = (i + 0.5) / 100.0;
    CHECK(std::abs(reg_incomplete_beta(x, 1.0, 1.0) - x) <= 1e-12);
    for (auto [a, b] : {std::pair{0.5, 0.5}, {2.0, 0.5}, {7.5, 3.0}, {0.3, 12.0}, {40.0, 0.5}}) {
      CHECK(std::abs(reg_incomplete_beta(x, a, b) + reg_incomplete_beta(1.0 - x, b, a) - 1.0) <= 1e-12);
      CHECK(std::abs(reg_incomplete_beta(x, a, b) - boost::math::ibeta(a, b, x)) <= 1e-12);
    }
  }
  CHECK(reg_incomplete_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(reg_incomplete_beta(1.0, 2.0, 3.0) == 1.0);
  CHECK(std::abs(reg_incomplete_beta(0.75, 1.0, 0.5) - 0.5) <= 1e-12);
  CHECK_THROWS_AS(reg_incomplete_beta(1.2, 1.0, 1.0), Error);
  CHECK_THROWS_AS(reg_incomplete_beta(0.5, 0.0, 1.0), Error);
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(3) == doctest::Approx(2 * pi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(4 * pi).epsilon(1e-14));
  CHECK(sphere_area(6) == doctest::Approx(8 * pi * pi / 3).epsilon(1e-14));
  CHECK_THROWS_AS(sphere_area(2), Error);
}

TEST_CASE("P0") {
  CHECK(p0(0.0, 7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p0(1.0, 7) == 0.0);
  CHECK(std::abs(p0(0.5, 4) - 0.5) <= 1e-12);
  for (double r = 0.0; r <= 1.0; r += 0.01) CHECK(std::abs(p0(r, 6) - (1 - 1.5 * r + 0.5 * r * r * r)) <= 1e-12);
  for (double r = 0.05; r < 1.0; r += 0.05) {
    CHECK(p0(r + 0.01, 8) < p0(r, 8));
    CHECK(p0(r, 9) < p0(r, 8));
  }
  CHECK_THROWS_AS(p0(1.1, 6), Error);
  CHECK_THROWS_AS(p0(0.5, 2), Error);

  SUBCASE("Monte Carlo over uniform sphere pairs") {
    RandomStream rng(8, 9);
    const int m = 200000;
    int hits = 0;
    Eigen::Vector3d u, v;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < 3; ++j) {
        u(j) = rng.normal();
        v(j) = rng.normal();
      }
      if (std::abs(u.normalized().dot(v.normalized())) > 0.5) ++hits;
    }
    const double se = std::sqrt(0.25 / m);
    CHECK(std::abs(double(hits) / m - 0.5) <= 3 * se);
  }
}

TEST_CASE("xi and the p-value map") {
  CHECK(xi(1000, 6, 1.0) == 0.0);
  CHECK(xi(1, 9, 0.3) == doctest::Approx(p0(0.3, 9)).epsilon(1e-15));
  // p * I_{0.19}(2, 1/2) by adaptive quadrature of the beta density
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double t) { return t / std::sqrt(1.0 - t); }, 0.0, 0.19, 15, 1e-14);
  CHECK(std::abs(xi(1000, 6, 0.9) - 1000.0 * integral / boost::math::beta(2.0, 0.5)) <= 1e-9);

  CHECK(pvalue(500, 6, 1.0) == 0.0);
  const double rho = threshold_for_xi(2000, 8, std::log(2.0));
  CHECK(pvalue(2000, 8, rho) == doctest::Approx(0.5).epsilon(1e-9));
  double prev = 1.0;
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const double pv = pvalue(2000, 8, r);
    CHECK(pv <= prev);
    CHECK(pv >= 0.0);
    prev = pv;
  }
}

TEST_CASE("null p-values of the top-ranked variable are uniform") {
  const Index p = 2000;
  const int n = 8, trials = 500;
  const GaussianDesign design(CovarianceSpec::identity(p));
  Eigen::VectorXd pv(trials);
  for (int t = 0; t < trials; ++t) {
    RandomStream xr(31, stream_id(t, StreamPurpose::Design));
    RandomStream yr(31, stream_id(t, StreamPurpose::Noise));
    const Eigen::MatrixXd x = design.sample(n, xr);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = yr.normal();
    const ScreeningScores s = screen_scores(DataMatrix(x), y, ScreeningMethod::SIS);
    pv(t) = pvalue(p, n, s.scores.maxCoeff());
  }
  CHECK(ks_statistic_uniform(pv) < 1.358 / std::sqrt(double(trials)));
}

TEST_CASE("critical threshold") {
  CHECK(std::abs(critical_threshold(1000, 6) - std::sqrt(1.0 - 3.0 / (8 * pi * pi * 1000))) <= 1e-12);
  CHECK(critical_threshold(1000, 6) == doctest::Approx(0.999981).epsilon(1e-6));
  const double r5 = critical_threshold(10, 5);
  CHECK(r5 > 0.0);
  CHECK(r5 < 1.0);
  CHECK(std::abs(r5 - std::sqrt(1.0 - std::pow(sphere_area(5) * 10, -2.0))) <= 1e-14);
  CHECK_THROWS_AS(critical_threshold(1000, 4), Error);
  CHECK_THROWS_AS(critical_threshold(0, 6), Error);

  SUBCASE("numeric alternative sets the xi slope to -p") {
    for (int n : {6, 8, 10}) {
      const std::int64_t p = 1000;
      const double r = critical_threshold_numeric(p, n);
      const double h = 1e-6;
      const double slope = (xi(p, n, r + h) - xi(p, n, r - h)) / (2 * h);
      CHECK(slope == doctest::Approx(-double(p)).epsilon(1e-4));
    }
  }
}

TEST_CASE("zeta") { CHECK(zeta(2.0, 6) == doctest::Approx(2.0 * sphere_area(6) / 4.0).epsilon(1e-15)); }

TEST_CASE("Bessel series and the von Mises-Fisher constant") {
  for (double nu : {0.0, 0.5, 1.5, 4.0})
    for (double x : {0.1, 1.0, 7.5, 30.0})
      CHECK(bessel_i_series(nu, x) == doctest::Approx(boost::math::cyl_bessel_i(nu, x)).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_i_series(0.5, 50.0, 1e-12, 3), Error);

  CHECK(vmf_constant(0.0, 6) == doctest::Approx(1.0 / sphere_area(6)).epsilon(1e-15));
  // S_2 in R^3: C(kappa) = kappa / (4 pi sinh kappa)
  for (double k : {0.3, 2.0, 9.0}) CHECK(vmf_constant(k, 4) == doctest::Approx(k / (4 * pi * std::sinh(k))).epsilon(1e-12));
  // small-kappa continuity toward the uniform density
  CHECK(vmf_constant(1e-8, 7) == doctest::Approx(1.0 / sphere_area(7)).epsilon(1e-7));
}

TEST_CASE("J for separable von Mises-Fisher marginals") {
  CHECK(j_separable_vmf(0.0, 0.0, 1, 1, 6) == 1.0);
  for (int n : {4, 6, 11}) {
    for (double k : {0.5, 3.0}) {
      const double j = j_separable_vmf(k, k, 1, -1, n);
      const double expect = sphere_area(n) * std::pow(vmf_constant(k, n), 2) * sphere_area(n);
      CHECK(j == doctest::Approx(expect).epsilon(1e-12));
      CHECK(j == doctest::Approx(j_separable_vmf(k, k, 1, -1, n, 1e-8)).epsilon(1e-7));
    }
    for (auto [k1, k2] : {std::pair{0.5, 2.0}, {3.0, 0.0}, {1.0, 7.0}}) {
      for (int a2 : {1, -1}) {
        const double j = j_separable_vmf(k1, k2, 1, a2, n);
        CHECK(j > 0.0);
        CHECK(j == doctest::Approx(j_separable_vmf(k2, k1, a2, 1, n)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(j_separable_vmf(1.0, 1.0, 0, 1, 6), Error);
}

TEST_CASE("coherency diagnostic") {
  SUBCASE("identical columns give n - 2") {
    const Eigen::VectorXd col = testutil::gaussian(10, 1, 3).col(0);
    const Eigen::MatrixXd x = col.replicate(1, 50);
    CHECK(coherency_diagnostic(compute_uscores(DataMatrix(x)), 50) == doctest::Approx(8.0).epsilon(1e-10));
  }
  SUBCASE("i.i.d. Gaussian, n = 10, p = 10000") {
    const GaussianDesign design(CovarianceSpec::identity(10000));
    int small = 0;
    for (int t = 0; t < 200; ++t) {
      RandomStream rng(12, stream_id(t, StreamPurpose::Design));
      if (coherency_diagnostic(compute_uscores(DataMatrix(design.sample(10, rng))), 10000) < 0.1) ++small;
    }
    CHECK(small >= 190);
  }
}
