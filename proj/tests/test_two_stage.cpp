#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sparcs/error.hpp"
#include "sparcs/simgen.hpp"
#include "sparcs/two_stage.hpp"
#include "test_util.hpp"

using namespace sparcs;

namespace {

bool throws_code(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

// Dense OLS with an explicit intercept column, solved by QR.
Eigen::VectorXd dense_ols_fitted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  return design * beta;
}

}  // namespace

TEST_CASE("budget allocation") {
  const BudgetPlan plan = allocate_budget(20000, 1000, 100, 100, 1.0);
  CHECK(plan.feasible);
  CHECK(plan.n_alloc == 5);
  CHECK(900 * std::log(100.0) + 1e4 == doctest::Approx(14144.7).epsilon(1e-5));

  const BudgetPlan none = allocate_budget(0, 1000, 100, 100, 1.0);
  CHECK_FALSE(none.feasible);
  CHECK(none.n_alloc == 0);

  CHECK(allocate_budget(1e9, 10, 1, 2, 0.1).n_alloc == kMinStage1Samples);
  CHECK(allocate_budget(1e9, 10, 1, 1000, 2.0).n_alloc == 14);

  for (auto bad : {std::array<double, 5>{100, 10, 10, 5, 1}, {100, 10, 0, 5, 1}, {100, 10, 2, 0, 1},
                   {100, 10, 2, 5, 0}, {-1, 10, 2, 5, 1}}) {
    CHECK(throws_code(ErrorCode::InvalidParams, [&] {
      allocate_budget(bad[0], std::int64_t(bad[1]), std::int64_t(bad[2]), std::int64_t(bad[3]), bad[4]);
    }));
  }

  SUBCASE("monotone in mu and k") {
    for (std::int64_t t : {10, 100, 1000}) {
      std::int64_t prev = 0;
      for (double mu = 0; mu <= 2e5; mu += 500) {
        const std::int64_t n = allocate_budget(mu, 1000, 50, t, 1.5).n_alloc;
        CHECK(n >= prev);
        prev = n;
      }
      bool was_feasible = true;
      for (std::int64_t k = 1; k < 1000; k += 7) {
        const bool f = allocate_budget(3e4, 1000, k, t, 1.0).feasible;
        CHECK(!(f && !was_feasible));
        was_feasible = f;
      }
    }
  }

  SUBCASE("regimes separated by the contour c rho ln t + (1 - rho) t = mu / p") {
    const std::int64_t p = 1000;
    for (double ratio : {30.0, 60.0}) {
      for (std::int64_t k : {10, 100, 500, 900}) {
        for (std::int64_t t : {5, 20, 50, 100, 300}) {
          const double rho = 1.0 - double(k) / p;
          const double surface = rho * std::log(double(t)) + (1 - rho) * double(t);
          if (std::abs(surface - ratio) < 1e-9) continue;
          CHECK(allocate_budget(ratio * p, p, k, t, 1.0).feasible == (surface < ratio));
        }
      }
    }
  }
}

TEST_CASE("noiseless single-variable recovery and prediction") {
  // n - 1 = p: the U-score matrix is square, so PCS is exact OLS
  Eigen::MatrixXd x = testutil::gaussian(6, 5, 4);
  const Eigen::VectorXd y = 2.0 * x.col(0);
  const DataMatrix d(x);
  for (auto m : {ScreeningMethod::SIS, ScreeningMethod::PCS_H, ScreeningMethod::PCS_B}) {
    FitOptions opt;
    opt.method = m;
    opt.l = 1;
    const TwoStageModel model = fit(d, y, DataMatrix(Eigen::MatrixXd(0, 5)), Eigen::VectorXd(0), opt);
    REQUIRE(model.support.size() == 1);
    CHECK(model.support.entries[0].index == 0);
    CHECK(model.coefficients(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(model.intercept) < 1e-6);
    CHECK(predict(model, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 3.0))) == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(model.coefficients.size() == Index(model.support.size()));
  }
}

TEST_CASE("l = t is rank deficient") {
  const DataMatrix d(testutil::gaussian(6, 10, 5));
  const Eigen::VectorXd y = testutil::gaussian(6, 1, 6).col(0);
  FitOptions opt;
  opt.l = 6;
  CHECK(throws_code(ErrorCode::SingularRestrictedCovariance, [&] { fit(d, y, DataMatrix(Eigen::MatrixXd(0, 10)), {}, opt); }));
  opt.ridge = true;
  const TwoStageModel m = fit(d, y, DataMatrix(Eigen::MatrixXd(0, 10)), Eigen::VectorXd(0), opt);
  CHECK(m.coefficients.allFinite());
  CHECK(m.ridge);
}

TEST_CASE("stage-2 alignment and the n|(t-n) variant") {
  const Eigen::MatrixXd x = testutil::gaussian(60, 8, 7);
  Eigen::VectorXd y = 1.5 * x.col(2) - x.col(5) + 0.1 * testutil::gaussian(60, 1, 8).col(0);
  std::vector<std::string> names;
  for (int j = 0; j < 8; ++j) names.push_back("v" + std::to_string(j));
  const DataMatrix all(x, names);
  const DataMatrix s1 = all.select_rows(0, 20), s2 = all.select_rows(20, 40);
  const Eigen::VectorXd y1 = y.head(20), y2 = y.tail(40);

  FitOptions opt;
  opt.method = ScreeningMethod::SIS;
  opt.l = 2;
  const TwoStageModel full = fit(s1, y1, s2, y2, opt);
  REQUIRE(full.support.sorted_indices() == std::vector<Index>{2, 5});
  CHECK(full.t_total == 60);
  CHECK(std::abs(full.train_residual_mean) < 1e-8);

  // same fit when stage 2 only carries the selected columns, in any order
  const DataMatrix narrow = s2.select_columns({5, 2});
  const TwoStageModel viaNames = fit(s1, y1, narrow, y2, opt);
  CHECK((viaNames.coefficients - full.coefficients).norm() < 1e-12);

  const DataMatrix unnamed(s2.select_columns(full.support.indices()).values);
  CHECK((fit(s1, y1, unnamed, y2, opt).coefficients - full.coefficients).norm() < 1e-12);

  CHECK(throws_code(ErrorCode::SupportMismatch, [&] { fit(s1, y1, s2.select_columns({0, 1, 3}), y2, opt); }));
  CHECK(throws_code(ErrorCode::SupportMismatch, [&] { fit(s1, y1, s2.select_columns({0, 1}), y2, opt); }));

  opt.reuse_stage1 = false;
  const TwoStageModel fresh = fit(s1, y1, s2, y2, opt);
  CHECK_FALSE(fresh.reuse_stage1);
  const OlsFit direct = ols_with_intercept(s2.select_columns(fresh.support.indices()).values, y2);
  CHECK((fresh.coefficients - direct.coefficients).norm() < 1e-12);
  CHECK((fresh.coefficients - full.coefficients).norm() < 0.1);
}

TEST_CASE("OLS oracles") {
  SUBCASE("l = p = k reproduces ordinary least squares") {
    const Eigen::MatrixXd x = testutil::gaussian(40, 6, 10);
    Eigen::VectorXd a(6);
    a << 1, -2, 0.5, 3, -1, 0.25;
    const Eigen::VectorXd y = (x * a).array() + 0.3 + 0.2 * testutil::gaussian(40, 1, 11).col(0).array();
    FitOptions opt;
    opt.method = ScreeningMethod::SIS;
    opt.l = 6;
    const TwoStageModel m = fit(DataMatrix(x), y, DataMatrix(Eigen::MatrixXd(0, 6)), Eigen::VectorXd(0), opt);
    const Eigen::MatrixXd xs = DataMatrix(x).select_columns(m.support.indices()).values;
    CHECK((predict(m, xs) - dense_ols_fitted(x, y)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("in-sample predictions match a dense OLS on the restricted design") {
    const Eigen::MatrixXd x = testutil::gaussian(50, 30, 12);
    const Eigen::VectorXd y = x.col(3) + x.col(17) - x.col(9) + 0.5 * testutil::gaussian(50, 1, 13).col(0);
    FitOptions opt;
    opt.method = ScreeningMethod::SIS;
    opt.l = 4;
    const TwoStageModel m = fit(DataMatrix(x), y, DataMatrix(Eigen::MatrixXd(0, 30)), Eigen::VectorXd(0), opt);
    const Eigen::MatrixXd xs = DataMatrix(x).select_columns(m.support.indices()).values;
    CHECK((predict(m, xs) - dense_ols_fitted(xs, y)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("t = n is screening followed by OLS on the same samples") {
    const Eigen::MatrixXd x = testutil::gaussian(25, 40, 14);
    const Eigen::VectorXd y = 2 * x.col(7) + 0.1 * testutil::gaussian(25, 1, 15).col(0);
    FitOptions opt;
    opt.l = 3;
    const TwoStageModel m = fit(DataMatrix(x), y, DataMatrix(Eigen::MatrixXd(0, 40)), Eigen::VectorXd(0), opt);
    const SupportSet s = select_top_l(screen_scores(DataMatrix(x), y, opt.method), 3);
    CHECK(m.support.indices() == s.indices());
    const OlsFit o = ols_with_intercept(DataMatrix(x).select_columns(s.indices()).values, y);
    CHECK((m.coefficients - o.coefficients).norm() < 1e-14);
  }
}

TEST_CASE("predict and rmse") {
  TwoStageModel m;
  m.coefficients = Eigen::VectorXd::Zero(3);
  m.intercept = 1.25;
  CHECK(predict(m, Eigen::VectorXd(Eigen::VectorXd::Constant(3, 7.0))) == 1.25);
  CHECK(throws_code(ErrorCode::DimensionMismatch, [&] { predict(m, Eigen::VectorXd(2)); }));
  CHECK(throws_code(ErrorCode::DimensionMismatch, [&] { predict(m, Eigen::MatrixXd(4, 2)); }));

  CHECK(rmse(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4)) == 0.0);
  CHECK(rmse(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)) == 1.0);
  const Eigen::VectorXd a = testutil::gaussian(100, 1, 16).col(0), b = testutil::gaussian(100, 1, 17).col(0);
  double s = 0;
  for (int i = 0; i < 100; ++i) s += (a(i) - b(i)) * (a(i) - b(i));
  CHECK(std::abs(rmse(a, b) - std::sqrt(s / 100)) < 1e-12);
  CHECK(throws_code(ErrorCode::DimensionMismatch, [&] { rmse(a, b.head(5)); }));
  CHECK(throws_code(ErrorCode::DimensionMismatch, [&] { rmse(Eigen::VectorXd(0), Eigen::VectorXd(0)); }));
}

TEST_CASE("PCS needs the U-score Gram matrix to be invertible") {
  const DataMatrix d(testutil::gaussian(20, 5, 30));
  const Eigen::VectorXd y = testutil::gaussian(20, 1, 31).col(0);
  FitOptions opt;
  CHECK(throws_code(ErrorCode::SingularGram, [&] { fit(d, y, DataMatrix(Eigen::MatrixXd(0, 5)), Eigen::VectorXd(0), opt); }));
  opt.method = ScreeningMethod::SIS;
  CHECK(fit(d, y, DataMatrix(Eigen::MatrixXd(0, 5)), Eigen::VectorXd(0), opt).coefficients.size() == 1);
}
