#include "sparcs/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sparcs/error.hpp"

namespace sparcs {

namespace {

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& b, double lambda) {
  const auto n = static_cast<double>(x.rows());
  return 0.5 * (y - x * b).squaredNorm() / n + lambda * b.lpNorm<1>();
}

LassoResult lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& options,
                     const Eigen::VectorXd* warm_start) {
  if (!(lambda >= 0.0)) fail(ErrorCode::DomainError, "lambda must be nonnegative");
  if (y.size() != x.rows()) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  const Eigen::Index n = x.rows(), p = x.cols();
  const auto nd = static_cast<double>(n);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  if (warm_start != nullptr) {
    if (warm_start->size() != p) fail(ErrorCode::DimensionMismatch, "warm start has wrong length");
    b = *warm_start;
  }
  const Eigen::VectorXd col_sq = x.colwise().squaredNorm().transpose() / nd;
  Eigen::VectorXd r = y - x * b;

  auto objective = [&] { return 0.5 * r.squaredNorm() / nd + lambda * b.lpNorm<1>(); };

  // Changes are measured as col_sq * delta^2 against the null variance of y.
  const double change_scale = std::max(y.squaredNorm() / nd, std::numeric_limits<double>::min());

  // One coordinate pass over `coords`; returns the largest scaled change.
  auto sweep = [&](const std::vector<Eigen::Index>& coords) {
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      if (!(col_sq(j) > 0.0)) continue;
      const double old = b(j);
      const double z = x.col(j).dot(r) / nd + col_sq(j) * old;
      const double updated = soft_threshold(z, lambda) / col_sq(j);
      if (updated != old) {
        r.noalias() -= (updated - old) * x.col(j);
        b(j) = updated;
        max_change = std::max(max_change, col_sq(j) * (updated - old) * (updated - old) / change_scale);
      }
    }
    return max_change;
  };

  // Relative duality gap at the dual point nu = s r, scaled so that
  // ||X^T nu||_inf <= n lambda.
  auto relative_gap = [&] {
    const double primal = objective();
    const double corr = (x.transpose() * r).cwiseAbs().maxCoeff();
    const double s = corr > nd * lambda ? nd * lambda / corr : 1.0;
    const double dual = 0.5 * (y.squaredNorm() - (y - s * r).squaredNorm()) / nd;
    return (primal - dual) / std::max(primal, std::numeric_limits<double>::min());
  };

  std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Eigen::Index{0});

  double prev_obj = objective();
  auto check_descent = [&] {
    const double obj = objective();
    if (obj > prev_obj + 1e-12 * std::max(1.0, std::abs(prev_obj))) {
      throw std::logic_error("lasso_cd: objective increased during a sweep");
    }
    prev_obj = obj;
  };

  LassoResult out;
  int sweeps = 0;
  while (sweeps < options.max_iter) {
    const double full_change = sweep(all);
    ++sweeps;
    check_descent();
    if (full_change < options.tol || relative_gap() < options.tol) {
      out.coefficients = b;
      out.sweeps = sweeps;
      out.objective = prev_obj;
      return out;
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j)
      if (b(j) != 0.0) active.push_back(j);
    for (int inner = 1; sweeps < options.max_iter; ++inner) {
      const double change = sweep(active);
      ++sweeps;
      check_descent();
      if (change < options.tol) break;
      if (inner % 10 == 0 && relative_gap() < options.tol) {
        out.coefficients = b;
        out.sweeps = sweeps;
        out.objective = prev_obj;
        return out;
      }
    }
  }
  fail(ErrorCode::NonConvergence, "lasso_cd did not converge in " + std::to_string(options.max_iter) + " sweeps");
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, double tol, int max_iter) {
  return lasso_cd(x, y, lambda, LassoOptions{tol, max_iter}).coefficients;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

std::vector<double> lasso_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int count, double min_ratio) {
  if (count < 1 || !(min_ratio > 0.0 && min_ratio < 1.0)) fail(ErrorCode::ConfigError, "bad lambda grid parameters");
  const double top = lasso_lambda_max(x, y);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid.push_back(top * std::pow(min_ratio, frac));
  }
  return grid;
}

double cv_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds, const std::vector<double>& lambda_grid,
                 const LassoOptions& options) {
  if (lambda_grid.empty()) fail(ErrorCode::ConfigError, "lambda grid is empty");
  if (folds < 2 || folds > x.rows()) fail(ErrorCode::ConfigError, "folds must lie in [2, n]");
  if (y.size() != x.rows()) fail(ErrorCode::DimensionMismatch, "response length differs from sample count");
  if (lambda_grid.size() == 1) return lambda_grid.front();

  // Descending order so each fit warm-starts from a sparser one.
  std::vector<std::size_t> order(lambda_grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambda_grid[a] > lambda_grid[b]; });

  std::vector<double> sse(lambda_grid.size(), 0.0);
  const Eigen::Index n = x.rows();
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) (i % folds == f ? test : train).push_back(i);
    Eigen::MatrixXd xt = x(train, Eigen::all);
    Eigen::VectorXd yt = y(train);
    const Eigen::RowVectorXd mx = xt.colwise().mean();
    const double my = yt.mean();
    xt.rowwise() -= mx;
    yt.array() -= my;
    Eigen::MatrixXd xv = x(test, Eigen::all);
    xv.rowwise() -= mx;
    const Eigen::VectorXd yv = y(test).array() - my;

    Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
    for (std::size_t idx : order) {
      const LassoResult fit = lasso_cd(xt, yt, lambda_grid[idx], options, &warm);
      warm = fit.coefficients;
      sse[idx] += (yv - xv * fit.coefficients).squaredNorm();
    }
  }
  // Every fold split is fixed, so comparing summed SSE equals comparing mean MSE.
  std::size_t best = order.front();
  for (std::size_t idx : order) {
    if (sse[idx] < sse[best]) best = idx;
  }
  return lambda_grid[best];
}

}  // namespace sparcs
