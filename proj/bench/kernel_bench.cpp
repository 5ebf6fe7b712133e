// Serial reference kernels against their OpenMP versions, plus end-to-end
// screening time. Reports the median of --reps runs.
#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "sparcs/kernels.hpp"
#include "sparcs/rng.hpp"
#include "sparcs/screening.hpp"

using namespace sparcs;

namespace {

double median_ms(int reps, const std::function<void()>& fn) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  std::nth_element(t.begin(), t.begin() + reps / 2, t.end());
  return t[std::size_t(reps / 2)];
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %10.3f %10.3f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark: serial reference vs OpenMP"};
  Eigen::Index n = 100, p = 100000;
  int reps = 7, threads = 0;
  app.add_option("--n", n, "samples")->check(CLI::PositiveNumber);
  app.add_option("--p", p, "variables")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "repetitions per kernel")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0: default)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  RandomStream rng(1, 1);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();

  std::printf("n = %ld, p = %ld, threads = %d, median of %d runs (ms)\n", long(n), long(p), omp_get_max_threads(), reps);
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial", "openmp", "speedup");

  Eigen::VectorXd means, ss;
  row("column_moments", median_ms(reps, [&] { kernels::column_moments_serial(x, means, ss); }),
      median_ms(reps, [&] { kernels::column_moments(x, means, ss); }));

  Eigen::MatrixXd u(n - 1, p);
  row("helmert_normalize", median_ms(reps, [&] { kernels::helmert_normalize_serial(x, means, u); }),
      median_ms(reps, [&] { kernels::helmert_normalize(x, means, u); }));

  Eigen::VectorXd v = u.col(0), out;
  row("column_dots", median_ms(reps, [&] { kernels::column_dots_serial(u, v, out); }),
      median_ms(reps, [&] { kernels::column_dots(u, v, out); }));
  row("column_sq_norms", median_ms(reps, [&] { kernels::column_sq_norms_serial(u, out); }),
      median_ms(reps, [&] { kernels::column_sq_norms(u, out); }));

  const DataMatrix d(x);
  for (auto m : {ScreeningMethod::SIS, ScreeningMethod::PCS_H, ScreeningMethod::PCS_B}) {
    const double ms = median_ms(reps, [&] { screen_scores(d, y, m); });
    std::printf("screen %-15s %10s %10.3f\n", std::string(to_string(m)).c_str(), "-", ms);
  }
  return 0;
}
