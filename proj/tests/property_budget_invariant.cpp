// Every feasible plan should satisfy n p + (t - n) k <= mu as an integer
// inequality. The allocation rule tests c (p - k) ln t + k t <= mu and then
// rounds n up, so plans near the feasibility boundary can overshoot.
#include <doctest.h>

#include <cmath>

#include "sparcs/two_stage.hpp"

using namespace sparcs;

TEST_CASE("feasible plans respect the sample budget") {
  long feasible = 0, violations = 0;
  std::string first;
  for (std::int64_t p : {10, 100, 1000, 10000}) {
    for (std::int64_t k : {1, 5, 50, 500}) {
      if (k >= p) continue;
      for (std::int64_t t : {2, 5, 10, 50, 100, 1000, 10000}) {
        for (double c : {0.5, 1.0, 2.0, 12.0}) {
          const double boundary = c * double(p - k) * std::log(double(t)) + double(k * t);
          for (double scale : {1.0, 1.001, 1.01, 1.1, 1.5, 2.0, 10.0}) {
            const double mu = std::ceil(boundary * scale);
            const BudgetPlan plan = allocate_budget(mu, p, k, t, c);
            if (!plan.feasible) continue;
            ++feasible;
            const double spent = double(plan.n_alloc) * double(p) + double(t - plan.n_alloc) * double(k);
            if (plan.n_alloc > t || spent > mu) {
              if (violations++ == 0) {
                first = "p=" + std::to_string(p) + " k=" + std::to_string(k) + " t=" + std::to_string(t) +
                        " c=" + std::to_string(c) + " mu=" + std::to_string(mu) + " n=" + std::to_string(plan.n_alloc) +
                        " spent=" + std::to_string(spent);
              }
            }
          }
        }
      }
    }
  }
  MESSAGE(violations << " of " << feasible << " feasible plans exceed the budget; first: " << first);
  CHECK(violations == 0);
}
