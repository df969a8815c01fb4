#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dduc/solver/lp.hpp"

namespace dduc::testing_support {

// Random LP with finite lower bounds. Most instances are feasible by
// construction (rhs derived from an interior point); a few rows are
// perturbed so infeasible and unbounded cases also appear.
inline LpInstance random_lp(std::mt19937_64& rng, int vars, int rows) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-5, 5);
  LpInstance lp;
  std::vector<double> point(vars);
  for (int j = 0; j < vars; ++j) {
    const double lo = std::floor(unit(rng) * 4.0) - 2.0;
    const double hi = unit(rng) < 0.8 ? lo + 1.0 + std::floor(unit(rng) * 6.0) : kInfinity;
    lp.add_variable(static_cast<double>(coef(rng)), lo, hi);
    point[j] = std::isfinite(hi) ? lo + unit(rng) * (hi - lo) : lo + 3.0 * unit(rng);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    double activity = 0.0;
    for (int j = 0; j < vars; ++j) {
      if (unit(rng) < 0.5) continue;
      const double a = static_cast<double>(coef(rng));
      if (a == 0.0) continue;
      terms.push_back({j, a});
      activity += a * point[j];
    }
    const double r = unit(rng);
    if (r < 0.4) lp.add_row(terms, Sense::LessEqual, std::round(activity + 2.0 * unit(rng)));
    else if (r < 0.8) lp.add_row(terms, Sense::GreaterEqual, std::round(activity - 2.0 * unit(rng)));
    else lp.add_row(terms, Sense::Equal, activity);
  }
  return lp;
}

// Random MILP whose first `binaries` columns are 0/1; rows are built around
// a point with integral binaries so most instances are integer-feasible.
inline LpInstance random_milp(std::mt19937_64& rng, int binaries, int continuous, int rows) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-5, 5);
  LpInstance lp;
  std::vector<double> point;
  for (int j = 0; j < binaries + continuous; ++j) {
    if (j < binaries) {
      lp.add_variable(static_cast<double>(coef(rng)), 0.0, 1.0);
      point.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
    } else {
      lp.add_variable(static_cast<double>(coef(rng)), 0.0, 4.0);
      point.push_back(4.0 * unit(rng));
    }
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    double activity = 0.0;
    for (int j = 0; j < binaries + continuous; ++j) {
      if (unit(rng) < 0.5) continue;
      const double a = static_cast<double>(coef(rng));
      if (a == 0.0) continue;
      terms.push_back({j, a});
      activity += a * point[j];
    }
    const double r = unit(rng);
    if (r < 0.45) lp.add_row(terms, Sense::LessEqual, activity + unit(rng));
    else if (r < 0.9) lp.add_row(terms, Sense::GreaterEqual, activity - unit(rng));
    else lp.add_row(terms, Sense::Equal, activity);
  }
  return lp;
}

// Primal feasibility, dual sign conditions and strong duality.
inline void expect_kkt(const LpInstance& lp, const LpSolution& sol, double tol) {
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    EXPECT_GE(sol.x[j], lp.lower[j] - tol);
    EXPECT_LE(sol.x[j], lp.upper[j] + tol);
  }
  double dual_obj = lp.offset;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    double act = 0.0;
    for (const auto& t : lp.rows[i]) act += t.coef * sol.x[t.var];
    const double scale = 1.0 + std::abs(lp.rhs[i]);
    if (lp.sense[i] == Sense::LessEqual) {
      EXPECT_LE(act, lp.rhs[i] + tol * scale);
      EXPECT_LE(sol.duals[i], 1e-6);
    } else if (lp.sense[i] == Sense::GreaterEqual) {
      EXPECT_GE(act, lp.rhs[i] - tol * scale);
      EXPECT_GE(sol.duals[i], -1e-6);
    } else {
      EXPECT_NEAR(act, lp.rhs[i], tol * scale);
    }
    dual_obj += sol.duals[i] * lp.rhs[i];
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    double d = lp.cost[j];
    for (std::size_t i = 0; i < lp.num_rows(); ++i)
      for (const auto& t : lp.rows[i])
        if (t.var == static_cast<int>(j)) d -= sol.duals[i] * t.coef;
    if (d > 1e-6) {
      ASSERT_TRUE(std::isfinite(lp.lower[j]));
      dual_obj += d * lp.lower[j];
    } else if (d < -1e-6) {
      ASSERT_TRUE(std::isfinite(lp.upper[j]));
      dual_obj += d * lp.upper[j];
    } else {
      dual_obj += d * sol.x[j];
    }
  }
  EXPECT_NEAR(dual_obj, sol.objective, 1e-6 * (1.0 + std::abs(sol.objective)));
}

}  // namespace dduc::testing_support
