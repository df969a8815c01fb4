#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dduc/solver/lp.hpp"
#include "dduc/solver/milp.hpp"

namespace dduc {

// value += coef * x[first_stage]
struct AffineTerm {
  int index;
  int first_stage;
  double coef;
};

// A recourse LP whose rhs and column bounds depend affinely on the
// first-stage vector: effective = base + sum(coef * x).
struct RecourseBlock {
  LpInstance lp;
  std::vector<AffineTerm> rhs_terms;
  std::vector<AffineTerm> lower_terms;
  std::vector<AffineTerm> upper_terms;
};

struct TwoStageProblem {
  // First-stage model; its columns are the x that recourse terms refer to.
  LpInstance master;
  std::vector<int> binaries;
  // scenarios[s] is a list of independent blocks whose optimal values add up.
  std::vector<std::vector<RecourseBlock>> scenarios;
  // Empty means uniform.
  std::vector<double> probability;
};

// theta >= intercept + coef . x
struct BendersCut {
  double intercept = 0.0;
  std::vector<double> coef;

  double at(const std::vector<double>& x) const {
    double v = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j) v += coef[j] * x[j];
    return v;
  }
};

struct RecourseValue {
  // Per scenario, unweighted.
  std::vector<double> value;
  std::vector<BendersCut> cut;
  // Per scenario and block.
  std::vector<std::vector<double>> block_value;
  std::vector<std::vector<BendersCut>> block_cut;
};

// Solves recourse blocks at a given first-stage point, keeping one warm
// simplex per block across calls.
class RecourseEvaluator {
 public:
  RecourseEvaluator(const TwoStageProblem& problem, SimplexOptions options = {})
      : problem_(problem), opt_(options), solvers_(problem.scenarios.size()) {
    for (std::size_t s = 0; s < problem.scenarios.size(); ++s) solvers_[s].resize(problem.scenarios[s].size());
  }

  RecourseValue evaluate(const std::vector<double>& x) {
    const std::size_t n1 = problem_.master.num_vars();
    RecourseValue out;
    for (std::size_t s = 0; s < problem_.scenarios.size(); ++s) {
      BendersCut cut{0.0, std::vector<double>(n1, 0.0)};
      double total = 0.0;
      out.block_value.emplace_back();
      out.block_cut.emplace_back();
      for (std::size_t k = 0; k < problem_.scenarios[s].size(); ++k) {
        BendersCut bc{0.0, std::vector<double>(n1, 0.0)};
        const double v = solve_block(s, k, x, bc);
        total += v;
        cut.intercept += bc.intercept;
        for (std::size_t j = 0; j < n1; ++j) cut.coef[j] += bc.coef[j];
        out.block_value.back().push_back(v);
        out.block_cut.back().push_back(std::move(bc));
      }
      out.value.push_back(total);
      out.cut.push_back(std::move(cut));
    }
    return out;
  }

 private:
  double solve_block(std::size_t s, std::size_t k, const std::vector<double>& x, BendersCut& cut) {
    const RecourseBlock& blk = problem_.scenarios[s][k];
    const LpInstance& base = blk.lp;
    std::vector<double> rhs = base.rhs, lo = base.lower, hi = base.upper;
    for (const auto& t : blk.rhs_terms) rhs[t.index] += t.coef * x[t.first_stage];
    for (const auto& t : blk.lower_terms) lo[t.index] += t.coef * x[t.first_stage];
    for (const auto& t : blk.upper_terms) hi[t.index] += t.coef * x[t.first_stage];
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (lo[j] > hi[j]) {
        // Rounding noise on first-stage values can cross coincident bounds.
        if (lo[j] - hi[j] > 1e-7) fail(ErrorKind::SubproblemInfeasible, "recourse bounds cross");
        lo[j] = hi[j] = 0.5 * (lo[j] + hi[j]);
      }

    auto& slot = solvers_[s][k];
    LpSolution sol;
    if (!slot) {
      LpInstance lp = base;
      lp.rhs = rhs;
      lp.lower = lo;
      lp.upper = hi;
      slot = std::make_unique<Simplex>(std::move(lp), opt_);
      sol = slot->solve();
    } else {
      for (const auto& t : blk.rhs_terms) slot->set_row_rhs(t.index, rhs[t.index]);
      for (const auto& t : blk.lower_terms) slot->set_column_bounds(t.index, lo[t.index], hi[t.index]);
      for (const auto& t : blk.upper_terms) slot->set_column_bounds(t.index, lo[t.index], hi[t.index]);
      sol = slot->reoptimize();
    }
    if (sol.status == LpStatus::Infeasible)
      fail(ErrorKind::SubproblemInfeasible,
           "scenario " + std::to_string(s) + " block " + std::to_string(k) + " has no feasible recourse");
    if (sol.status != LpStatus::Optimal)
      fail(ErrorKind::NumericalFailure, "scenario " + std::to_string(s) + " block " + std::to_string(k) + " is unbounded");

    // Dual objective split into the part fixed by the block and the part
    // carried by affine terms.
    cut.intercept += base.offset;
    for (std::size_t i = 0; i < base.num_rows(); ++i) cut.intercept += sol.duals[i] * base.rhs[i];
    for (const auto& t : blk.rhs_terms) cut.coef[t.first_stage] += sol.duals[t.index] * t.coef;
    for (std::size_t j = 0; j < base.num_vars(); ++j) {
      const double d = sol.reduced_costs[j];
      if (d > 0.0 && std::isfinite(base.lower[j])) cut.intercept += d * base.lower[j];
      else if (d < 0.0 && std::isfinite(base.upper[j])) cut.intercept += d * base.upper[j];
    }
    for (const auto& t : blk.lower_terms)
      if (sol.reduced_costs[t.index] > 0.0) cut.coef[t.first_stage] += sol.reduced_costs[t.index] * t.coef;
    for (const auto& t : blk.upper_terms)
      if (sol.reduced_costs[t.index] < 0.0) cut.coef[t.first_stage] += sol.reduced_costs[t.index] * t.coef;
    return sol.objective;
  }

  const TwoStageProblem& problem_;
  SimplexOptions opt_;
  std::vector<std::vector<std::unique_ptr<Simplex>>> solvers_;
};

enum class LShapedStatus : std::uint8_t { Optimal, IterationLimit };

struct LShapedOptions {
  // Relative: stop when UB - LB <= tol * (1 + |UB|).
  double tol = 1e-6;
  std::size_t max_iterations = 1000;
  bool multicut = false;
  // One recourse variable per block index (summed over scenarios) instead
  // of one per scenario. Combines with multicut.
  bool block_cuts = true;
  // Solve the master LP relaxation with cuts before branching.
  bool lp_warmup = true;
  std::size_t max_warmup_iterations = 100;
  // Lower bound on each block's recourse value.
  double recourse_lower_bound = 0.0;
  // Verify every cut against every evaluated point.
  bool check_cuts = false;
  MilpOptions milp;
};

struct LShapedResult {
  LShapedStatus status = LShapedStatus::IterationLimit;
  // First-stage columns only.
  std::vector<double> x;
  double objective = kInfinity;
  double lower_bound = -kInfinity;
  double first_stage_cost = 0.0;
  double expected_recourse = 0.0;
  std::vector<double> scenario_recourse;
  std::size_t iterations = 0;
  std::size_t cuts = 0;
  std::vector<double> lower_history;
  std::vector<double> upper_history;
  std::size_t cut_violations = 0;
};

inline LShapedResult solve_two_stage_lshaped(const TwoStageProblem& problem, const LShapedOptions& options = {}) {
  const std::size_t n1 = problem.master.num_vars();
  const std::size_t S = problem.scenarios.size();
  if (S == 0) fail(ErrorKind::InvalidValue, "no scenarios");
  std::vector<double> prob = problem.probability;
  if (prob.empty()) prob.assign(S, 1.0 / static_cast<double>(S));
  if (prob.size() != S) fail(ErrorKind::DimensionMismatch, "probability vector does not match scenarios");

  // Recourse variables: theta[g] >= sum over (s, k) in group g of prob[s] * Q_sk(x).
  const std::size_t blocks = problem.scenarios[0].size();
  if (options.block_cuts)
    for (const auto& sc : problem.scenarios)
      if (sc.size() != blocks) fail(ErrorKind::DimensionMismatch, "scenarios differ in block count");
  const std::size_t per_scenario = options.block_cuts ? blocks : 1;
  const std::size_t n_theta = (options.multicut ? S : 1) * per_scenario;
  auto group = [&](std::size_t s, std::size_t k) {
    return (options.multicut ? s : 0) * per_scenario + (options.block_cuts ? k : 0);
  };
  std::vector<double> theta_lb(n_theta, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < problem.scenarios[s].size(); ++k)
      theta_lb[group(s, k)] += prob[s] * options.recourse_lower_bound;

  LpInstance master = problem.master;
  const int theta0 = static_cast<int>(n1);
  for (std::size_t g = 0; g < n_theta; ++g) master.add_variable(1.0, theta_lb[g], kInfinity);

  MilpOptions mopt = options.milp;
  mopt.gap_tol = std::min(mopt.gap_tol, options.tol / 4.0);
  BranchAndBound bb(master, problem.binaries, mopt);
  std::optional<Simplex> relax;
  if (options.lp_warmup) relax.emplace(master, mopt.lp);
  RecourseEvaluator eval(problem, mopt.lp);

  struct Seen {
    std::vector<double> x;
    std::vector<double> q;
  };
  std::vector<Seen> seen;
  std::vector<std::pair<std::size_t, BendersCut>> all_cuts;
  LShapedResult res;

  auto first_stage_cost = [&](const std::vector<double>& x) {
    double v = problem.master.offset;
    for (std::size_t j = 0; j < n1; ++j) v += problem.master.cost[j] * x[j];
    return v;
  };

  // Adds cuts from an evaluation; returns the weighted recourse.
  auto add_cuts = [&](const std::vector<double>& x, const RecourseValue& rv) {
    std::vector<BendersCut> new_cuts(n_theta, BendersCut{0.0, std::vector<double>(n1, 0.0)});
    std::vector<double> q(n_theta, 0.0);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < rv.block_cut[s].size(); ++k) {
        const std::size_t g = group(s, k);
        const auto& bc = rv.block_cut[s][k];
        new_cuts[g].intercept += prob[s] * bc.intercept;
        for (std::size_t j = 0; j < n1; ++j) new_cuts[g].coef[j] += prob[s] * bc.coef[j];
        q[g] += prob[s] * rv.block_value[s][k];
      }
    for (std::size_t g = 0; g < n_theta; ++g) {
      const auto& c = new_cuts[g];
      double scale = 1.0;
      for (double v : c.coef) scale = std::max(scale, std::abs(v));
      std::vector<Term> row{{theta0 + static_cast<int>(g), 1.0 / scale}};
      for (std::size_t j = 0; j < n1; ++j)
        if (std::abs(c.coef[j]) > 1e-12 * scale) row.push_back({static_cast<int>(j), -c.coef[j] / scale});
      bb.add_row(row, Sense::GreaterEqual, c.intercept / scale);
      if (relax) relax->add_row(row, Sense::GreaterEqual, c.intercept / scale);
      all_cuts.emplace_back(g, c);
      ++res.cuts;
    }
    if (options.check_cuts) {
      seen.push_back({x, q});
      for (const auto& [g, c] : all_cuts)
        for (const auto& p : seen)
          if (c.at(p.x) > p.q[g] + 1e-6 * (1.0 + std::abs(p.q[g]))) ++res.cut_violations;
    }
    double w = 0.0;
    for (double v : q) w += v;
    return w;
  };

  auto theta_for = [&](const std::vector<double>& x, std::vector<double>& full) {
    full.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n1));
    full.insert(full.end(), theta_lb.begin(), theta_lb.end());
    for (const auto& [g, c] : all_cuts) full[n1 + g] = std::max(full[n1 + g], c.at(x));
  };

  auto record = [&](const std::vector<double>& x, const RecourseValue& rv, double weighted) {
    const double fs = first_stage_cost(x);
    if (fs + weighted < res.objective) {
      res.objective = fs + weighted;
      res.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n1));
      res.first_stage_cost = fs;
      res.expected_recourse = weighted;
      res.scenario_recourse = rv.value;
    }
  };

  if (relax) {
    double lp_lb = -kInfinity;
    for (std::size_t it = 0; it < options.max_warmup_iterations; ++it) {
      const LpSolution sol = it == 0 ? relax->solve() : relax->reoptimize();
      if (sol.status == LpStatus::Infeasible) fail(ErrorKind::Infeasible, "first-stage relaxation is infeasible");
      if (sol.status != LpStatus::Optimal) break;
      lp_lb = std::max(lp_lb, sol.objective);
      std::vector<double> x(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n1));
      const RecourseValue rv = eval.evaluate(x);
      double theta = 0.0;
      for (std::size_t g = 0; g < n_theta; ++g) theta += sol.x[n1 + g];
      const double w = add_cuts(x, rv);
      bool integral = true;
      for (int j : problem.binaries)
        if (std::abs(x[j] - std::round(x[j])) > mopt.integrality_tol) integral = false;
      if (integral) {
        for (int j : problem.binaries) x[j] = std::round(x[j]);
        record(x, rv, w);
      }
      if (w - theta <= options.tol / 4.0 * (1.0 + std::abs(first_stage_cost(x) + w))) break;
    }
    relax.reset();
  }

  std::optional<std::vector<double>> hint;
  if (!res.x.empty()) {
    hint.emplace();
    theta_for(res.x, *hint);
  }
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    ++res.iterations;
    const MilpSolution ms = bb.solve(hint);
    if (ms.status == MilpStatus::Infeasible) fail(ErrorKind::Infeasible, "first-stage problem is infeasible");
    if (ms.status == MilpStatus::Unbounded) fail(ErrorKind::NumericalFailure, "master problem is unbounded");
    if (!std::isfinite(ms.objective)) fail(ErrorKind::NumericalFailure, "master produced no incumbent");
    res.lower_bound = std::max(res.lower_bound, ms.bound);
    std::vector<double> x(ms.x.begin(), ms.x.begin() + static_cast<std::ptrdiff_t>(n1));
    const RecourseValue rv = eval.evaluate(x);
    const double w = add_cuts(x, rv);
    record(x, rv, w);
    res.lower_history.push_back(res.lower_bound);
    res.upper_history.push_back(res.objective);
    if (res.objective - res.lower_bound <= options.tol * (1.0 + std::abs(res.objective))) {
      res.status = LShapedStatus::Optimal;
      break;
    }
    hint.emplace();
    theta_for(res.x, *hint);
  }
  res.lower_bound = std::min(res.lower_bound, res.objective);
  return res;
}

struct ExtensiveForm {
  LpInstance lp;
  std::vector<int> binaries;
  // Column of the first variable of each (scenario, block).
  std::vector<std::vector<int>> block_offset;
};

// Deterministic equivalent: first-stage columns first, then every block
// with its cost scaled by the scenario probability. Affine rhs terms move to
// the left-hand side and affine bounds become explicit rows.
inline ExtensiveForm flatten_two_stage(const TwoStageProblem& problem) {
  const std::size_t S = problem.scenarios.size();
  std::vector<double> prob = problem.probability;
  if (prob.empty()) prob.assign(S, S ? 1.0 / static_cast<double>(S) : 0.0);
  ExtensiveForm ef;
  ef.lp = problem.master;
  ef.binaries = problem.binaries;
  for (std::size_t s = 0; s < S; ++s) {
    ef.block_offset.emplace_back();
    for (const auto& blk : problem.scenarios[s]) {
      const LpInstance& b = blk.lp;
      const int off = static_cast<int>(ef.lp.num_vars());
      ef.block_offset.back().push_back(off);
      std::vector<bool> lo_affine(b.num_vars(), false), hi_affine(b.num_vars(), false);
      for (const auto& t : blk.lower_terms) lo_affine[t.index] = true;
      for (const auto& t : blk.upper_terms) hi_affine[t.index] = true;
      for (std::size_t j = 0; j < b.num_vars(); ++j)
        ef.lp.add_variable(prob[s] * b.cost[j], lo_affine[j] ? -kInfinity : b.lower[j],
                           hi_affine[j] ? kInfinity : b.upper[j]);
      ef.lp.offset += prob[s] * b.offset;
      for (std::size_t i = 0; i < b.num_rows(); ++i) {
        std::vector<Term> row;
        for (const auto& t : b.rows[i]) row.push_back({off + t.var, t.coef});
        for (const auto& t : blk.rhs_terms)
          if (t.index == static_cast<int>(i)) row.push_back({t.first_stage, -t.coef});
        ef.lp.add_row(std::move(row), b.sense[i], b.rhs[i]);
      }
      for (std::size_t j = 0; j < b.num_vars(); ++j) {
        for (int side = 0; side < 2; ++side) {
          const bool lower = side == 0;
          if (!(lower ? lo_affine[j] : hi_affine[j])) continue;
          std::vector<Term> row{{off + static_cast<int>(j), 1.0}};
          for (const auto& t : lower ? blk.lower_terms : blk.upper_terms)
            if (t.index == static_cast<int>(j)) row.push_back({t.first_stage, -t.coef});
          ef.lp.add_row(std::move(row), lower ? Sense::GreaterEqual : Sense::LessEqual,
                        lower ? b.lower[j] : b.upper[j]);
        }
      }
    }
  }
  return ef;
}

}  // namespace dduc
