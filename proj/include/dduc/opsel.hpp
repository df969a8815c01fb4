#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dduc/ocba.hpp"
#include "dduc/rng.hpp"
#include "dduc/suc.hpp"

namespace dduc {

// Runs fn(0..n-1) on up to `threads` threads. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Candidate {
  CommitmentSchedule schedule;
  // 1-based; the lowest worker when several produced this schedule.
  std::size_t worker = 0;
  std::uint64_t seed = 0;
  double search_objective = 0.0;
  // Total cost of the schedule under each search scenario.
  std::vector<double> search_costs;
  std::vector<std::size_t> workers;
};

struct SearchOptions {
  std::size_t workers = 4;
  std::size_t scenarios = 50;
  std::uint64_t seed = 1;
  // Every worker uses `seed` itself.
  bool shared_seed = false;
  // 0 uses the hardware concurrency.
  std::size_t threads = 0;
  UcOptions uc;
};

struct SearchOutcome {
  // One entry per worker that succeeded, in worker order.
  std::vector<Candidate> candidates;
  std::vector<std::string> warnings;
};

inline SearchOutcome parallel_candidate_search(const UcContext& ctx, const ForecastModel& model,
                                               const SearchOptions& opt) {
  if (opt.workers < 2) fail(ErrorKind::DegenerateState, "candidate search needs at least two workers");
  if (opt.scenarios < 1) fail(ErrorKind::InvalidValue, "candidate search needs at least one scenario");
  std::vector<std::optional<Candidate>> slots(opt.workers);
  std::vector<std::string> errors(opt.workers);
  const auto capacity = ctx.system->farm_capacities();
  parallel_for(opt.workers, opt.threads, [&](std::size_t w) {
    const std::size_t ell = w + 1;
    const std::uint64_t seed = opt.shared_seed ? opt.seed : worker_seed(opt.seed, ell);
    try {
      const auto set = sample_scenarios(model, opt.scenarios, seed, capacity);
      const auto sol = solve_uc(ctx, set.scenarios, opt.uc);
      const auto est = estimate_expected_cost(ctx, sol.schedule, set.scenarios);
      slots[w] = Candidate{sol.schedule, ell, seed, sol.objective, est.totals, {ell}};
    } catch (const Error& e) {
      errors[w] = e.what();
    }
  });
  SearchOutcome out;
  for (std::size_t w = 0; w < opt.workers; ++w) {
    if (slots[w]) out.candidates.push_back(std::move(*slots[w]));
    else out.warnings.push_back("worker " + std::to_string(w + 1) + " dropped: " + errors[w]);
  }
  if (out.candidates.size() < 2)
    fail(ErrorKind::DegenerateState, "only " + std::to_string(out.candidates.size()) + " workers produced a schedule");
  return out;
}

// Identical schedules collapse into the first; their search costs are merged.
inline std::vector<Candidate> deduplicate(std::vector<Candidate> cands) {
  std::vector<Candidate> out;
  for (auto& c : cands) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Candidate& o) { return o.schedule == c.schedule; });
    if (it == out.end()) {
      out.push_back(std::move(c));
      continue;
    }
    it->search_costs.insert(it->search_costs.end(), c.search_costs.begin(), c.search_costs.end());
    it->workers.insert(it->workers.end(), c.workers.begin(), c.workers.end());
  }
  return out;
}

struct OpselOptions {
  SearchOptions search;
  SelectionOptions selection;
};

struct OpselResult {
  Candidate best;
  // Search-time argmin of the sample means, before any selection budget.
  std::size_t initial_best = 0;
  // Distinct schedules after merging duplicates.
  std::vector<Candidate> candidates;
  // One per successful worker, before merging.
  std::vector<Candidate> searched;
  SelectionResult selection;
  std::vector<std::string> warnings;
  double search_seconds = 0.0;
  double selection_seconds = 0.0;
};

// Evaluation draws for candidate `worker` at iteration k use mix_seed(seed, worker, k).
inline OpselResult run_opsel(const UcContext& ctx, const ForecastModel& model, const OpselOptions& opt) {
  using clock = std::chrono::steady_clock;
  OpselResult res;
  const auto t0 = clock::now();
  auto search = parallel_candidate_search(ctx, model, opt.search);
  res.warnings = std::move(search.warnings);
  res.searched = search.candidates;
  res.candidates = deduplicate(std::move(search.candidates));
  const auto t1 = clock::now();
  res.search_seconds = std::chrono::duration<double>(t1 - t0).count();

  std::vector<RunningStats> initial(res.candidates.size());
  for (std::size_t l = 0; l < res.candidates.size(); ++l)
    for (double v : res.candidates[l].search_costs) initial[l].add(v);
  std::vector<double> means;
  for (const auto& r : initial) means.push_back(r.mean());
  res.initial_best = argmin_mean(means);
  if (res.candidates.size() < 2) res.warnings.push_back("all workers produced the same schedule");

  std::vector<std::unique_ptr<DispatchEvaluator>> evaluators;
  std::vector<double> fixed;
  for (const auto& c : res.candidates) {
    evaluators.push_back(std::make_unique<DispatchEvaluator>(ctx, c.schedule));
    fixed.push_back(first_stage_cost(ctx, c.schedule));
  }
  const auto capacity = ctx.system->farm_capacities();
  const BatchSampleFn sample = [&](std::size_t k, const std::vector<std::size_t>& counts) {
    std::vector<std::vector<double>> out(counts.size());
    parallel_for(counts.size(), opt.search.threads, [&](std::size_t l) {
      if (counts[l] == 0) return;
      const auto set = sample_scenarios(model, counts[l], mix_seed(opt.search.seed, res.candidates[l].worker, k), capacity);
      for (const auto& sc : set.scenarios) out[l].push_back(fixed[l] + evaluators[l]->evaluate(sc).cost);
    });
    return out;
  };
  res.selection = sequential_select(std::move(initial), sample, opt.selection);
  res.best = res.candidates[res.selection.best];
  res.selection_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  return res;
}

}  // namespace dduc
