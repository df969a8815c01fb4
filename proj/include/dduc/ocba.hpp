#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "dduc/error.hpp"

namespace dduc {

// Welford accumulator; keeps the raw values as well.
class RunningStats {
 public:
  void add(double x) {
    values_.push_back(x);
    const double d = x - mean_;
    mean_ += d / static_cast<double>(values_.size());
    m2_ += d * (x - mean_);
  }

  std::size_t count() const { return values_.size(); }
  double mean() const { return mean_; }
  // Unbiased; zero with fewer than two values.
  double variance() const { return values_.size() > 1 ? m2_ / static_cast<double>(values_.size() - 1) : 0.0; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

enum class AllocationRule : std::uint8_t { Ocba, ClassicOcba, Equal };

struct OcbaState {
  std::vector<std::size_t> N;
  std::vector<double> mean;
  std::vector<double> var;
  std::size_t k = 0;
  std::size_t budget_used = 0;
  std::size_t best = 0;
};

inline double sd_floor(double var, double mean) { return std::max(std::sqrt(std::max(var, 0.0)), 1e-9 * (1.0 + std::abs(mean))); }

inline std::size_t argmin_mean(const std::vector<double>& mean) {
  if (mean.empty()) fail(ErrorKind::DegenerateState, "no candidates");
  return static_cast<std::size_t>(std::min_element(mean.begin(), mean.end()) - mean.begin());
}

namespace detail {

struct RatioModel {
  std::vector<bool> co_best;
  // Non-best: N_l = c * w_l. Co-best share: N_j = c * h_j (unpinned case).
  std::vector<double> w;
  std::vector<double> sd;
  std::size_t tied = 0;
};

inline RatioModel ratio_model(const std::vector<double>& mean, const std::vector<double>& var, AllocationRule rule) {
  const std::size_t L = mean.size();
  const std::size_t b = argmin_mean(mean);
  RatioModel m;
  m.co_best.assign(L, false);
  m.w.assign(L, 0.0);
  m.sd.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    m.sd[l] = sd_floor(var[l], mean[l]);
    if (mean[l] <= mean[b]) {
      m.co_best[l] = true;
      ++m.tied;
      continue;
    }
    if (rule == AllocationRule::ClassicOcba) {
      const double gap = mean[l] - mean[b];
      m.w[l] = (m.sd[l] / gap) * (m.sd[l] / gap);
    } else {
      const double delta = (mean[l] - mean[b]) / m.sd[l];
      m.w[l] = 1.0 / (delta * delta);
    }
  }
  return m;
}

}  // namespace detail

// Real-valued allocation of `total` that satisfies the ratio rule among
// non-best candidates, the best-candidate rule and the sum exactly.
// Candidates tied with the best share the best-candidate role equally.
inline std::vector<double> ocba_real_allocation(const std::vector<double>& mean, const std::vector<double>& var,
                                                double total, AllocationRule rule = AllocationRule::Ocba) {
  const std::size_t L = mean.size();
  if (L < 2) fail(ErrorKind::DegenerateState, "need at least two candidates");
  if (var.size() != L) fail(ErrorKind::DimensionMismatch, "variance vector does not match candidates");
  if (rule == AllocationRule::Equal) return std::vector<double>(L, total / static_cast<double>(L));
  const auto m = detail::ratio_model(mean, var, rule);
  if (m.tied == L) return std::vector<double>(L, total / static_cast<double>(L));
  double s2 = 0.0, sw = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    if (!m.co_best[l]) {
      s2 += m.w[l] * m.w[l] / (m.sd[l] * m.sd[l]);
      sw += m.w[l];
    }
  std::vector<double> h(L, 0.0);
  double sh = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    if (m.co_best[l]) {
      h[l] = m.sd[l] * std::sqrt(s2) / static_cast<double>(m.tied);
      sh += h[l];
    }
  const double c = total / (sw + sh);
  std::vector<double> n(L);
  for (std::size_t l = 0; l < L; ++l) n[l] = c * (m.co_best[l] ? h[l] : m.w[l]);
  return n;
}

// Largest-remainder rounding of nonnegative reals to integers summing to `total`.
// Ties in the remainder go to the lower index.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& x, std::size_t total) {
  std::vector<std::size_t> out(x.size());
  std::size_t used = 0;
  std::vector<std::pair<double, std::size_t>> rem;
  for (std::size_t l = 0; l < x.size(); ++l) {
    const double f = std::floor(std::max(0.0, x[l]));
    out[l] = static_cast<std::size_t>(f);
    used += out[l];
    rem.emplace_back(x[l] - f, l);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t k = 0;
  while (used < total && !rem.empty()) {
    ++out[rem[k % rem.size()].second];
    ++used;
    ++k;
  }
  while (used > total) {
    // Only reachable through floating-point excess; trim the largest.
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --used;
  }
  return out;
}

struct OcbaAllocation {
  std::vector<double> real;
  std::vector<std::size_t> target;
  std::size_t best = 0;
};

// Integer targets summing to `total` and never below the current counts.
// Candidates whose real share falls below their count are pinned there and
// the rest of the budget is re-solved among the others.
inline OcbaAllocation ocba_allocate(const OcbaState& state, std::size_t total,
                                    AllocationRule rule = AllocationRule::Ocba) {
  const std::size_t L = state.N.size();
  if (L < 2) fail(ErrorKind::DegenerateState, "fewer than two distinct candidates");
  if (state.mean.size() != L || state.var.size() != L) fail(ErrorKind::DimensionMismatch, "inconsistent OCBA state");
  const std::size_t have = std::accumulate(state.N.begin(), state.N.end(), std::size_t{0});
  if (total < have) fail(ErrorKind::InvalidValue, "allocation total below the samples already taken");

  OcbaAllocation out;
  out.best = argmin_mean(state.mean);
  out.real = ocba_real_allocation(state.mean, state.var, static_cast<double>(total), rule);

  std::vector<bool> pinned(L, false);
  std::vector<double> x = out.real;
  const auto m = rule == AllocationRule::Equal ? detail::RatioModel{} : detail::ratio_model(state.mean, state.var, rule);
  for (std::size_t round = 0; round <= L; ++round) {
    bool changed = false;
    for (std::size_t l = 0; l < L; ++l)
      if (!pinned[l] && x[l] < static_cast<double>(state.N[l])) {
        pinned[l] = true;
        changed = true;
      }
    if (!changed) break;
    double free_budget = static_cast<double>(total);
    for (std::size_t l = 0; l < L; ++l)
      if (pinned[l]) {
        x[l] = static_cast<double>(state.N[l]);
        free_budget -= x[l];
      }
    std::vector<std::size_t> open;
    for (std::size_t l = 0; l < L; ++l)
      if (!pinned[l]) open.push_back(l);
    if (open.empty()) break;
    if (rule == AllocationRule::Equal || m.tied == L) {
      for (std::size_t l : open) x[l] = free_budget / static_cast<double>(open.size());
      continue;
    }
    // Non-best open: c * w_l; co-best open: sd_j * sqrt(c^2 A + P) / tied,
    // with A over open non-best and P over pinned non-best.
    double A = 0.0, P = 0.0, W = 0.0, H = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      if (m.co_best[l]) continue;
      const double s2 = m.sd[l] * m.sd[l];
      if (pinned[l]) P += x[l] * x[l] / s2;
      else {
        A += m.w[l] * m.w[l] / s2;
        W += m.w[l];
      }
    }
    for (std::size_t l : open)
      if (m.co_best[l]) H += m.sd[l] / static_cast<double>(m.tied);
    auto f = [&](double c) { return c * W + H * std::sqrt(c * c * A + P); };
    double c = 0.0;
    if (f(0.0) < free_budget) {
      double lo = 0.0, hi = 1.0;
      while (f(hi) < free_budget) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < free_budget ? lo : hi) = mid;
      }
      c = 0.5 * (lo + hi);
    }
    const double root = std::sqrt(c * c * A + P);
    double assigned = 0.0;
    for (std::size_t l : open) {
      x[l] = m.co_best[l] ? m.sd[l] * root / static_cast<double>(m.tied) : c * m.w[l];
      assigned += x[l];
    }
    // Co-best-only remainder when every non-best is pinned: split evenly.
    if (W == 0.0 && assigned > 0.0)
      for (std::size_t l : open) x[l] *= free_budget / assigned;
    else if (assigned == 0.0)
      for (std::size_t l : open) x[l] = free_budget / static_cast<double>(open.size());
  }

  // Round the surplus above current counts so the floor is preserved.
  std::vector<double> extra(L);
  for (std::size_t l = 0; l < L; ++l) extra[l] = std::max(0.0, x[l] - static_cast<double>(state.N[l]));
  const auto add = largest_remainder(extra, total - have);
  out.target.resize(L);
  for (std::size_t l = 0; l < L; ++l) out.target[l] = state.N[l] + add[l];
  return out;
}

struct SelectionOptions {
  // Scenarios available beyond the initial samples.
  std::size_t budget = 1000;
  std::size_t delta = 200;
  AllocationRule rule = AllocationRule::Ocba;
};

struct SelectionIteration {
  std::size_t k = 0;
  std::vector<std::size_t> N;
  std::vector<double> mean;
  std::vector<double> var;
  std::size_t best = 0;
};

struct SelectionResult {
  std::size_t best = 0;
  OcbaState state;
  std::vector<SelectionIteration> history;
  std::vector<RunningStats> stats;
};

// sample(k, counts) returns counts[l] fresh total-cost draws for every l.
using BatchSampleFn = std::function<std::vector<std::vector<double>>(std::size_t, const std::vector<std::size_t>&)>;

inline OcbaState state_of(const std::vector<RunningStats>& stats, std::size_t k, std::size_t used) {
  OcbaState s;
  for (const auto& r : stats) {
    s.N.push_back(r.count());
    s.mean.push_back(r.mean());
    s.var.push_back(r.variance());
  }
  s.k = k;
  s.budget_used = used;
  s.best = argmin_mean(s.mean);
  return s;
}

// Each iteration spends min(delta, remaining) new scenarios according to
// the allocation rule and re-selects the best mean.
inline SelectionResult sequential_select(std::vector<RunningStats> initial, const BatchSampleFn& sample,
                                         const SelectionOptions& opt) {
  if (initial.empty()) fail(ErrorKind::DegenerateState, "no candidates");
  for (const auto& r : initial)
    if (r.count() == 0) fail(ErrorKind::DegenerateState, "every candidate needs initial samples");
  if (opt.budget > 0 && opt.delta == 0) fail(ErrorKind::InvalidValue, "delta must be positive");
  SelectionResult res;
  res.stats = std::move(initial);
  res.state = state_of(res.stats, 0, 0);
  auto snapshot = [&]() {
    res.history.push_back({res.state.k, res.state.N, res.state.mean, res.state.var, res.state.best});
  };
  snapshot();
  if (res.stats.size() >= 2) {
    std::size_t used = 0, k = 0;
    while (used < opt.budget) {
      ++k;
      const std::size_t step = std::min(opt.delta, opt.budget - used);
      const std::size_t total = std::accumulate(res.state.N.begin(), res.state.N.end(), std::size_t{0}) + step;
      const auto alloc = ocba_allocate(res.state, total, opt.rule);
      std::vector<std::size_t> dn(res.stats.size());
      for (std::size_t l = 0; l < dn.size(); ++l) dn[l] = alloc.target[l] - res.state.N[l];
      const auto draws = sample(k, dn);
      if (draws.size() != dn.size()) fail(ErrorKind::DimensionMismatch, "sampler returned the wrong candidate count");
      for (std::size_t l = 0; l < dn.size(); ++l) {
        if (draws[l].size() != dn[l]) fail(ErrorKind::DimensionMismatch, "sampler returned the wrong number of costs");
        for (double v : draws[l]) res.stats[l].add(v);
      }
      used += step;
      res.state = state_of(res.stats, k, used);
      snapshot();
    }
  }
  res.best = res.state.best;
  return res;
}

}  // namespace dduc
