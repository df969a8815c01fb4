#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dduc/forecast.hpp"
#include "dduc/grid.hpp"
#include "dduc/solver/lshaped.hpp"
#include "dduc/solver/milp.hpp"

namespace dduc {

struct Prices {
  double c_ens = 3500.0;
  double c_wc = 50.0;
};

// One UC instance: network, demand [bus][hour], unit states before hour 1.
struct UcContext {
  const PowerSystem* system = nullptr;
  std::vector<std::vector<double>> load;
  std::vector<int> init_state;
  Prices prices;

  UcContext() = default;
  UcContext(const PowerSystem& sys, std::vector<std::vector<double>> bus_load, Prices p = {},
            std::vector<int> init = {})
      : system(&sys), load(std::move(bus_load)), init_state(std::move(init)), prices(p) {
    if (init_state.empty())
      for (const auto& u : sys.units()) init_state.push_back(u.init_state);
    validate();
  }

  std::size_t horizon() const { return load.empty() ? 0 : load.front().size(); }
  std::size_t units() const { return system->units().size(); }

  double total_load(std::size_t t) const {
    double d = 0.0;
    for (const auto& row : load) d += row[t];
    return d;
  }

  void validate() const {
    if (load.size() != system->buses().size()) fail(ErrorKind::DimensionMismatch, "load rows must match buses");
    for (const auto& row : load) {
      if (row.size() != horizon()) fail(ErrorKind::DimensionMismatch, "load rows differ in length");
      for (double v : row)
        if (!(v >= 0.0)) fail(ErrorKind::InvalidValue, "negative or non-finite load");
    }
    if (init_state.size() != units()) fail(ErrorKind::DimensionMismatch, "init_state must list every unit");
    for (int s : init_state)
      if (s == 0) fail(ErrorKind::InvalidValue, "init_state must be nonzero");
    if (prices.c_ens < 0.0 || prices.c_wc < 0.0) fail(ErrorKind::InvalidValue, "prices must be nonnegative");
  }
};

struct CommitmentSchedule {
  // [unit][hour], 0 or 1
  std::vector<std::vector<int>> u;

  bool operator==(const CommitmentSchedule&) const = default;
};

// Number of leading hours pinned to the initial on/off state.
inline int forced_initial_hours(const ThermalUnit& unit, int init_state) {
  return init_state > 0 ? std::max(0, unit.min_on - init_state) : std::max(0, unit.min_off + init_state);
}

// Empty if the schedule satisfies minimum up/down times and the initial state.
inline std::optional<std::string> schedule_violation(const UcContext& ctx, const CommitmentSchedule& s) {
  const auto& units = ctx.system->units();
  const int T = static_cast<int>(ctx.horizon());
  if (s.u.size() != units.size()) return "schedule has wrong unit count";
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& row = s.u[i];
    const std::string tag = "unit " + units[i].id;
    if (static_cast<int>(row.size()) != T) return tag + " has wrong horizon";
    for (int v : row)
      if (v != 0 && v != 1) return tag + " has a non-binary entry";
    const int init = ctx.init_state[i];
    const int forced = std::min(T, forced_initial_hours(units[i], init));
    for (int t = 0; t < forced; ++t)
      if (row[t] != (init > 0 ? 1 : 0))
        return tag + " must stay " + (init > 0 ? "on" : "off") + " through hour " + std::to_string(forced);
    int prev = init > 0 ? 1 : 0;
    for (int t = 0; t < T; ++t) {
      if (row[t] != prev) {
        const int need = row[t] == 1 ? units[i].min_on : units[i].min_off;
        for (int k = t; k < std::min(T, t + need); ++k)
          if (row[k] != row[t])
            return tag + (row[t] == 1 ? " started" : " stopped") + " at hour " + std::to_string(t + 1) +
                   " must hold through hour " + std::to_string(std::min(T, t + need));
      }
      prev = row[t];
    }
  }
  return std::nullopt;
}

// Signed hours on (> 0) or off (< 0) after running `row` from `init`.
inline int advance_state(int init, const std::vector<int>& row) {
  int s = init;
  for (int v : row) s = v ? (s > 0 ? s + 1 : 1) : (s < 0 ? s - 1 : -1);
  return s;
}

struct MasterLayout {
  std::size_t units = 0;
  std::size_t hours = 0;
  int u(std::size_t i, std::size_t t) const { return static_cast<int>(i * hours + t); }
  int su(std::size_t i, std::size_t t) const { return static_cast<int>(units * hours + i * hours + t); }
  int sd(std::size_t i, std::size_t t) const { return static_cast<int>(2 * units * hours + i * hours + t); }
};

// Commitment-only model: binaries u, startup/shutdown cost columns,
// minimum up/down rows, initial-state closure and, per hour, the committed
// minimum output may not exceed demand (implied by recourse feasibility).
inline LpInstance build_first_stage(const UcContext& ctx, std::vector<int>& binaries) {
  const auto& units = ctx.system->units();
  const std::size_t I = units.size(), T = ctx.horizon();
  MasterLayout L{I, T};
  LpInstance lp;
  binaries.clear();
  for (std::size_t i = 0; i < I; ++i) {
    const double fmin_cost = units[i].fuel_price * ctx.system->fuel(i).f_min;
    const int forced = forced_initial_hours(units[i], ctx.init_state[i]);
    for (std::size_t t = 0; t < T; ++t) {
      double lo = 0.0, hi = 1.0;
      if (static_cast<int>(t) < forced) lo = hi = ctx.init_state[i] > 0 ? 1.0 : 0.0;
      binaries.push_back(lp.add_variable(fmin_cost, lo, hi, "u_" + units[i].id + "_" + std::to_string(t + 1)));
    }
  }
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t t = 0; t < T; ++t) lp.add_variable(1.0, 0.0, kInfinity, "su_" + units[i].id + "_" + std::to_string(t + 1));
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t t = 0; t < T; ++t) lp.add_variable(1.0, 0.0, kInfinity, "sd_" + units[i].id + "_" + std::to_string(t + 1));

  for (std::size_t i = 0; i < I; ++i) {
    const auto& g = units[i];
    const double u0 = ctx.init_state[i] > 0 ? 1.0 : 0.0;
    const double k_su = g.fuel_price * g.startup_fuel, k_sd = g.fuel_price * g.shutdown_fuel;
    for (std::size_t t = 0; t < T; ++t) {
      // su >= k_su (u_t - u_{t-1}),  sd >= k_sd (u_{t-1} - u_t)
      if (t == 0) {
        lp.add_row({{L.su(i, t), 1.0}, {L.u(i, t), -k_su}}, Sense::GreaterEqual, -k_su * u0);
        lp.add_row({{L.sd(i, t), 1.0}, {L.u(i, t), k_sd}}, Sense::GreaterEqual, k_sd * u0);
      } else {
        lp.add_row({{L.su(i, t), 1.0}, {L.u(i, t), -k_su}, {L.u(i, t - 1), k_su}}, Sense::GreaterEqual, 0.0);
        lp.add_row({{L.sd(i, t), 1.0}, {L.u(i, t), k_sd}, {L.u(i, t - 1), -k_sd}}, Sense::GreaterEqual, 0.0);
      }
      // u_t - u_{t-1} <= u_k  and  u_k <= 1 + u_t - u_{t-1}, for k after t.
      for (std::size_t k = t + 1; k < std::min(T, t + g.min_on); ++k) {
        if (t == 0) lp.add_row({{L.u(i, t), 1.0}, {L.u(i, k), -1.0}}, Sense::LessEqual, u0);
        else lp.add_row({{L.u(i, t), 1.0}, {L.u(i, t - 1), -1.0}, {L.u(i, k), -1.0}}, Sense::LessEqual, 0.0);
      }
      for (std::size_t k = t + 1; k < std::min(T, t + g.min_off); ++k) {
        if (t == 0) lp.add_row({{L.u(i, k), 1.0}, {L.u(i, t), -1.0}}, Sense::LessEqual, 1.0 - u0);
        else lp.add_row({{L.u(i, k), 1.0}, {L.u(i, t), -1.0}, {L.u(i, t - 1), 1.0}}, Sense::LessEqual, 1.0);
      }
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Term> row;
    for (std::size_t i = 0; i < I; ++i)
      if (units[i].p_min > 0.0) row.push_back({L.u(i, t), units[i].p_min});
    if (!row.empty()) lp.add_row(std::move(row), Sense::LessEqual, ctx.total_load(t));
  }
  return lp;
}

// Economic dispatch of one hour under one wind outcome. Columns: p per unit,
// ens per bus with positive demand, wc per farm. Unit output bounds follow
// the commitment column u(i, t) of the master layout.
struct HourBlock {
  RecourseBlock block;
  std::vector<std::size_t> ens_bus;
  std::size_t ens0 = 0;
  std::size_t wc0 = 0;
};

inline HourBlock build_hour_block(const UcContext& ctx, std::size_t t, const std::vector<double>& wind) {
  const PowerSystem& sys = *ctx.system;
  const auto& units = sys.units();
  const auto& farms = sys.farms();
  if (wind.size() != farms.size()) fail(ErrorKind::DimensionMismatch, "wind vector does not match farms");
  MasterLayout L{units.size(), ctx.horizon()};
  HourBlock hb;
  LpInstance& lp = hb.block.lp;
  for (std::size_t i = 0; i < units.size(); ++i) {
    lp.add_variable(units[i].fuel_price * sys.fuel(i).f_avg, 0.0, 0.0);
    hb.block.lower_terms.push_back({static_cast<int>(i), L.u(i, t), units[i].p_min});
    hb.block.upper_terms.push_back({static_cast<int>(i), L.u(i, t), units[i].p_max});
  }
  hb.ens0 = lp.num_vars();
  for (std::size_t b = 0; b < sys.buses().size(); ++b)
    if (ctx.load[b][t] > 0.0) {
      lp.add_variable(ctx.prices.c_ens, 0.0, ctx.load[b][t]);
      hb.ens_bus.push_back(b);
    }
  hb.wc0 = lp.num_vars();
  for (std::size_t w = 0; w < farms.size(); ++w) {
    if (!(wind[w] >= 0.0)) fail(ErrorKind::InvalidValue, "negative wind");
    lp.add_variable(ctx.prices.c_wc, 0.0, wind[w]);
  }

  // sum p - sum wc + sum ens = demand - wind
  std::vector<Term> bal;
  for (std::size_t i = 0; i < units.size(); ++i) bal.push_back({static_cast<int>(i), 1.0});
  for (std::size_t w = 0; w < farms.size(); ++w) bal.push_back({static_cast<int>(hb.wc0 + w), -1.0});
  for (std::size_t k = 0; k < hb.ens_bus.size(); ++k) bal.push_back({static_cast<int>(hb.ens0 + k), 1.0});
  double net = ctx.total_load(t);
  for (double v : wind) net -= v;
  lp.add_row(std::move(bal), Sense::Equal, net);

  // Flow = PTDF . (p + wind - wc - demand + ens) within +-limit.
  for (std::size_t l = 0; l < sys.lines().size(); ++l) {
    std::vector<Term> row;
    double constant = 0.0;
    auto add = [&](std::size_t col, int bus, double sign) {
      const double g = sys.shift(l, bus);
      if (std::abs(g) > 1e-12) row.push_back({static_cast<int>(col), sign * g});
    };
    for (std::size_t i = 0; i < units.size(); ++i) add(i, units[i].bus, 1.0);
    for (std::size_t w = 0; w < farms.size(); ++w) {
      add(hb.wc0 + w, farms[w].bus, -1.0);
      constant += sys.shift(l, farms[w].bus) * wind[w];
    }
    for (std::size_t k = 0; k < hb.ens_bus.size(); ++k) add(hb.ens0 + k, sys.buses()[hb.ens_bus[k]].id, 1.0);
    for (std::size_t b = 0; b < sys.buses().size(); ++b) constant -= sys.shift(l, sys.buses()[b].id) * ctx.load[b][t];
    if (row.empty()) continue;
    const double lim = sys.lines()[l].flow_limit;
    lp.add_row(row, Sense::LessEqual, lim - constant);
    lp.add_row(std::move(row), Sense::GreaterEqual, -lim - constant);
  }
  return hb;
}

inline TwoStageProblem build_two_stage(const UcContext& ctx, const std::vector<Trajectory>& scenarios) {
  if (scenarios.empty()) fail(ErrorKind::InvalidValue, "at least one scenario is required");
  TwoStageProblem p;
  p.master = build_first_stage(ctx, p.binaries);
  for (const auto& sc : scenarios) {
    if (sc.size() != ctx.system->farms().size()) fail(ErrorKind::DimensionMismatch, "scenario farm count");
    p.scenarios.emplace_back();
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      std::vector<double> wind;
      for (const auto& f : sc) {
        if (f.size() != ctx.horizon()) fail(ErrorKind::DimensionMismatch, "scenario horizon differs from load");
        wind.push_back(f[t]);
      }
      p.scenarios.back().push_back(build_hour_block(ctx, t, wind).block);
    }
  }
  return p;
}

// SAA model as a single MILP: first-stage cost plus the average dispatch cost.
inline ExtensiveForm build_extensive_form(const UcContext& ctx, const std::vector<Trajectory>& scenarios) {
  return flatten_two_stage(build_two_stage(ctx, scenarios));
}

inline ExtensiveForm build_deterministic_uc(const UcContext& ctx, const Trajectory& point_forecast) {
  return build_extensive_form(ctx, {point_forecast});
}

inline CommitmentSchedule schedule_from(const UcContext& ctx, const std::vector<double>& x) {
  MasterLayout L{ctx.units(), ctx.horizon()};
  CommitmentSchedule s;
  for (std::size_t i = 0; i < L.units; ++i) {
    s.u.emplace_back();
    for (std::size_t t = 0; t < L.hours; ++t) s.u.back().push_back(x[L.u(i, t)] > 0.5 ? 1 : 0);
  }
  return s;
}

inline std::vector<double> master_point(const UcContext& ctx, const CommitmentSchedule& s) {
  MasterLayout L{ctx.units(), ctx.horizon()};
  std::vector<double> x(3 * L.units * L.hours, 0.0);
  const auto& units = ctx.system->units();
  for (std::size_t i = 0; i < L.units; ++i) {
    const auto& g = units[i];
    int prev = ctx.init_state[i] > 0 ? 1 : 0;
    for (std::size_t t = 0; t < L.hours; ++t) {
      const int u = s.u[i][t];
      x[L.u(i, t)] = u;
      x[L.su(i, t)] = g.fuel_price * g.startup_fuel * std::max(0, u - prev);
      x[L.sd(i, t)] = g.fuel_price * g.shutdown_fuel * std::max(0, prev - u);
      prev = u;
    }
  }
  return x;
}

// Commitment cost: minimum-load fuel plus startup and shutdown charges.
inline double first_stage_cost(const UcContext& ctx, const CommitmentSchedule& s) {
  const auto& units = ctx.system->units();
  double c = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& g = units[i];
    int prev = ctx.init_state[i] > 0 ? 1 : 0;
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      const int u = s.u[i][t];
      c += g.fuel_price * ctx.system->fuel(i).f_min * u;
      if (u > prev) c += g.fuel_price * g.startup_fuel;
      if (u < prev) c += g.fuel_price * g.shutdown_fuel;
      prev = u;
    }
  }
  return c;
}

// Hourly: exact search that prices every hour's commitment pattern and
// runs a dynamic program over unit up/down states. Auto picks Hourly when
// the pattern and state counts fit the limits, otherwise LShaped.
enum class SolveMethod : std::uint8_t { Extensive, LShaped, Hourly, Auto };

struct UcOptions {
  SolveMethod method = SolveMethod::Auto;
  LShapedOptions lshaped;
  MilpOptions milp;
  std::size_t max_patterns = 1u << 10;
  std::size_t max_states = 1u << 16;
};

struct UcSolution {
  CommitmentSchedule schedule;
  double objective = 0.0;
  double lower_bound = 0.0;
  std::size_t iterations = 0;
  bool optimal = false;
};

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Extensive: return "extensive";
    case SolveMethod::LShaped: return "lshaped";
    case SolveMethod::Hourly: return "hourly";
    default: return "auto";
  }
}

// Per-unit DP state: hours on (1..min_on) or off (1..min_off), capped.
class UnitStateSpace {
 public:
  explicit UnitStateSpace(const UcContext& ctx) {
    const auto& units = ctx.system->units();
    for (const auto& g : units) {
      on_.push_back(std::max(1, g.min_on));
      off_.push_back(std::max(1, g.min_off));
    }
    count_ = 1;
    for (std::size_t i = 0; i < units.size(); ++i) {
      const std::size_t r = static_cast<std::size_t>(on_[i] + off_[i]);
      count_ = count_ > (std::size_t(1) << 40) / r ? std::size_t(1) << 40 : count_ * r;
    }
  }

  std::size_t count() const { return count_; }

  // Unit code: 0..on-1 is on for code+1 hours, on..on+off-1 is off.
  std::size_t encode(const std::vector<int>& codes) const {
    std::size_t idx = 0;
    for (std::size_t i = codes.size(); i-- > 0;) idx = idx * static_cast<std::size_t>(on_[i] + off_[i]) + codes[i];
    return idx;
  }

  std::vector<int> decode(std::size_t idx) const {
    std::vector<int> codes(on_.size());
    for (std::size_t i = 0; i < on_.size(); ++i) {
      const auto r = static_cast<std::size_t>(on_[i] + off_[i]);
      codes[i] = static_cast<int>(idx % r);
      idx /= r;
    }
    return codes;
  }

  int initial(std::size_t i, int init_state) const {
    return init_state > 0 ? std::min(init_state, on_[i]) - 1 : on_[i] + std::min(-init_state, off_[i]) - 1;
  }

  bool is_on(std::size_t i, int code) const { return code < on_[i]; }

  // Next code when the unit takes `u`, or -1 if minimum up/down forbids it.
  int step(std::size_t i, int code, int u) const {
    if (is_on(i, code)) {
      if (u) return std::min(code + 1, on_[i] - 1);
      return code == on_[i] - 1 ? on_[i] : -1;
    }
    const int hours = code - on_[i] + 1;
    if (!u) return on_[i] + std::min(hours + 1, off_[i]) - 1;
    return hours >= off_[i] ? 0 : -1;
  }

 private:
  std::vector<int> on_, off_;
  std::size_t count_ = 1;
};

// value[t][pattern]: scenario-average dispatch cost of hour t when unit i is
// committed iff bit i of pattern is set; +inf when no dispatch exists.
inline std::vector<std::vector<double>> hourly_pattern_costs(const UcContext& ctx,
                                                             const std::vector<Trajectory>& scenarios) {
  const PowerSystem& sys = *ctx.system;
  const auto& units = sys.units();
  const std::size_t I = units.size(), T = ctx.horizon(), P = std::size_t(1) << I;
  if (scenarios.empty()) fail(ErrorKind::InvalidValue, "no scenarios");
  MasterLayout L{I, T};
  std::vector<std::vector<double>> value(T, std::vector<double>(P, 0.0));
  std::vector<double> x(3 * I * T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::unique_ptr<Simplex> solver;
    for (std::size_t pat = 0; pat < P; ++pat) {
      double floor_sum = 0.0;
      for (std::size_t i = 0; i < I; ++i)
        if (pat >> i & 1) floor_sum += units[i].p_min;
      if (floor_sum > ctx.total_load(t) + 1e-9) value[t][pat] = kInfinity;
    }
    for (const auto& sc : scenarios) {
      if (sc.size() != sys.farms().size()) fail(ErrorKind::DimensionMismatch, "scenario farm count");
      std::vector<double> w;
      for (const auto& f : sc) {
        if (f.size() != T) fail(ErrorKind::DimensionMismatch, "scenario horizon");
        w.push_back(f[t]);
      }
      HourBlock hb = build_hour_block(ctx, t, w);
      for (std::size_t pat = 0; pat < P; ++pat) {
        if (!std::isfinite(value[t][pat])) continue;
        for (std::size_t i = 0; i < I; ++i) x[L.u(i, t)] = pat >> i & 1;
        LpInstance lp = hb.block.lp;
        for (const auto& term : hb.block.lower_terms) lp.lower[term.index] += term.coef * x[term.first_stage];
        for (const auto& term : hb.block.upper_terms) lp.upper[term.index] += term.coef * x[term.first_stage];
        LpSolution sol;
        if (!solver) {
          solver = std::make_unique<Simplex>(lp);
          sol = solver->solve();
        } else {
          solver->update_data(lp);
          sol = solver->reoptimize();
        }
        if (sol.status == LpStatus::Infeasible) value[t][pat] = kInfinity;
        else if (sol.status != LpStatus::Optimal) fail(ErrorKind::NumericalFailure, "dispatch LP is unbounded");
        else value[t][pat] += sol.objective / static_cast<double>(scenarios.size());
      }
    }
  }
  return value;
}

// Minimises first-stage cost plus sum_t value[t][pattern_t] subject to
// minimum up/down times and the initial state.
inline UcSolution solve_uc_hourly(const UcContext& ctx, const std::vector<std::vector<double>>& value) {
  const auto& units = ctx.system->units();
  const std::size_t I = units.size(), T = ctx.horizon(), P = std::size_t(1) << I;
  const UnitStateSpace space(ctx);
  const std::size_t N = space.count();
  std::vector<double> fixed(I), k_su(I), k_sd(I);
  for (std::size_t i = 0; i < I; ++i) {
    fixed[i] = units[i].fuel_price * ctx.system->fuel(i).f_min;
    k_su[i] = units[i].fuel_price * units[i].startup_fuel;
    k_sd[i] = units[i].fuel_price * units[i].shutdown_fuel;
  }
  std::vector<int> start(I);
  for (std::size_t i = 0; i < I; ++i) start[i] = space.initial(i, ctx.init_state[i]);

  // cost[t][state] after hour t; parent[t][state] = (previous state, pattern).
  std::vector<double> cur(N, kInfinity), next(N);
  cur[space.encode(start)] = 0.0;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> parent(
      T, std::vector<std::pair<std::uint32_t, std::uint32_t>>(N, {0u, 0u}));
  std::vector<int> codes(I);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), kInfinity);
    for (std::size_t st = 0; st < N; ++st) {
      if (!std::isfinite(cur[st])) continue;
      const std::vector<int> from = space.decode(st);
      for (std::size_t pat = 0; pat < P; ++pat) {
        if (!std::isfinite(value[t][pat])) continue;
        double c = cur[st] + value[t][pat];
        bool ok = true;
        for (std::size_t i = 0; i < I && ok; ++i) {
          const int u = pat >> i & 1;
          codes[i] = space.step(i, from[i], u);
          if (codes[i] < 0) {
            ok = false;
            break;
          }
          const bool was_on = space.is_on(i, from[i]);
          c += fixed[i] * u + (u && !was_on ? k_su[i] : 0.0) + (!u && was_on ? k_sd[i] : 0.0);
        }
        if (!ok) continue;
        const std::size_t to = space.encode(codes);
        if (c < next[to]) {
          next[to] = c;
          parent[t][to] = {static_cast<std::uint32_t>(st), static_cast<std::uint32_t>(pat)};
        }
      }
    }
    cur.swap(next);
  }
  std::size_t best = N;
  for (std::size_t st = 0; st < N; ++st)
    if (std::isfinite(cur[st]) && (best == N || cur[st] < cur[best])) best = st;
  if (best == N) fail(ErrorKind::Infeasible, "no commitment schedule admits a feasible dispatch");

  UcSolution out;
  out.objective = out.lower_bound = cur[best];
  out.optimal = true;
  out.iterations = T;
  out.schedule.u.assign(I, std::vector<int>(T, 0));
  for (std::size_t t = T; t-- > 0;) {
    const auto [prev, pat] = parent[t][best];
    for (std::size_t i = 0; i < I; ++i) out.schedule.u[i][t] = pat >> i & 1;
    best = prev;
  }
  return out;
}

inline bool hourly_fits(const UcContext& ctx, const UcOptions& opt) {
  if (ctx.units() >= 31) return false;
  return (std::size_t(1) << ctx.units()) <= opt.max_patterns && UnitStateSpace(ctx).count() <= opt.max_states;
}

inline UcSolution solve_uc(const UcContext& ctx, const std::vector<Trajectory>& scenarios, const UcOptions& opt = {}) {
  UcSolution out;
  SolveMethod method = opt.method;
  if (method == SolveMethod::Auto) method = hourly_fits(ctx, opt) ? SolveMethod::Hourly : SolveMethod::LShaped;
  if (method == SolveMethod::Hourly) {
    if (!hourly_fits(ctx, opt)) fail(ErrorKind::InvalidValue, "too many units for the hourly method");
    return solve_uc_hourly(ctx, hourly_pattern_costs(ctx, scenarios));
  }
  if (method == SolveMethod::Extensive) {
    const auto ef = build_extensive_form(ctx, scenarios);
    const auto ms = solve_milp(ef.lp, ef.binaries, opt.milp);
    if (ms.status == MilpStatus::Infeasible) fail(ErrorKind::Infeasible, "unit commitment model is infeasible");
    if (ms.status == MilpStatus::Unbounded || !std::isfinite(ms.objective))
      fail(ErrorKind::NumericalFailure, std::string("extensive form ended with status ") + to_string(ms.status));
    out.schedule = schedule_from(ctx, ms.x);
    out.objective = ms.objective;
    out.lower_bound = ms.bound;
    out.iterations = ms.nodes;
    out.optimal = ms.status == MilpStatus::Optimal;
  } else {
    const auto problem = build_two_stage(ctx, scenarios);
    const auto r = solve_two_stage_lshaped(problem, opt.lshaped);
    out.schedule = schedule_from(ctx, r.x);
    out.objective = r.objective;
    out.lower_bound = r.lower_bound;
    out.iterations = r.iterations;
    out.optimal = r.status == LShapedStatus::Optimal;
  }
  return out;
}

inline UcSolution solve_saa_suc(const UcContext& ctx, const ForecastModel& model, std::size_t S, std::uint64_t seed,
                                const UcOptions& opt = {}) {
  const auto set = sample_scenarios(model, S, seed, ctx.system->farm_capacities());
  return solve_uc(ctx, set.scenarios, opt);
}

struct DispatchSolution {
  // [unit][hour], [bus][hour], [farm][hour]
  std::vector<std::vector<double>> p;
  std::vector<std::vector<double>> ens;
  std::vector<std::vector<double>> wc;
  // Second-stage cost only.
  double cost = 0.0;
  double dispatch_cost = 0.0;
  double penalty_ens = 0.0;
  double curtailment = 0.0;
};

// Second-stage solves for a fixed schedule; one warm simplex per hour is
// reused across wind trajectories.
class DispatchEvaluator {
 public:
  DispatchEvaluator(const UcContext& ctx, CommitmentSchedule schedule)
      : ctx_(ctx), schedule_(std::move(schedule)), x_(master_point(ctx, schedule_)), solvers_(ctx.horizon()) {
    if (schedule_.u.size() != ctx.units()) fail(ErrorKind::DimensionMismatch, "schedule unit count");
    for (const auto& row : schedule_.u)
      if (row.size() != ctx.horizon()) fail(ErrorKind::DimensionMismatch, "schedule horizon");
  }

  const CommitmentSchedule& schedule() const { return schedule_; }

  DispatchSolution evaluate(const Trajectory& wind) {
    const PowerSystem& sys = *ctx_.system;
    const std::size_t T = ctx_.horizon();
    if (wind.size() != sys.farms().size()) fail(ErrorKind::DimensionMismatch, "wind farm count");
    DispatchSolution d;
    d.p.assign(ctx_.units(), std::vector<double>(T, 0.0));
    d.ens.assign(sys.buses().size(), std::vector<double>(T, 0.0));
    d.wc.assign(sys.farms().size(), std::vector<double>(T, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> w;
      for (const auto& f : wind) {
        if (f.size() != T) fail(ErrorKind::DimensionMismatch, "wind horizon");
        w.push_back(f[t]);
      }
      HourBlock hb = build_hour_block(ctx_, t, w);
      LpInstance& lp = hb.block.lp;
      for (const auto& term : hb.block.lower_terms) lp.lower[term.index] += term.coef * x_[term.first_stage];
      for (const auto& term : hb.block.upper_terms) lp.upper[term.index] += term.coef * x_[term.first_stage];
      LpSolution sol;
      if (!solvers_[t]) {
        solvers_[t] = std::make_unique<Simplex>(lp);
        sol = solvers_[t]->solve();
      } else {
        solvers_[t]->update_data(lp);
        sol = solvers_[t]->reoptimize();
      }
      if (sol.status == LpStatus::Infeasible)
        fail(ErrorKind::SubproblemInfeasible, "dispatch at hour " + std::to_string(t + 1) + " is infeasible");
      if (sol.status != LpStatus::Optimal) fail(ErrorKind::NumericalFailure, "dispatch LP is unbounded");
      for (std::size_t i = 0; i < ctx_.units(); ++i) {
        d.p[i][t] = sol.x[i];
        d.dispatch_cost += lp.cost[i] * sol.x[i];
      }
      for (std::size_t k = 0; k < hb.ens_bus.size(); ++k) {
        d.ens[hb.ens_bus[k]][t] = sol.x[hb.ens0 + k];
        d.penalty_ens += ctx_.prices.c_ens * sol.x[hb.ens0 + k];
      }
      for (std::size_t w2 = 0; w2 < sys.farms().size(); ++w2) {
        d.wc[w2][t] = sol.x[hb.wc0 + w2];
        d.curtailment += ctx_.prices.c_wc * sol.x[hb.wc0 + w2];
      }
      d.cost += sol.objective;
    }
    return d;
  }

 private:
  const UcContext& ctx_;
  CommitmentSchedule schedule_;
  std::vector<double> x_;
  std::vector<std::unique_ptr<Simplex>> solvers_;
};

inline DispatchSolution evaluate_dispatch(const UcContext& ctx, const CommitmentSchedule& s, const Trajectory& wind) {
  DispatchEvaluator ev(ctx, s);
  return ev.evaluate(wind);
}

struct CostEstimate {
  double mean = 0.0;
  double variance = 0.0;
  // First-stage cost plus each scenario's dispatch cost.
  std::vector<double> totals;
};

inline CostEstimate estimate_expected_cost(const UcContext& ctx, const CommitmentSchedule& s,
                                           const std::vector<Trajectory>& scenarios) {
  if (scenarios.empty()) fail(ErrorKind::InvalidValue, "no scenarios to evaluate");
  DispatchEvaluator ev(ctx, s);
  const double fs = first_stage_cost(ctx, s);
  CostEstimate e;
  for (const auto& sc : scenarios) e.totals.push_back(fs + ev.evaluate(sc).cost);
  for (double v : e.totals) e.mean += v;
  e.mean /= static_cast<double>(e.totals.size());
  if (e.totals.size() > 1) {
    for (double v : e.totals) e.variance += (v - e.mean) * (v - e.mean);
    e.variance /= static_cast<double>(e.totals.size() - 1);
  }
  return e;
}

struct CostBreakdown {
  double commitment = 0.0;
  double dispatch = 0.0;
  double penalty_ens = 0.0;
  double curtailment = 0.0;
  double total = 0.0;
};

inline CostBreakdown realized_cost(const UcContext& ctx, const CommitmentSchedule& s, const Trajectory& realized) {
  const auto d = evaluate_dispatch(ctx, s, realized);
  CostBreakdown c;
  c.commitment = first_stage_cost(ctx, s);
  c.dispatch = d.dispatch_cost;
  c.penalty_ens = d.penalty_ens;
  c.curtailment = d.curtailment;
  c.total = c.commitment + c.dispatch + c.penalty_ens + c.curtailment;
  return c;
}

inline void write_schedule_csv(const std::string& path, const UcContext& ctx, const CommitmentSchedule& s) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidValue, "cannot write " + path);
  out << "unit,hour,u\n";
  for (std::size_t i = 0; i < s.u.size(); ++i)
    for (std::size_t t = 0; t < s.u[i].size(); ++t)
      out << ctx.system->units()[i].id << ',' << t + 1 << ',' << s.u[i][t] << '\n';
}

}  // namespace dduc
