#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dduc/config.hpp"
#include "dduc/forecast.hpp"
#include "dduc/opsel.hpp"
#include "dduc/suc.hpp"
#include "dduc/synthetic.hpp"

namespace dduc {

enum class IntradayModel { BayesianAr1, PersistenceNormal };

struct StudySettings {
  const PowerSystem* system = nullptr;
  SyntheticData data;
  std::size_t warmup_days = 5;
  std::size_t days = 31;
  std::size_t horizon = 24;
  std::size_t block_hours = 4;
  Prices prices;
  std::size_t scenarios = 50;
  std::size_t eval_scenarios = 1000;
  int history_days = 1;
  double phi_fraction = 0.2;
  std::size_t history_window = 100;
  // Data-driven forecast of the intraday and selection studies.
  IntradayModel intraday_model = IntradayModel::BayesianAr1;
  std::uint64_t seed = 1;
  UcOptions uc;
  std::size_t workers = 4;
  std::size_t budget = 1000;
  std::size_t delta_t = 200;
  AllocationRule allocation = AllocationRule::Ocba;
  std::size_t threads = 0;
  std::size_t scatter_day = 1;
  nlohmann::json config = nlohmann::json::object();

  void validate() const {
    if (!system) fail(ErrorKind::InvalidConfig, "no power system");
    if (block_hours == 0 || 24 % block_hours != 0) fail(ErrorKind::InvalidConfig, "block_hours must divide 24");
    if (horizon == 0 || horizon > 24) fail(ErrorKind::InvalidConfig, "horizon must lie in 1..24");
    if (scenarios == 0) fail(ErrorKind::InvalidConfig, "scenarios must be positive");
    if (eval_scenarios < scenarios) fail(ErrorKind::InvalidConfig, "eval_scenarios must be at least scenarios");
    if (history_days < 1) fail(ErrorKind::InvalidConfig, "history_days must be positive");
    if (!(phi_fraction >= 0.0)) fail(ErrorKind::InvalidConfig, "phi_fraction must be nonnegative");
    if (days == 0) fail(ErrorKind::InvalidConfig, "days must be positive");
    if ((warmup_days + days) * 24 > data.hours()) fail(ErrorKind::InvalidConfig, "series shorter than warmup_days + days");
    if (warmup_days * 24 < history_window + block_hours + 1)
      fail(ErrorKind::InvalidConfig, "warmup_days too short for history_window");
    if (budget > 0 && delta_t == 0) fail(ErrorKind::InvalidConfig, "delta_t must be positive");
  }
};

inline SolveMethod parse_method(const std::string& s) {
  if (s == "auto") return SolveMethod::Auto;
  if (s == "hourly") return SolveMethod::Hourly;
  if (s == "lshaped") return SolveMethod::LShaped;
  if (s == "extensive") return SolveMethod::Extensive;
  fail(ErrorKind::InvalidConfig, "unknown method '" + s + "'");
}

inline AllocationRule parse_allocation(const std::string& s) {
  if (s == "ocba") return AllocationRule::Ocba;
  if (s == "classic") return AllocationRule::ClassicOcba;
  if (s == "equal") return AllocationRule::Equal;
  fail(ErrorKind::InvalidConfig, "unknown allocation '" + s + "'");
}

inline IntradayModel parse_intraday_model(const std::string& s) {
  if (s == "ar1") return IntradayModel::BayesianAr1;
  if (s == "normal") return IntradayModel::PersistenceNormal;
  fail(ErrorKind::InvalidConfig, "unknown intraday_model '" + s + "'");
}

inline SyntheticData study_data(const PowerSystem& sys, const Config& cfg) {
  if (!cfg.str("load_file").empty() || !cfg.str("wind_file").empty())
    return read_synthetic(sys, cfg.str("load_file"), cfg.str("wind_file"));
  SyntheticOptions o;
  o.days = cfg.integer("warmup_days") + cfg.integer("days");
  o.penetration = cfg.number("penetration");
  o.seed = cfg.integer("seed");
  return generate_synthetic(sys, o);
}

inline StudySettings settings_from(const Config& cfg, const PowerSystem& sys) {
  StudySettings s;
  s.system = &sys;
  s.data = study_data(sys, cfg);
  s.warmup_days = cfg.integer("warmup_days");
  s.days = cfg.integer("days");
  s.horizon = cfg.integer("horizon");
  s.block_hours = cfg.integer("block_hours");
  s.prices = {cfg.number("c_ens"), cfg.number("c_wc")};
  s.scenarios = cfg.integer("scenarios");
  s.eval_scenarios = cfg.integer("eval_scenarios");
  s.history_days = static_cast<int>(cfg.integer("history_days"));
  s.phi_fraction = cfg.number("phi_fraction");
  s.history_window = cfg.integer("history_window");
  s.intraday_model = parse_intraday_model(cfg.str("intraday_model"));
  s.seed = cfg.integer("seed");
  s.uc.method = parse_method(cfg.str("method"));
  s.workers = cfg.integer("workers");
  s.budget = cfg.integer("budget");
  s.delta_t = cfg.integer("delta_t");
  s.allocation = parse_allocation(cfg.str("allocation"));
  s.threads = cfg.integer("threads");
  s.scatter_day = cfg.integer("scatter_day");
  s.config = cfg.to_json();
  s.validate();
  return s;
}

struct PeriodCost {
  std::size_t day = 0;
  std::size_t block = 0;
  double total = 0.0;
  double penalty = 0.0;
};

struct PolicyResult {
  std::string name;
  std::vector<PeriodCost> periods;
  double total = 0.0;
  double penalty = 0.0;
  double penalty_ratio = 0.0;
  double r_delta_g = 0.0;
};

struct StudyReport {
  std::string study;
  // rΔG of every policy is measured against this one.
  std::string reference;
  std::vector<PolicyResult> policies;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  // (worker, realized cost)
  std::vector<std::pair<std::size_t, double>> scatter;
  nlohmann::json timing = nlohmann::json::object();

  const PolicyResult& policy(const std::string& name) const {
    for (const auto& p : policies)
      if (p.name == name) return p;
    fail(ErrorKind::InvalidValue, "no policy '" + name + "' in report");
  }
};

inline double relative_saving(double reference, double value) { return (reference - value) / reference; }

// Totals are sums of the period entries in order.
inline void finalize(StudyReport& r) {
  for (auto& p : r.policies) {
    p.total = p.penalty = 0.0;
    for (const auto& c : p.periods) {
      p.total += c.total;
      p.penalty += c.penalty;
    }
    p.penalty_ratio = p.total != 0.0 ? p.penalty / p.total : 0.0;
  }
  const double ref = r.policy(r.reference).total;
  for (auto& p : r.policies) p.r_delta_g = relative_saving(ref, p.total);
}

struct ScheduleScore {
  double total = 0.0;
  double penalty = 0.0;
};

// Mean total cost and mean load-shedding cost over the scenarios.
inline ScheduleScore expected_score(const UcContext& ctx, const CommitmentSchedule& s,
                                    const std::vector<Trajectory>& scenarios) {
  DispatchEvaluator ev(ctx, s);
  const double fs = first_stage_cost(ctx, s);
  ScheduleScore sc;
  for (const auto& w : scenarios) {
    const auto d = ev.evaluate(w);
    sc.total += fs + d.cost;
    sc.penalty += d.penalty_ens;
  }
  sc.total /= static_cast<double>(scenarios.size());
  sc.penalty /= static_cast<double>(scenarios.size());
  return sc;
}

namespace detail {

inline std::vector<double> slice(const std::vector<double>& v, std::size_t from, std::size_t n) {
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(from + n)};
}

inline Trajectory slice(const Trajectory& w, std::size_t from, std::size_t n) {
  Trajectory out;
  for (const auto& row : w) out.push_back(slice(row, from, n));
  return out;
}

inline UcContext context_at(const StudySettings& s, std::size_t from, std::size_t n, std::vector<int> init) {
  return UcContext(*s.system, bus_loads(*s.system, slice(s.data.load, from, n)), s.prices, std::move(init));
}

inline std::vector<int> file_init(const PowerSystem& sys) {
  std::vector<int> v;
  for (const auto& u : sys.units()) v.push_back(u.init_state);
  return v;
}

inline std::vector<int> carry(const std::vector<int>& init, const CommitmentSchedule& s) {
  std::vector<int> out;
  for (std::size_t i = 0; i < init.size(); ++i) out.push_back(advance_state(init[i], s.u[i]));
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace detail

// Data-driven forecast for the block starting after hour `now`.
inline ForecastModel intraday_forecast(const StudySettings& s, std::size_t now) {
  if (s.intraday_model == IntradayModel::PersistenceNormal)
    return fit_persistence_normal(s.data.wind, now, s.block_hours, s.history_window);
  return fit_bayesian_ar1(s.data.wind, now, s.block_hours, s.history_window);
}

// Past observations for the day-ahead fits: m draws from the true model of
// the day, clamped to the farm capacities.
inline std::vector<Trajectory> day_history(const NormalPlugIn& truth, int m, std::uint64_t seed,
                                           const std::vector<double>& cap) {
  const auto set = sample_scenarios(truth, static_cast<std::size_t>(m), seed, cap);
  return set.scenarios;
}

// Data-driven (posterior predictive) against empirical (plug-in) day-ahead
// SUC, scored by expected cost under the true model.
inline StudyReport run_day_ahead_study(const StudySettings& s) {
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cap = s.system->farm_capacities();
  StudyReport r;
  r.study = "day_ahead";
  r.reference = "empirical";
  r.config = s.config;
  r.policies = {{"data_driven", {}}, {"empirical", {}}};
  r.details["seeds"] = nlohmann::json::array();
  for (std::size_t d = 0; d < s.days; ++d) {
    const std::size_t from = (s.warmup_days + d) * 24;
    const UcContext ctx = detail::context_at(s, from, s.horizon, detail::file_init(*s.system));
    NormalPlugIn truth{detail::slice(s.data.wind, from, s.horizon), {}};
    truth.sd = truth.mean;
    for (auto& row : truth.sd)
      for (auto& v : row) v *= s.phi_fraction;
    const std::uint64_t hist_seed = mix_seed(s.seed, 0xDA1, d), search_seed = mix_seed(s.seed, 0xDA2, d),
                        eval_seed = mix_seed(s.seed, 0xDA3, d);
    const auto history = day_history(truth, s.history_days, hist_seed, cap);
    const ForecastModel plug = fit_plug_in(history, s.history_days, truth.sd);
    const ForecastModel post = fit_posterior_predictive(history, s.history_days, truth.sd);
    const auto sol_p = solve_saa_suc(ctx, post, s.scenarios, search_seed, s.uc);
    const auto sol_e = solve_saa_suc(ctx, plug, s.scenarios, search_seed, s.uc);
    const auto eval = sample_scenarios(truth, s.eval_scenarios, eval_seed, cap).scenarios;
    const auto gp = expected_score(ctx, sol_p.schedule, eval), ge = expected_score(ctx, sol_e.schedule, eval);
    r.policies[0].periods.push_back({d + 1, 0, gp.total, gp.penalty});
    r.policies[1].periods.push_back({d + 1, 0, ge.total, ge.penalty});
    r.details["seeds"].push_back({{"day", d + 1}, {"history", hist_seed}, {"search", search_seed}, {"evaluation", eval_seed}});
  }
  finalize(r);
  r.timing["total_seconds"] = detail::seconds_since(t0);
  return r;
}

// Rolling intraday commitment over blocks of block_hours, scored by
// realized cost. Each policy carries its own unit states across blocks.
inline StudyReport run_intraday_study(const StudySettings& s) {
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cap = s.system->farm_capacities();
  const std::size_t n = s.block_hours, per_day = 24 / n;
  StudyReport r;
  r.study = "intraday";
  r.reference = "deterministic";
  r.config = s.config;
  r.policies = {{"data_driven", {}}, {"empirical", {}}, {"deterministic", {}}};
  std::vector<std::vector<int>> state(3, detail::file_init(*s.system));
  r.details["seeds"] = nlohmann::json::array();
  for (std::size_t d = 0; d < s.days; ++d)
    for (std::size_t b = 0; b < per_day; ++b) {
      const std::size_t from = (s.warmup_days + d) * 24 + b * n, now = from - 1;
      const std::uint64_t seed = mix_seed(s.seed, 0x1D1, d * per_day + b);
      const Trajectory realized = detail::slice(s.data.wind, from, n);
      for (std::size_t p = 0; p < 3; ++p) {
        const UcContext ctx = detail::context_at(s, from, n, state[p]);
        UcSolution sol;
        if (p == 0) {
          const ForecastModel m = intraday_forecast(s, now);
          sol = solve_saa_suc(ctx, m, s.scenarios, seed, s.uc);
        } else if (p == 1) {
          const ForecastModel m = fit_persistence_empirical(s.data.wind, now, n, s.history_window, cap);
          sol = solve_saa_suc(ctx, m, s.scenarios, seed, s.uc);
        } else {
          sol = solve_uc(ctx, {fit_persistence_point(s.data.wind, now, n).value}, s.uc);
        }
        const auto c = realized_cost(ctx, sol.schedule, realized);
        r.policies[p].periods.push_back({d + 1, b + 1, c.total, c.penalty_ens});
        state[p] = detail::carry(state[p], sol.schedule);
      }
      r.details["seeds"].push_back({{"day", d + 1}, {"block", b + 1}, {"search", seed}});
    }
  finalize(r);
  r.timing["total_seconds"] = detail::seconds_since(t0);
  return r;
}

// Single SAA solve against parallel search plus OCBA selection, both on the
// data-driven intraday model and scored by realized cost.
inline StudyReport run_opsel_study(const StudySettings& s) {
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = s.block_hours, per_day = 24 / n;
  StudyReport r;
  r.study = "opsel";
  r.reference = "single";
  r.config = s.config;
  r.policies = {{"single", {}}, {"opsel", {}}};
  std::vector<std::vector<int>> state(2, detail::file_init(*s.system));
  std::map<std::size_t, double> scatter;
  double search_seconds = 0.0, selection_seconds = 0.0;
  r.details["blocks"] = nlohmann::json::array();
  for (std::size_t d = 0; d < s.days; ++d)
    for (std::size_t b = 0; b < per_day; ++b) {
      const std::size_t from = (s.warmup_days + d) * 24 + b * n, now = from - 1;
      const std::uint64_t seed = mix_seed(s.seed, 0x0C1, d * per_day + b);
      const Trajectory realized = detail::slice(s.data.wind, from, n);
      const ForecastModel model = intraday_forecast(s, now);
      nlohmann::json block = {{"day", d + 1}, {"block", b + 1}, {"seed", seed}};

      const UcContext c0 = detail::context_at(s, from, n, state[0]);
      const auto single = solve_saa_suc(c0, model, s.scenarios, worker_seed(seed, 1), s.uc);
      const auto g0 = realized_cost(c0, single.schedule, realized);
      r.policies[0].periods.push_back({d + 1, b + 1, g0.total, g0.penalty_ens});
      state[0] = detail::carry(state[0], single.schedule);

      const UcContext c1 = detail::context_at(s, from, n, state[1]);
      CommitmentSchedule chosen;
      if (s.budget == 0) {
        // Without a selection budget the procedure reduces to the single solve.
        chosen = solve_saa_suc(c1, model, s.scenarios, worker_seed(seed, 1), s.uc).schedule;
      } else {
        OpselOptions o;
        o.search.workers = s.workers;
        o.search.scenarios = s.scenarios;
        o.search.seed = seed;
        o.search.threads = s.threads;
        o.search.uc = s.uc;
        o.selection.budget = s.budget;
        o.selection.delta = s.delta_t;
        o.selection.rule = s.allocation;
        const auto res = run_opsel(c1, model, o);
        chosen = res.best.schedule;
        search_seconds += res.search_seconds;
        selection_seconds += res.selection_seconds;
        block["best_worker"] = res.best.worker;
        block["candidate_workers"] = nlohmann::json::array();
        for (const auto& c : res.candidates) block["candidate_workers"].push_back(c.workers);
        block["iterations"] = nlohmann::json::array();
        for (const auto& it : res.selection.history)
          block["iterations"].push_back({{"k", it.k}, {"N", it.N}, {"mean", it.mean}, {"var", it.var}, {"best", it.best}});
        for (const auto& w : res.warnings) block["warnings"].push_back(w);
        if (d + 1 == s.scatter_day)
          for (const auto& c : res.searched)
            scatter[c.worker] += realized_cost(c1, c.schedule, realized).total;
      }
      const auto g1 = realized_cost(c1, chosen, realized);
      r.policies[1].periods.push_back({d + 1, b + 1, g1.total, g1.penalty_ens});
      state[1] = detail::carry(state[1], chosen);
      r.details["blocks"].push_back(block);
    }
  for (const auto& [w, c] : scatter) r.scatter.emplace_back(w, c);
  finalize(r);
  r.timing["total_seconds"] = detail::seconds_since(t0);
  r.timing["search_seconds"] = search_seconds;
  r.timing["selection_seconds"] = selection_seconds;
  r.timing["selection_to_search_ratio"] = search_seconds > 0.0 ? selection_seconds / search_seconds : 0.0;
  return r;
}

}  // namespace dduc
