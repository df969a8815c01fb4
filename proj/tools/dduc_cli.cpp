#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dduc/dduc.hpp"

namespace {

using namespace dduc;

struct Common {
  std::string config;
  std::map<std::string, std::string> overrides;
  bool classic = false;
  bool multicut = false;
};

// Registers `--flag` that overrides config key `key`.
void override_flag(CLI::App* app, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      "--" + flag, [&c, key](const std::string& v) { c.overrides[key] = v; }, help);
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  override_flag(app, c, "seed", "seed", "base seed");
  override_flag(app, c, "out", "out_dir", "output directory");
  override_flag(app, c, "days", "days", "evaluation days");
  override_flag(app, c, "scenarios", "scenarios", "search scenarios S");
  override_flag(app, c, "method", "method", "auto, hourly, lshaped or extensive");
  override_flag(app, c, "threads", "threads", "worker threads");
  override_flag(app, c, "load", "load_file", "load series CSV");
  override_flag(app, c, "wind", "wind_file", "wind series CSV");
  app->add_flag("--multicut", c.multicut, "one recourse variable per scenario in the L-shaped method");
}

Config load_config(const Common& c) {
  Config cfg = c.config.empty() ? Config() : Config::from_file(c.config);
  for (const auto& [k, v] : c.overrides) cfg.set(k, v);
  if (c.classic) cfg.set("allocation", "classic");
  return cfg;
}

PowerSystem load_six_bus_like(const Config& cfg) {
  const std::filesystem::path d = cfg.str("system_dir");
  return load_system({(d / "buses.csv").string(), (d / "units.csv").string(), (d / "lines.csv").string(),
                      (d / "farms.csv").string()});
}

void print_totals(const StudyReport& r, const std::string& dir) {
  for (const auto& p : r.policies)
    std::printf("%-14s total %.2f  penalty %.2f (%.4f)  rdG %.4f\n", p.name.c_str(), p.total, p.penalty,
                p.penalty_ratio, p.r_delta_g);
  std::printf("wrote %s\n", dir.c_str());
}

int run_study(const Common& c, StudyReport (*study)(const StudySettings&)) {
  const Config cfg = load_config(c);
  const PowerSystem sys = load_six_bus_like(cfg);
  StudySettings s = settings_from(cfg, sys);
  s.uc.lshaped.multicut = c.multicut;
  const auto r = study(s);
  write_report(cfg.str("out_dir"), r);
  print_totals(r, cfg.str("out_dir"));
  return 0;
}

int gen_data(const Common& c) {
  const Config cfg = load_config(c);
  const PowerSystem sys = load_six_bus_like(cfg);
  SyntheticOptions o;
  o.days = cfg.integer("warmup_days") + cfg.integer("days");
  o.penetration = cfg.number("penetration");
  o.seed = cfg.integer("seed");
  const auto data = generate_synthetic(sys, o);
  const std::filesystem::path dir = cfg.str("out_dir");
  std::filesystem::create_directories(dir);
  write_synthetic(data, sys, (dir / "load.csv").string(), (dir / "wind.csv").string());
  const auto back = read_synthetic(sys, (dir / "load.csv").string(), (dir / "wind.csv").string());
  std::printf("%zu hours, penetration %.6f, wrote %s\n", back.hours(), wind_penetration(back.wind, {back.load}),
              dir.string().c_str());
  return 0;
}

// One data-driven day-ahead instance for evaluation day `day`.
int solve_one(const Common& c, std::size_t day, const std::string& dump_lp) {
  const Config cfg = load_config(c);
  const PowerSystem sys = load_six_bus_like(cfg);
  StudySettings s = settings_from(cfg, sys);
  s.uc.lshaped.multicut = c.multicut;
  if (day < 1 || day > s.days) fail(ErrorKind::InvalidConfig, "day must lie in 1.." + std::to_string(s.days));
  const std::size_t from = (s.warmup_days + day - 1) * 24;
  const UcContext ctx(sys, bus_loads(sys, detail::slice(s.data.load, from, s.horizon)), s.prices);
  NormalPlugIn truth{detail::slice(s.data.wind, from, s.horizon), {}};
  truth.sd = truth.mean;
  for (auto& row : truth.sd)
    for (auto& v : row) v *= s.phi_fraction;
  const auto history = day_history(truth, s.history_days, mix_seed(s.seed, 0xDA1, day - 1), sys.farm_capacities());
  const ForecastModel model = fit_posterior_predictive(history, s.history_days, truth.sd);
  const auto scen = sample_scenarios(model, s.scenarios, mix_seed(s.seed, 0xDA2, day - 1), sys.farm_capacities());
  if (!dump_lp.empty()) {
    const auto ef = build_extensive_form(ctx, scen.scenarios);
    std::ofstream out(dump_lp);
    if (!out) fail(ErrorKind::InvalidValue, "cannot write " + dump_lp);
    write_lp(out, ef.lp, ef.binaries);
  }
  const auto sol = solve_uc(ctx, scen.scenarios, s.uc);
  const std::filesystem::path dir = cfg.str("out_dir");
  std::filesystem::create_directories(dir);
  write_schedule_csv((dir / "schedule.csv").string(), ctx, sol.schedule);
  std::printf("method %s  objective %.4f  bound %.4f  %s\n",
              to_string(s.uc.method == SolveMethod::Auto
                            ? (hourly_fits(ctx, s.uc) ? SolveMethod::Hourly : SolveMethod::LShaped)
                            : s.uc.method),
              sol.objective, sol.lower_bound, sol.optimal ? "optimal" : "not proven optimal");
  for (std::size_t i = 0; i < sol.schedule.u.size(); ++i) {
    std::printf("%-4s ", sys.units()[i].id.c_str());
    for (int v : sol.schedule.u[i]) std::printf("%d", v);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stochastic unit commitment"};
  app.require_subcommand(1);
  Common c;

  auto* gen = app.add_subcommand("gen-data", "write synthetic load.csv and wind.csv");
  add_common(gen, c);
  override_flag(gen, c, "penetration", "penetration", "target wind penetration");

  std::size_t day = 1;
  std::string dump_lp;
  auto* solve = app.add_subcommand("solve", "solve one day-ahead instance");
  add_common(solve, c);
  solve->add_option("--day", day, "evaluation day, 1-based");
  solve->add_option("--dump-lp", dump_lp, "write the extensive form in LP format");
  override_flag(solve, c, "phi", "phi_fraction", "wind sd as a fraction of the mean");
  override_flag(solve, c, "m", "history_days", "days of history");

  auto* da = app.add_subcommand("day-ahead", "data-driven against empirical day-ahead SUC");
  add_common(da, c);
  override_flag(da, c, "phi", "phi_fraction", "wind sd as a fraction of the mean");
  override_flag(da, c, "m", "history_days", "days of history");
  override_flag(da, c, "eval-scenarios", "eval_scenarios", "evaluation scenarios");

  auto* intra = app.add_subcommand("intraday", "rolling intraday policies scored by realized cost");
  add_common(intra, c);
  override_flag(intra, c, "window", "history_window", "hours of history");
  override_flag(intra, c, "model", "intraday_model", "data-driven forecast: ar1 or normal");

  auto* op = app.add_subcommand("opsel", "single SAA solve against parallel search with selection");
  add_common(op, c);
  override_flag(op, c, "workers", "workers", "parallel search workers L");
  override_flag(op, c, "budget", "budget", "selection budget T");
  override_flag(op, c, "delta-t", "delta_t", "scenarios per selection iteration");
  override_flag(op, c, "model", "intraday_model", "data-driven forecast: ar1 or normal");
  op->add_flag("--classic-ocba", c.classic, "ratio rule with unstandardized distances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (gen->parsed()) return gen_data(c);
    if (solve->parsed()) return solve_one(c, day, dump_lp);
    if (da->parsed()) return run_study(c, run_day_ahead_study);
    if (intra->parsed()) return run_study(c, run_intraday_study);
    if (op->parsed()) return run_study(c, run_opsel_study);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_solver_failure() ? 3 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
