#include <gtest/gtest.h>

#include <random>

#include "dduc/suc.hpp"
#include "six_bus.hpp"

namespace dduc {
namespace {

using testing_support::random_schedule;
using testing_support::six_bus;
using testing_support::six_bus_context;
using testing_support::wind_scenarios;

UcOptions extensive() {
  UcOptions o;
  o.method = SolveMethod::Extensive;
  return o;
}

PowerSystem single_bus(int init_state) {
  ThermalUnit g;
  g.id = "G";
  g.bus = 1;
  g.p_min = 10;
  g.p_max = 50;
  g.init_state = init_state;
  g.fuel_a = 20;
  g.fuel_b = 10;
  g.fuel_price = 1.0;
  g.startup_fuel = 5;
  return PowerSystem({{1, 1.0}}, {g}, {{"W", 1, 100}}, {});
}

TEST(Suc, SingleUnitServesDemand) {
  const auto sys = single_bus(-1);
  const UcContext ctx(sys, {{30.0}});
  const auto sol = solve_uc(ctx, {Trajectory{{0.0}}}, extensive());
  EXPECT_EQ(sol.schedule.u[0][0], 1);
  const auto d = evaluate_dispatch(ctx, sol.schedule, {{0.0}});
  EXPECT_NEAR(d.p[0][0], 30.0, 1e-9);
  EXPECT_NEAR(d.ens[0][0], 0.0, 1e-9);
  // startup 5 + fuel 20 + 10 * 30
  EXPECT_NEAR(sol.objective, 325.0, 1e-7);
}

TEST(Suc, ZeroDemandKeepsEverythingOff) {
  const auto sys = single_bus(-3);
  const UcContext ctx(sys, {{0.0, 0.0, 0.0}});
  const auto sol = solve_uc(ctx, {Trajectory{{0.0, 0.0, 0.0}}}, extensive());
  EXPECT_EQ(sol.schedule.u[0], (std::vector<int>{0, 0, 0}));
  EXPECT_NEAR(sol.objective, 0.0, 1e-9);
}

TEST(Suc, ShortfallIsShedAtTheLoadSheddingPrice) {
  const auto sys = single_bus(2);
  const UcContext ctx(sys, {{80.0}});
  const auto sol = solve_uc(ctx, {Trajectory{{10.0}}}, extensive());
  const auto d = evaluate_dispatch(ctx, sol.schedule, {{10.0}});
  EXPECT_NEAR(d.ens[0][0], 20.0, 1e-9);
  EXPECT_NEAR(d.penalty_ens, 20.0 * 3500.0, 1e-6);
  const UcContext more(sys, {{81.0}});
  const auto sol2 = solve_uc(more, {Trajectory{{10.0}}}, extensive());
  EXPECT_NEAR(sol2.objective - sol.objective, 3500.0, 1e-6);
}

TEST(Suc, AllOffShedsEverything) {
  const auto ctx = six_bus_context(3);
  CommitmentSchedule off{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  const auto d = evaluate_dispatch(ctx, off, {{0.0, 0.0, 0.0}});
  double demand = 0.0;
  for (std::size_t t = 0; t < 3; ++t) demand += ctx.total_load(t);
  EXPECT_NEAR(d.cost, 3500.0 * demand, 1e-6 * demand);
}

TEST(Suc, SurplusWindIsCurtailed) {
  const auto sys = single_bus(2);
  const UcContext ctx(sys, {{40.0, 40.0}});
  CommitmentSchedule on{{{1, 1}}};
  const auto d = evaluate_dispatch(ctx, on, {{90.0, 100.0}});
  EXPECT_NEAR(d.p[0][0], 10.0, 1e-9);
  EXPECT_NEAR(d.wc[0][0], 60.0, 1e-9);
  EXPECT_NEAR(d.wc[0][1], 70.0, 1e-9);
  EXPECT_NEAR(d.curtailment, 130.0 * 50.0, 1e-6);
}

TEST(Suc, MinimumUpDownClosure) {
  const auto ctx = six_bus_context(24);
  CommitmentSchedule s{{std::vector<int>(24, 1), std::vector<int>(24, 1), std::vector<int>(24, 0)}};
  // G1 off hours 5..8, then on from hour 9.
  for (int t = 4; t < 8; ++t) s.u[0][t] = 0;
  EXPECT_FALSE(schedule_violation(ctx, s)) << *schedule_violation(ctx, s);
  auto bad = s;
  bad.u[0][11] = 0;
  ASSERT_TRUE(schedule_violation(ctx, bad));
  EXPECT_NE(schedule_violation(ctx, bad)->find("through hour 12"), std::string::npos);
  auto bad_off = s;
  bad_off.u[0][6] = 1;
  EXPECT_TRUE(schedule_violation(ctx, bad_off));
  // G3 starts off for one hour with min_off 1, so it may start at once.
  auto g3 = s;
  g3.u[2][0] = 1;
  EXPECT_FALSE(schedule_violation(ctx, g3));
}

TEST(Suc, InitialStateClosure) {
  const auto& sys = six_bus();
  UcContext ctx(sys, bus_loads(sys, testing_support::six_bus_system_load(6)), {}, {1, 2, -1});
  // G1 has been on for one hour with min_on 4: hours 1..3 are pinned.
  CommitmentSchedule s{{{1, 1, 1, 0, 0, 0}, {1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0}}};
  EXPECT_FALSE(schedule_violation(ctx, s));
  s.u[0] = {1, 1, 0, 0, 0, 0};
  EXPECT_TRUE(schedule_violation(ctx, s));
  EXPECT_EQ(forced_initial_hours(sys.units()[0], 1), 3);
  EXPECT_EQ(forced_initial_hours(sys.units()[1], -1), 2);
  EXPECT_EQ(advance_state(2, {1, 1}), 4);
  EXPECT_EQ(advance_state(2, {1, 0}), -1);
  EXPECT_EQ(advance_state(-3, {0, 0, 1}), 1);
}

// Every 0/1 assignment satisfies the first-stage rows exactly when the
// validator accepts it.
TEST(Suc, FirstStageRowsMatchValidator) {
  const auto& sys = six_bus();
  for (int init : {4, 1, -1, -3}) {
    const std::size_t T = 6;
    UcContext ctx(sys, bus_loads(sys, std::vector<double>(T, 1000.0)), {}, {init, 2, -1});
    std::vector<int> bin;
    const auto lp = build_first_stage(ctx, bin);
    for (int mask = 0; mask < (1 << T); ++mask) {
      CommitmentSchedule s{{std::vector<int>(T), std::vector<int>(T, 1), std::vector<int>(T, 0)}};
      for (std::size_t t = 0; t < T; ++t) s.u[0][t] = mask >> t & 1;
      if (schedule_violation(ctx, s) && schedule_violation(ctx, s)->find("G1") == std::string::npos) continue;
      const auto x = master_point(ctx, s);
      bool ok = true;
      for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (x[j] < lp.lower[j] - 1e-9 || x[j] > lp.upper[j] + 1e-9) ok = false;
      for (std::size_t r = 0; r < lp.num_rows(); ++r) {
        double a = 0.0;
        for (const auto& t : lp.rows[r]) a += t.coef * x[t.var];
        if (lp.sense[r] == Sense::LessEqual && a > lp.rhs[r] + 1e-9) ok = false;
        if (lp.sense[r] == Sense::GreaterEqual && a < lp.rhs[r] - 1e-9) ok = false;
      }
      EXPECT_EQ(ok, !schedule_violation(ctx, s).has_value()) << "init " << init << " mask " << mask;
      double cost = 0.0;
      for (std::size_t j = 0; j < lp.num_vars(); ++j) cost += lp.cost[j] * x[j];
      if (ok) {
        EXPECT_NEAR(cost, first_stage_cost(ctx, s), 1e-9);
      }
    }
  }
}

TEST(Suc, DispatchRespectsNetworkAndBalance) {
  std::mt19937_64 rng(8);
  const auto ctx = six_bus_context(24);
  const auto& sys = six_bus();
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_schedule(rng, ctx);
    ASSERT_FALSE(schedule_violation(ctx, s));
    const auto wind = wind_scenarios(rng, 1, 24)[0];
    const auto d = evaluate_dispatch(ctx, s, wind);
    for (std::size_t t = 0; t < 24; ++t) {
      double bal = 0.0;
      Eigen::VectorXd inj = Eigen::VectorXd::Zero(6);
      for (std::size_t i = 0; i < 3; ++i) {
        bal += d.p[i][t];
        inj(sys.bus_index(sys.units()[i].bus)) += d.p[i][t];
        EXPECT_GE(d.p[i][t], sys.units()[i].p_min * s.u[i][t] - 1e-7);
        EXPECT_LE(d.p[i][t], sys.units()[i].p_max * s.u[i][t] + 1e-7);
      }
      bal += wind[0][t] - d.wc[0][t];
      inj(sys.bus_index(4)) += wind[0][t] - d.wc[0][t];
      EXPECT_GE(d.wc[0][t], -1e-9);
      EXPECT_LE(d.wc[0][t], wind[0][t] + 1e-9);
      for (std::size_t b = 0; b < 6; ++b) {
        bal -= ctx.load[b][t] - d.ens[b][t];
        inj(b) -= ctx.load[b][t] - d.ens[b][t];
        EXPECT_GE(d.ens[b][t], -1e-9);
      }
      EXPECT_NEAR(bal, 0.0, 1e-6);
      const Eigen::VectorXd flow = sys.ptdf() * inj;
      for (std::size_t l = 0; l < 7; ++l)
        EXPECT_LE(std::abs(flow(static_cast<Eigen::Index>(l))), sys.lines()[l].flow_limit + 1e-6);
    }
  }
}

TEST(Suc, CompleteRecourseOnRandomPairs) {
  std::mt19937_64 rng(21);
  int infeasible = 0;
  for (int day = 0; day < 20; ++day) {
    const auto ctx = six_bus_context(24, static_cast<std::size_t>(day));
    for (int k = 0; k < 10; ++k) {
      const auto s = random_schedule(rng, ctx);
      DispatchEvaluator ev(ctx, s);
      for (const auto& w : wind_scenarios(rng, 5, 24)) {
        try {
          ev.evaluate(w);
        } catch (const Error&) {
          ++infeasible;
        }
      }
    }
  }
  EXPECT_EQ(infeasible, 0);
}

TEST(Suc, CostBreakdownAddsUp) {
  std::mt19937_64 rng(4);
  const auto ctx = six_bus_context(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_schedule(rng, ctx);
    const auto c = realized_cost(ctx, s, wind_scenarios(rng, 1, 24)[0]);
    EXPECT_NEAR(c.total, c.commitment + c.dispatch + c.penalty_ens + c.curtailment, 1e-6);
    const auto d = evaluate_dispatch(ctx, s, wind_scenarios(rng, 1, 24)[0]);
    EXPECT_NEAR(d.cost, d.dispatch_cost + d.penalty_ens + d.curtailment, 1e-6 * (1 + d.cost));
  }
}

TEST(Suc, PerfectForecastRealizesTheDeterministicObjective) {
  std::mt19937_64 rng(5);
  const auto ctx = six_bus_context(4);
  const auto point = wind_scenarios(rng, 1, 4)[0];
  const auto sol = solve_uc(ctx, {point}, extensive());
  EXPECT_NEAR(realized_cost(ctx, sol.schedule, point).total, sol.objective, 1e-6 * sol.objective);
  const auto a = build_deterministic_uc(ctx, point);
  const auto b = build_extensive_form(ctx, {point});
  EXPECT_EQ(a.lp.cost, b.lp.cost);
  EXPECT_EQ(a.lp.rhs, b.lp.rhs);
}

TEST(Suc, ExpectedCostEstimator) {
  std::mt19937_64 rng(6);
  const auto ctx = six_bus_context(24);
  const auto s = random_schedule(rng, ctx);
  const auto w = wind_scenarios(rng, 2, 24);
  const auto same = estimate_expected_cost(ctx, s, {w[0], w[0], w[0]});
  EXPECT_NEAR(same.variance, 0.0, 1e-9);
  const auto two = estimate_expected_cost(ctx, s, w);
  const double fs = first_stage_cost(ctx, s);
  const double c1 = evaluate_dispatch(ctx, s, w[0]).cost, c2 = evaluate_dispatch(ctx, s, w[1]).cost;
  EXPECT_NEAR(two.mean, fs + (c1 + c2) / 2, 1e-6);
  EXPECT_NEAR(two.variance, (c1 - c2) * (c1 - c2) / 2, 1e-6 * (1 + two.variance));
}

TEST(Suc, RaisingSheddingPriceNeverLowersTheOptimum) {
  std::mt19937_64 rng(7);
  const auto w = wind_scenarios(rng, 3, 4);
  double prev = -1.0;
  for (double c : {100.0, 1000.0, 3500.0, 10000.0}) {
    const auto ctx = six_bus_context(4, 17, Prices{c, 50.0});
    const double obj = solve_uc(ctx, w, extensive()).objective;
    EXPECT_GE(obj, prev - 1e-6 * obj);
    prev = obj;
  }
}

TEST(Suc, SolutionsSatisfyTheValidator) {
  std::mt19937_64 rng(9);
  for (std::size_t start : {0u, 6u, 12u, 18u}) {
    const auto ctx = six_bus_context(8, start);
    const auto w = wind_scenarios(rng, 3, 8);
    for (auto method : {SolveMethod::LShaped, SolveMethod::Hourly}) {
      UcOptions o;
      o.method = method;
      EXPECT_FALSE(schedule_violation(ctx, solve_uc(ctx, w, o).schedule));
    }
  }
}

TEST(Suc, DegenerateForecastMatchesDeterministicModel) {
  const auto ctx = six_bus_context(4, 8);
  const Trajectory mean{{120.0, 80.0, 60.0, 150.0}};
  const ForecastModel point = NormalPosteriorPredictive{mean, Trajectory{std::vector<double>(4, 0.0)}, 1};
  const auto a = solve_saa_suc(ctx, point, 5, 1, extensive());
  const auto b = solve_uc(ctx, {mean}, extensive());
  EXPECT_EQ(a.schedule, b.schedule);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * b.objective);
}

// Every single-unit row over eight hours, from every initial state.
TEST(Suc, UnitStateSpaceMatchesValidator) {
  const auto& sys = six_bus();
  const std::size_t T = 8;
  int accepted = 0;
  for (std::size_t unit = 0; unit < 3; ++unit)
    for (int init = -6; init <= 6; ++init) {
      if (init == 0) continue;
      std::vector<int> inits{1, 1, 1};
      inits[unit] = init;
      UcContext ctx(sys, bus_loads(sys, std::vector<double>(T, 200.0)), {}, inits);
      const UnitStateSpace space(ctx);
      for (int mask = 0; mask < (1 << T); ++mask) {
        CommitmentSchedule s{std::vector<std::vector<int>>(3, std::vector<int>(T, 1))};
        for (std::size_t t = 0; t < T; ++t) s.u[unit][t] = mask >> t & 1;
        int code = space.initial(unit, init);
        for (std::size_t t = 0; t < T && code >= 0; ++t) code = space.step(unit, code, s.u[unit][t]);
        const bool ok = !schedule_violation(ctx, s).has_value();
        EXPECT_EQ(code >= 0, ok) << "unit " << unit << " init " << init << " mask " << mask;
        accepted += ok;
      }
    }
  EXPECT_GT(accepted, 1000);
}

TEST(Suc, HourlyMethodMatchesExtensiveForm) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const auto& sys = six_bus();
    const std::size_t T = 4;
    std::vector<int> init{trial % 2 ? 2 : -3, trial % 3 ? 1 : -1, -1};
    UcContext ctx(sys, bus_loads(sys, testing_support::six_bus_system_load(T, 4 * trial)), {}, init);
    const auto w = wind_scenarios(rng, 1 + trial, T);
    UcOptions ex = extensive();
    ex.milp.gap_tol = 1e-9;
    const auto a = solve_uc(ctx, w, ex);
    UcOptions h;
    h.method = SolveMethod::Hourly;
    const auto b = solve_uc(ctx, w, h);
    EXPECT_NEAR(a.objective, b.objective, 1e-7 * a.objective) << trial;
    EXPECT_FALSE(schedule_violation(ctx, b.schedule));
    const auto est = estimate_expected_cost(ctx, b.schedule, w);
    EXPECT_NEAR(est.mean, b.objective, 1e-7 * b.objective);
  }
}

TEST(Suc, HourlyMethodMatchesLShapedOverADay) {
  std::mt19937_64 rng(14);
  const auto ctx = six_bus_context(24, 0);
  const auto w = wind_scenarios(rng, 8, 24);
  UcOptions l;
  l.method = SolveMethod::LShaped;
  l.lshaped.tol = 1e-8;
  UcOptions h;
  h.method = SolveMethod::Hourly;
  const auto a = solve_uc(ctx, w, l);
  const auto b = solve_uc(ctx, w, h);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * a.objective);
  EXPECT_LE(b.objective, a.objective * (1 + 1e-9));
}

TEST(Suc, ScheduleCsv) {
  const auto ctx = six_bus_context(2);
  const auto path = std::filesystem::temp_directory_path() / "dduc_schedule.csv";
  write_schedule_csv(path.string(), ctx, {{{1, 1}, {0, 1}, {0, 0}}});
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(all, "unit,hour,u\nG1,1,1\nG1,2,1\nG2,1,0\nG2,2,1\nG3,1,0\nG3,2,0\n");
}

}  // namespace
}  // namespace dduc
