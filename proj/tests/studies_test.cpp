#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dduc/dduc.hpp"
#include "six_bus.hpp"

namespace dduc {
namespace {

using testing_support::six_bus;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("dduc_studies_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

StudySettings small_settings(std::size_t days = 1, std::uint64_t seed = 3) {
  Config cfg;
  cfg.set("days", std::to_string(days));
  cfg.set("seed", std::to_string(seed));
  cfg.set("scenarios", "10");
  cfg.set("eval_scenarios", "40");
  cfg.set("budget", "100");
  cfg.set("delta_t", "50");
  cfg.set("threads", "2");
  return settings_from(cfg, six_bus());
}

TEST(Synthetic, HitsTargetPenetration) {
  for (double r : {0.378, 0.099}) {
    SyntheticOptions o;
    o.penetration = r;
    o.seed = 11;
    const auto data = generate_synthetic(six_bus(), o);
    EXPECT_EQ(data.hours(), o.days * 24);
    EXPECT_NEAR(wind_penetration(data.wind, {data.load}) / r, 1.0, 1e-6);
    const auto cap = six_bus().farm_capacities();
    for (std::size_t f = 0; f < data.wind.size(); ++f)
      for (double w : data.wind[f]) {
        EXPECT_GE(w, 0.0);
        EXPECT_LE(w, cap[f]);
      }
  }
}

TEST(Synthetic, DeterministicAndRoundTrips) {
  SyntheticOptions o;
  o.days = 3;
  o.seed = 5;
  const auto a = generate_synthetic(six_bus(), o), b = generate_synthetic(six_bus(), o);
  EXPECT_EQ(a.load, b.load);
  EXPECT_EQ(a.wind, b.wind);
  o.seed = 6;
  EXPECT_NE(generate_synthetic(six_bus(), o).wind, a.wind);

  const auto dir = scratch("roundtrip");
  write_synthetic(a, six_bus(), (dir / "load.csv").string(), (dir / "wind.csv").string());
  const auto back = read_synthetic(six_bus(), (dir / "load.csv").string(), (dir / "wind.csv").string());
  ASSERT_EQ(back.hours(), a.hours());
  for (std::size_t h = 0; h < a.hours(); ++h) {
    EXPECT_NEAR(back.load[h], a.load[h], 1e-6);
    EXPECT_NEAR(back.wind[0][h], a.wind[0][h], 1e-6);
  }
}

TEST(Synthetic, RejectsBadPenetration) {
  for (double r : {0.0, 1.0, -0.2, 0.999999}) {
    SyntheticOptions o;
    o.penetration = r;
    EXPECT_THROW(generate_synthetic(six_bus(), o), Error) << r;
  }
}

TEST(ConfigFile, DefaultsOverridesAndErrors) {
  Config c;
  EXPECT_EQ(c.integer("days"), 31u);
  EXPECT_DOUBLE_EQ(c.number("c_ens"), 3500.0);
  const auto dir = scratch("config");
  {
    std::ofstream out(dir / "a.cfg");
    out << "# comment\n\nseed = 9   # trailing\nphi_fraction=0.05\n";
  }
  const auto f = Config::from_file((dir / "a.cfg").string());
  EXPECT_EQ(f.integer("seed"), 9u);
  EXPECT_DOUBLE_EQ(f.number("phi_fraction"), 0.05);
  EXPECT_THROW(c.set("no_such_key", "1"), Error);
  c.set("days", "abc");
  EXPECT_THROW(c.integer("days"), Error);
  {
    std::ofstream out(dir / "b.cfg");
    out << "seed 9\n";
  }
  EXPECT_THROW(Config::from_file((dir / "b.cfg").string()), Error);
  EXPECT_THROW(parse_method("simplex"), Error);
  EXPECT_THROW(parse_allocation("uniform"), Error);
  EXPECT_THROW(parse_intraday_model("imsar"), Error);
}

TEST(Intraday, ForecastChoiceFollowsConfig) {
  auto s = small_settings();
  const std::size_t now = s.warmup_days * 24 - 1;
  EXPECT_STREQ(variant_name(intraday_forecast(s, now)), "bayesian_ar1");
  s.intraday_model = parse_intraday_model("normal");
  EXPECT_STREQ(variant_name(intraday_forecast(s, now)), "normal_posterior_predictive");
  EXPECT_EQ(horizon(intraday_forecast(s, now)), s.block_hours);
}

TEST(Settings, ValidationRejectsBadValues) {
  auto s = small_settings();
  s.block_hours = 5;
  EXPECT_THROW(s.validate(), Error);
  s = small_settings();
  s.eval_scenarios = 5;
  EXPECT_THROW(s.validate(), Error);
  s = small_settings();
  s.days = 100;
  EXPECT_THROW(s.validate(), Error);
  s = small_settings();
  s.history_window = 200;
  EXPECT_THROW(s.validate(), Error);
}

void expect_accounting(const StudyReport& r) {
  const double ref = r.policy(r.reference).total;
  for (const auto& p : r.policies) {
    double t = 0.0, pen = 0.0;
    for (const auto& c : p.periods) {
      t += c.total;
      pen += c.penalty;
    }
    EXPECT_NEAR(p.total, t, 1e-9 * std::abs(t));
    EXPECT_NEAR(p.penalty, pen, 1e-9 * std::max(1.0, pen));
    EXPECT_DOUBLE_EQ(p.r_delta_g, (ref - p.total) / ref);
  }
  EXPECT_EQ(r.policy(r.reference).r_delta_g, 0.0);
}

TEST(DayAhead, ZeroSpreadGivesNoSaving) {
  auto s = small_settings(2);
  s.phi_fraction = 0.0;
  const auto r = run_day_ahead_study(s);
  EXPECT_EQ(r.policy("data_driven").total, r.policy("empirical").total);
  EXPECT_EQ(r.policy("data_driven").r_delta_g, 0.0);
  expect_accounting(r);
}

TEST(DayAhead, AccountingAndDeterminism) {
  auto s = small_settings(2);
  const auto a = run_day_ahead_study(s);
  expect_accounting(a);
  EXPECT_EQ(a.policy("data_driven").periods.size(), 2u);
  s.threads = 1;
  const auto b = run_day_ahead_study(s);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Intraday, ConstantWindMakesPoliciesAgree) {
  auto s = small_settings();
  for (auto& row : s.data.wind) std::fill(row.begin(), row.end(), 60.0);
  const auto r = run_intraday_study(s);
  ASSERT_EQ(r.policies.size(), 3u);
  EXPECT_EQ(r.policy("data_driven").periods.size(), 6u);
  const double det = r.policy("deterministic").total;
  EXPECT_NEAR(r.policy("data_driven").total, det, 1e-6 * det);
  EXPECT_NEAR(r.policy("empirical").total, det, 1e-6 * det);
  expect_accounting(r);
}

TEST(Opsel, ZeroBudgetMatchesSingleSolve) {
  auto s = small_settings();
  s.budget = 0;
  const auto r = run_opsel_study(s);
  EXPECT_EQ(r.policy("opsel").total, r.policy("single").total);
  EXPECT_EQ(r.policy("opsel").r_delta_g, 0.0);
}

TEST(Report, FilesAreDeterministicAndConsistent) {
  auto s = small_settings();
  const auto d1 = scratch("report1"), d2 = scratch("report2");
  const auto a = run_opsel_study(s);
  s.threads = 1;
  const auto b = run_opsel_study(s);
  expect_accounting(a);
  write_report(d1.string(), a);
  write_report(d2.string(), b);
  for (const char* f : {"report.json", "totals.csv", "scatter.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(d1 / f)) << f;
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(d1 / "timing.json"));
  EXPECT_EQ(a.scatter.size(), s.workers);

  // rΔG recomputed from the written totals.
  std::istringstream csv(slurp(d1 / "totals.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "policy,total_cost,penalty_cost,penalty_ratio,r_delta_g");
  std::map<std::string, std::vector<double>> rows;
  while (std::getline(csv, line)) {
    std::istringstream ls(line);
    std::string name, cell;
    std::getline(ls, name, ',');
    while (std::getline(ls, cell, ',')) rows[name].push_back(std::stod(cell));
  }
  ASSERT_EQ(rows.size(), 2u);
  const double ref = rows["single"][0];
  for (const auto& [name, v] : rows) {
    EXPECT_EQ(v[0], a.policy(name).total);
    EXPECT_EQ(v[3], (ref - v[0]) / ref);
  }
}

TEST(Report, ExactNumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 2654321.123456789, -1e-300, 0.0}) EXPECT_EQ(std::stod(exact(v)), v);
}

TEST(LpWriter, WritesAllSections) {
  LpInstance lp;
  lp.add_variable(1.5, 0.0, 1.0, "u");
  lp.add_variable(-2.0, 0.0, kInfinity, "p");
  lp.add_variable(0.0, -kInfinity, kInfinity, "f");
  lp.add_variable(1.0, 0.0, 5.0, "n");
  lp.add_row({{0, 3.0}, {1, -1.0}}, Sense::GreaterEqual, 0.0);
  lp.add_row({{1, 1.0}, {2, 1.0}}, Sense::Equal, 4.0);
  lp.add_row({{3, 1.0}}, Sense::LessEqual, 2.5);
  lp.offset = 7.0;
  std::ostringstream os;
  write_lp(os, lp, {0, 3});
  EXPECT_EQ(os.str(),
            "\\ offset 7\n"
            "Minimize\n obj: 1.5 u - 2 p + 1 n\n"
            "Subject To\n c1: 3 u - 1 p >= 0\n c2: 1 p + 1 f = 4\n c3: 1 n <= 2.5\n"
            "Bounds\n 0 <= p <= +inf\n f free\n 0 <= n <= 5\n"
            "Binaries\n u\n"
            "Generals\n n\n"
            "End\n");
}

}  // namespace
}  // namespace dduc
