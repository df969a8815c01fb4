#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "dduc/grid.hpp"
#include "oracles.hpp"

namespace dduc {
namespace {

SystemFiles six_bus_files() {
  const std::string d = DDUC_DATA_DIR "/six_bus/";
  return {d + "buses.csv", d + "units.csv", d + "lines.csv", d + "farms.csv"};
}

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("dduc_grid_" + name);
  std::ofstream(path) << body;
  return path.string();
}

TEST(Grid, LoadsSixBusSystem) {
  const auto sys = load_system(six_bus_files());
  EXPECT_EQ(sys.buses().size(), 6u);
  EXPECT_EQ(sys.units().size(), 3u);
  EXPECT_EQ(sys.farms().size(), 1u);
  ASSERT_EQ(sys.lines().size(), 7u);
  EXPECT_EQ(sys.lines()[1].from_bus, 1);
  EXPECT_EQ(sys.lines()[1].to_bus, 4);
  EXPECT_DOUBLE_EQ(sys.lines()[1].reactance, 0.258);
  EXPECT_DOUBLE_EQ(sys.lines()[1].flow_limit, 100.0);
  EXPECT_EQ(sys.units()[0].min_off, 4);
  EXPECT_EQ(sys.slack_bus(), 1);
  for (Eigen::Index l = 0; l < sys.ptdf().rows(); ++l) EXPECT_EQ(sys.ptdf()(l, 0), 0.0);
}

TEST(Grid, TwoBusPtdf) {
  const auto p = compute_ptdf({{1, 0.5}, {2, 0.5}}, {{1, 1, 2, 0.1, 50}}, 1);
  ASSERT_EQ(p.rows(), 1);
  EXPECT_DOUBLE_EQ(p(0, 0), 0.0);
  EXPECT_NEAR(p(0, 1), -1.0, 1e-12);
}

TEST(Grid, TrianglePtdfSplitsTwoToOne) {
  const std::vector<TransmissionLine> lines{{1, 1, 2, 0.1, 50}, {2, 2, 3, 0.1, 50}, {3, 3, 1, 0.1, 50}};
  const auto p = compute_ptdf({{1, 0.3}, {2, 0.3}, {3, 0.4}}, lines, 1);
  EXPECT_NEAR(std::abs(p(0, 1)), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(std::abs(p(1, 1)), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(std::abs(p(2, 1)), 1.0 / 3.0, 1e-12);
}

TEST(Grid, SingleBusHasEmptyPtdf) {
  const PowerSystem sys({{1, 1.0}}, {{"G", 1, 0, 10, 1, 1, 1, 1, 1, 0, 0, 0, 1}}, {}, {});
  EXPECT_EQ(sys.ptdf().rows(), 0);
  EXPECT_EQ(sys.ptdf().cols(), 1);
}

TEST(Grid, RandomNetworksMatchDirectSolve) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(0.01, 0.5), inj(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 11;
    std::vector<Bus> buses;
    for (int b = 1; b <= n; ++b) buses.push_back({b, 1.0 / n});
    std::vector<TransmissionLine> lines;
    int id = 1;
    for (int b = 2; b <= n; ++b) lines.push_back({id++, static_cast<int>(1 + rng() % (b - 1)), b, x(rng), 100});
    for (int extra = 0; extra < n / 2; ++extra) {
      const int f = static_cast<int>(1 + rng() % n), t = static_cast<int>(1 + rng() % n);
      if (f != t) lines.push_back({id++, f, t, x(rng), 100});
    }
    const std::size_t slack = rng() % n;
    const auto p = compute_ptdf(buses, lines, static_cast<int>(slack) + 1);
    std::vector<double> injection(n);
    double total = 0.0;
    for (int b = 0; b < n; ++b) {
      if (b == static_cast<int>(slack)) continue;
      injection[b] = inj(rng);
      total += injection[b];
    }
    injection[slack] = -total;
    const auto ref = oracle::direct_flows(buses, lines, injection, slack);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      double f = 0.0;
      for (int b = 0; b < n; ++b) f += p(static_cast<Eigen::Index>(l), b) * injection[b];
      EXPECT_NEAR(f, ref[l], 1e-9) << "trial " << trial;
      EXPECT_EQ(p(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(slack)), 0.0);
    }
  }
}

TEST(Grid, PtdfIsLinearInInjections) {
  const auto sys = load_system(six_bus_files());
  const Eigen::VectorXd p = (Eigen::VectorXd(6) << 10, -3, 4, 0, -7, 2).finished();
  const Eigen::VectorXd q = (Eigen::VectorXd(6) << -1, 5, 0, 8, 2, -6).finished();
  const Eigen::VectorXd lhs = sys.ptdf() * (2.5 * p - 1.5 * q);
  const Eigen::VectorXd rhs = 2.5 * (sys.ptdf() * p) - 1.5 * (sys.ptdf() * q);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Grid, SlackChoiceDoesNotChangeBalancedFlows) {
  const auto a = load_system(six_bus_files(), 1);
  const auto b = load_system(six_bus_files(), 5);
  const Eigen::VectorXd inj = (Eigen::VectorXd(6) << 100, 40, -60, 10, -110, 20).finished();
  EXPECT_LT((a.ptdf() * inj - b.ptdf() * inj).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Grid, FuelLinearizationValues) {
  const auto sys = load_system(six_bus_files());
  const auto& g3 = sys.units()[2];
  // Independent chord: slope through both endpoints of the quadratic.
  auto chord = [](double a, double b, double c, double lo, double hi) {
    const double flo = a + b * lo + c * lo * lo, fhi = a + b * hi + c * hi * hi;
    const double slope = (fhi - flo) / (hi - lo);
    return std::pair{flo - slope * lo, slope};
  };
  const auto [g3_min, g3_avg] = chord(137.4, 17.6, 0.005, 10, 30);
  EXPECT_NEAR(g3.fuel(10), 313.9, 1e-9);
  EXPECT_NEAR(g3.fuel(30), 669.9, 1e-9);
  EXPECT_NEAR(sys.fuel(2).f_avg, g3_avg, 1e-12);
  EXPECT_NEAR(sys.fuel(2).f_avg, 17.8, 1e-12);
  EXPECT_NEAR(sys.fuel(2).f_min, g3_min, 1e-9);
  EXPECT_NEAR(sys.fuel(2).f_min, 135.9, 1e-9);
  EXPECT_NEAR(sys.fuel(0).f_avg, 13.624, 1e-12);
  EXPECT_NEAR(sys.fuel(0).f_min, 168.98, 1e-9);
  for (std::size_t i = 0; i < sys.units().size(); ++i) {
    const auto& u = sys.units()[i];
    const auto f = sys.fuel(i);
    EXPECT_LT(std::abs(f.f_min + f.f_avg * u.p_min - u.fuel(u.p_min)), 1e-9);
    EXPECT_LT(std::abs(f.f_min + f.f_avg * u.p_max - u.fuel(u.p_max)), 1e-9);
    for (int k = 0; k <= 20; ++k) {
      const double p = u.p_min + (u.p_max - u.p_min) * k / 20.0;
      EXPECT_GE(f.f_min + f.f_avg * p, u.fuel(p) - 1e-9);
    }
  }
}

TEST(Grid, LinearFuelCurveIsUnchanged) {
  ThermalUnit u;
  u.fuel_a = 50;
  u.fuel_b = 12;
  u.p_min = 5;
  u.p_max = 40;
  const auto f = linearize_fuel(u);
  EXPECT_NEAR(f.f_avg, 12.0, 1e-12);
  EXPECT_NEAR(f.f_min, 50.0, 1e-12);
  u.fuel_c = 0.1;
  u.p_max = 5;
  EXPECT_NEAR(linearize_fuel(u).f_avg, 12.0 + 2 * 0.1 * 5, 1e-12);
}

TEST(Grid, DetectsDisconnectedNetwork) {
  auto f = six_bus_files();
  f.lines = write_temp("lines_cut.csv",
                       "id,from_bus,to_bus,reactance,flow_limit\n1,1,2,0.17,200\n2,1,4,0.258,100\n3,2,4,0.197,100\n"
                       "5,2,3,0.037,200\n7,5,6,0.018,200\n");
  try {
    load_system(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DisconnectedNetwork);
  }
}

TEST(Grid, ReportsMissingColumnAndBadValues) {
  auto f = six_bus_files();
  f.buses = write_temp("buses_nocol.csv", "id,share\n1,1\n");
  try {
    load_system(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingColumn);
    EXPECT_NE(std::string(e.what()).find("load_share"), std::string::npos);
  }
  f = six_bus_files();
  f.buses = write_temp("buses_dup.csv", "id,load_share\n1,0.5\n1,0.5\n");
  try {
    load_system(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateId);
  }
  f = six_bus_files();
  f.lines = write_temp("lines_bad.csv", "id,from_bus,to_bus,reactance,flow_limit\n1,1,2,abc,200\n");
  try {
    load_system(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidValue);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Grid, WindPenetration) {
  EXPECT_DOUBLE_EQ(wind_penetration({{0, 0, 0}}, {{1, 2, 3}}), 0.0);
  EXPECT_DOUBLE_EQ(wind_penetration({{1, 2, 3}}, {{1, 2, 3}}), 1.0);
  EXPECT_DOUBLE_EQ(wind_penetration({{1, 1}, {1, 1}}, {{2, 2}, {4, 0}}), 0.5);
  EXPECT_THROW(wind_penetration({{1}}, {{0}}), Error);
  EXPECT_THROW(wind_penetration({{1, 2}}, {{1}}), Error);
}

}  // namespace
}  // namespace dduc
