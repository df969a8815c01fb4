#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dduc/error.hpp"
#include "dduc/forecast.hpp"
#include "dduc/grid.hpp"
#include "dduc/rng.hpp"

namespace dduc {

struct SyntheticOptions {
  std::size_t days = 36;
  double penetration = 0.378;
  std::uint64_t seed = 1;
  // Daily mean and half swing of system load, MW.
  double load_mean = 240.0;
  double load_swing = 55.0;
  double wind_rho = 0.9;
  double wind_sigma = 1.2;
};

struct SyntheticData {
  // System load per hour.
  std::vector<double> load;
  // [farm][hour]
  Trajectory wind;
  double offset = 0.0;

  std::size_t hours() const { return load.size(); }
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Trajectory wind_from_latent(const std::vector<std::vector<double>>& latent, const std::vector<double>& cap,
                                   double offset) {
  Trajectory w(latent.size());
  for (std::size_t f = 0; f < latent.size(); ++f)
    for (double z : latent[f]) w[f].push_back(cap[f] * logistic(offset + z));
  return w;
}

}  // namespace detail

// Diurnal load with weekly and AR(1) variation, and per-farm logistic AR(1)
// wind whose level is set by bisection so that wind_penetration hits the target.
inline SyntheticData generate_synthetic(const PowerSystem& sys, const SyntheticOptions& opt) {
  if (!(opt.penetration > 0.0 && opt.penetration < 1.0))
    fail(ErrorKind::InvalidPenetration, "penetration must lie in (0, 1)");
  if (opt.days == 0) fail(ErrorKind::InvalidValue, "need at least one day");
  if (sys.farms().empty()) fail(ErrorKind::InvalidPenetration, "system has no wind farms");
  const std::size_t H = opt.days * 24;
  SplitMix64 rng(mix_seed(opt.seed, 0x10AD));
  std::normal_distribution<double> z(0.0, 1.0);

  double floor_load = 0.0;
  for (const auto& u : sys.units()) floor_load += u.p_min;
  SyntheticData d;
  double noise = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    const double x = static_cast<double>(h % 24), day = static_cast<double>(h / 24);
    noise = 0.8 * noise + 0.6 * z(rng);
    const double weekly = 1.0 + 0.04 * std::sin(2.0 * std::numbers::pi * day / 7.0);
    const double base = opt.load_mean - opt.load_swing * std::cos(2.0 * std::numbers::pi * (x - 3.0) / 24.0);
    d.load.push_back(std::max(1.05 * floor_load, base * weekly * (1.0 + 0.015 * noise)));
  }

  const auto cap = sys.farm_capacities();
  std::vector<std::vector<double>> latent(cap.size());
  for (std::size_t f = 0; f < cap.size(); ++f) {
    SplitMix64 wr(mix_seed(opt.seed, 0x3140, f));
    double a = opt.wind_sigma * z(wr);
    const double innov = opt.wind_sigma * std::sqrt(1.0 - opt.wind_rho * opt.wind_rho);
    for (std::size_t h = 0; h < H; ++h) {
      const double x = static_cast<double>(h % 24);
      latent[f].push_back(a + 0.4 * std::cos(2.0 * std::numbers::pi * (x - 2.0) / 24.0));
      a = opt.wind_rho * a + innov * z(wr);
    }
  }
  const std::vector<std::vector<double>> load_rows{d.load};
  auto pen = [&](double off) { return wind_penetration(detail::wind_from_latent(latent, cap, off), load_rows); };
  double lo = -30.0, hi = 30.0;
  if (pen(lo) > opt.penetration || pen(hi) < opt.penetration)
    fail(ErrorKind::InvalidPenetration, "penetration " + std::to_string(opt.penetration) + " is out of reach");
  for (int it = 0; it < 200 && std::abs(pen(0.5 * (lo + hi)) - opt.penetration) > 1e-9 * opt.penetration; ++it)
    (pen(0.5 * (lo + hi)) < opt.penetration ? lo : hi) = 0.5 * (lo + hi);
  d.offset = 0.5 * (lo + hi);
  d.wind = detail::wind_from_latent(latent, cap, d.offset);
  return d;
}

inline void write_synthetic(const SyntheticData& d, const PowerSystem& sys, const std::string& load_path,
                            const std::string& wind_path) {
  std::ofstream lo(load_path), wo(wind_path);
  if (!lo) fail(ErrorKind::InvalidValue, "cannot write " + load_path);
  if (!wo) fail(ErrorKind::InvalidValue, "cannot write " + wind_path);
  char buf[64];
  lo << "hour,load\n";
  wo << "hour";
  for (const auto& f : sys.farms()) wo << ',' << f.id;
  wo << '\n';
  for (std::size_t h = 0; h < d.hours(); ++h) {
    std::snprintf(buf, sizeof buf, "%.6f", d.load[h]);
    lo << h + 1 << ',' << buf << '\n';
    wo << h + 1;
    for (const auto& row : d.wind) {
      std::snprintf(buf, sizeof buf, "%.6f", row[h]);
      wo << ',' << buf;
    }
    wo << '\n';
  }
}

inline SyntheticData read_synthetic(const PowerSystem& sys, const std::string& load_path, const std::string& wind_path) {
  const auto load = read_series(load_path), wind = read_series(wind_path);
  if (load.values.size() != 1) fail(ErrorKind::InvalidValue, load_path + ": expected a single load column");
  if (wind.values.size() != sys.farms().size()) fail(ErrorKind::DimensionMismatch, wind_path + ": farm count differs");
  if (wind.hours() != load.hours()) fail(ErrorKind::DimensionMismatch, "load and wind series differ in length");
  if (load.hours() % 24 != 0) fail(ErrorKind::InvalidValue, "series must cover whole days");
  SyntheticData d;
  d.load = load.values[0];
  for (const auto& f : sys.farms()) {
    const auto it = std::find(wind.names.begin(), wind.names.end(), f.id);
    if (it == wind.names.end()) fail(ErrorKind::MissingColumn, wind_path + ": no column for farm " + f.id);
    d.wind.push_back(wind.values[static_cast<std::size_t>(it - wind.names.begin())]);
  }
  return d;
}

}  // namespace dduc
