#pragma once

#include <random>

#include "dduc/grid.hpp"
#include "dduc/suc.hpp"

namespace dduc::testing_support {

inline const PowerSystem& six_bus() {
  static const PowerSystem sys = [] {
    const std::string d = DDUC_DATA_DIR "/six_bus/";
    return load_system({d + "buses.csv", d + "units.csv", d + "lines.csv", d + "farms.csv"});
  }();
  return sys;
}

inline std::vector<double> six_bus_system_load(std::size_t hours, std::size_t start = 0) {
  // Smooth daily shape between roughly 185 and 300 MW.
  std::vector<double> out;
  for (std::size_t h = start; h < start + hours; ++h) {
    const double x = static_cast<double>(h % 24);
    out.push_back(240.0 - 55.0 * std::cos(2.0 * 3.14159265358979 * (x - 3.0) / 24.0));
  }
  return out;
}

inline UcContext six_bus_context(std::size_t hours, std::size_t start = 0, Prices prices = {}) {
  return UcContext(six_bus(), bus_loads(six_bus(), six_bus_system_load(hours, start)), prices);
}

inline std::vector<Trajectory> wind_scenarios(std::mt19937_64& rng, std::size_t count, std::size_t hours,
                                              double lo = 0.0, double hi = 200.0) {
  std::uniform_real_distribution<double> w(lo, hi);
  std::vector<Trajectory> out;
  for (std::size_t s = 0; s < count; ++s) {
    Trajectory t(1);
    for (std::size_t h = 0; h < hours; ++h) t[0].push_back(w(rng));
    out.push_back(t);
  }
  return out;
}

// Random schedule respecting minimum up/down times and the initial state.
inline CommitmentSchedule random_schedule(std::mt19937_64& rng, const UcContext& ctx) {
  CommitmentSchedule s;
  const auto& units = ctx.system->units();
  for (std::size_t i = 0; i < units.size(); ++i) {
    std::vector<int> row;
    int state = ctx.init_state[i];
    const int forced = forced_initial_hours(units[i], state);
    int hold = forced;
    int cur = state > 0 ? 1 : 0;
    for (std::size_t t = 0; t < ctx.horizon(); ++t) {
      if (hold > 0) {
        --hold;
      } else if (rng() % 4 == 0) {
        cur = 1 - cur;
        hold = (cur ? units[i].min_on : units[i].min_off) - 1;
      }
      row.push_back(cur);
    }
    s.u.push_back(row);
  }
  return s;
}

}  // namespace dduc::testing_support
