#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dduc/error.hpp"
#include "dduc/rng.hpp"

namespace dduc {

// [farm][hour]
using Trajectory = std::vector<std::vector<double>>;

struct NormalPlugIn {
  Trajectory mean;
  Trajectory sd;
};

struct NormalPosteriorPredictive {
  Trajectory mean;
  // Already inflated by sqrt(1 + 1/m).
  Trajectory sd;
  int m = 1;
};

struct PersistencePoint {
  Trajectory value;
};

struct PersistenceEmpirical {
  // support[farm][lead - 1] is a multiset; each value equally likely.
  std::vector<std::vector<std::vector<double>>> support;
};

// Per-farm AR(1) y' = a + b y + e fitted by least squares under the prior
// p(a, b, sigma^2) ~ 1 / sigma^2. Each sampled trajectory draws its own
// (sigma^2, a, b) from the posterior and runs the recursion from `last`.
struct BayesianAr1 {
  struct Farm {
    double last = 0.0;
    double a = 0.0, b = 0.0;
    // (X'X)^{-1} entries for (a, b).
    double v_aa = 0.0, v_ab = 0.0, v_bb = 0.0;
    double s2 = 0.0;
    int dof = 1;
  };
  std::vector<Farm> farms;
  std::size_t horizon = 0;
};

using ForecastModel =
    std::variant<NormalPlugIn, NormalPosteriorPredictive, PersistencePoint, PersistenceEmpirical, BayesianAr1>;

struct ScenarioSet {
  std::vector<Trajectory> scenarios;
  std::uint64_t seed = 0;
};

inline std::size_t num_farms(const ForecastModel& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PersistenceEmpirical>) return m.support.size();
        else if constexpr (std::is_same_v<T, BayesianAr1>) return m.farms.size();
        else if constexpr (std::is_same_v<T, PersistencePoint>) return m.value.size();
        else return m.mean.size();
      },
      model);
}

inline std::size_t horizon(const ForecastModel& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PersistenceEmpirical>) return m.support.empty() ? 0 : m.support[0].size();
        else if constexpr (std::is_same_v<T, BayesianAr1>) return m.horizon;
        else if constexpr (std::is_same_v<T, PersistencePoint>) return m.value.empty() ? 0 : m.value[0].size();
        else return m.mean.empty() ? 0 : m.mean[0].size();
      },
      model);
}

namespace detail {

// Mean over the last m of `days` (each [farm][hour]).
inline Trajectory window_mean(const std::vector<Trajectory>& days, int m) {
  if (m < 1 || days.size() < static_cast<std::size_t>(m))
    fail(ErrorKind::InsufficientHistory,
         "need " + std::to_string(m) + " historical days, have " + std::to_string(days.size()));
  const auto& last = days.back();
  Trajectory mean(last.size());
  for (std::size_t f = 0; f < last.size(); ++f) {
    mean[f].assign(last[f].size(), 0.0);
    for (std::size_t d = days.size() - m; d < days.size(); ++d) {
      if (days[d].size() != last.size() || days[d][f].size() != last[f].size())
        fail(ErrorKind::DimensionMismatch, "historical days differ in shape");
      for (std::size_t h = 0; h < last[f].size(); ++h) mean[f][h] += days[d][f][h];
    }
    for (auto& v : mean[f]) v /= m;
  }
  return mean;
}

inline void check_phi(const Trajectory& mean, const Trajectory& phi) {
  if (phi.size() != mean.size()) fail(ErrorKind::DimensionMismatch, "phi farm count differs from history");
  for (std::size_t f = 0; f < phi.size(); ++f) {
    if (phi[f].size() != mean[f].size()) fail(ErrorKind::DimensionMismatch, "phi horizon differs from history");
    for (double v : phi[f])
      if (!(v >= 0.0)) fail(ErrorKind::InvalidValue, "phi must be nonnegative");
  }
}

inline void check_series(const Trajectory& series, std::size_t now) {
  if (series.empty()) fail(ErrorKind::InsufficientHistory, "no farms in history");
  for (const auto& s : series)
    if (s.size() <= now) fail(ErrorKind::InsufficientHistory, "history ends before the decision hour");
}

}  // namespace detail

// history: previous days, oldest first; the last m are used.
inline NormalPlugIn fit_plug_in(const std::vector<Trajectory>& history, int m, const Trajectory& phi) {
  NormalPlugIn model{detail::window_mean(history, m), phi};
  detail::check_phi(model.mean, phi);
  return model;
}

inline NormalPosteriorPredictive fit_posterior_predictive(const std::vector<Trajectory>& history, int m,
                                                          const Trajectory& phi) {
  NormalPosteriorPredictive model{detail::window_mean(history, m), phi, m};
  detail::check_phi(model.mean, phi);
  const double inflate = std::sqrt(1.0 + 1.0 / m);
  for (auto& row : model.sd)
    for (auto& v : row) v *= inflate;
  return model;
}

// series[farm][hour]; `now` is the index of the latest observation.
inline PersistencePoint fit_persistence_point(const Trajectory& series, std::size_t now, std::size_t horizon) {
  detail::check_series(series, now);
  PersistencePoint model;
  for (const auto& s : series) model.value.emplace_back(horizon, s[now]);
  return model;
}

// Lead-i support {x[now] - x[now-j] + x[now-j-i] : j = 0 .. min(now-i-1, window-1)}, clamped to [0, capacity].
inline std::vector<double> persistence_support(const std::vector<double>& series, std::size_t now, std::size_t lead,
                                               std::size_t window, double capacity) {
  if (now >= series.size()) fail(ErrorKind::InsufficientHistory, "history ends before the decision hour");
  if (lead < 1 || now < lead + 1)
    fail(ErrorKind::InsufficientHistory, "no lead-" + std::to_string(lead) + " increments before hour " +
                                             std::to_string(now));
  const std::size_t last_j = std::min(now - lead - 1, window - 1);
  std::vector<double> out;
  for (std::size_t j = 0; j <= last_j; ++j)
    out.push_back(std::clamp(series[now] - series[now - j] + series[now - j - lead], 0.0, capacity));
  return out;
}

inline PersistenceEmpirical fit_persistence_empirical(const Trajectory& series, std::size_t now, std::size_t horizon,
                                                      std::size_t window, const std::vector<double>& capacity) {
  detail::check_series(series, now);
  if (window < 1) fail(ErrorKind::InvalidValue, "window must be >= 1");
  PersistenceEmpirical model;
  for (std::size_t f = 0; f < series.size(); ++f) {
    model.support.emplace_back();
    for (std::size_t i = 1; i <= horizon; ++i)
      model.support.back().push_back(persistence_support(series[f], now, i, window, capacity.at(f)));
  }
  return model;
}

// Normal predictive centred on the latest observation. The lead-i spread is
// the RMS of lead-i persistence errors inside the window, and m counts the
// non-overlapping lead-i errors it contains.
inline NormalPosteriorPredictive fit_persistence_normal(const Trajectory& series, std::size_t now, std::size_t horizon,
                                                        std::size_t window) {
  detail::check_series(series, now);
  NormalPosteriorPredictive model;
  model.m = 0;
  for (const auto& s : series) {
    model.mean.emplace_back(horizon, s[now]);
    model.sd.emplace_back();
    for (std::size_t i = 1; i <= horizon; ++i) {
      if (now < i + 1) fail(ErrorKind::InsufficientHistory, "no persistence errors for lead " + std::to_string(i));
      const std::size_t last_j = std::min(now - i - 1, window - 1);
      double ss = 0.0;
      for (std::size_t j = 0; j <= last_j; ++j) {
        const double e = s[now - j] - s[now - j - i];
        ss += e * e;
      }
      const double count = static_cast<double>(last_j + 1);
      const int m_eff = std::max(1, static_cast<int>(std::floor(count / static_cast<double>(i))));
      model.sd.back().push_back(std::sqrt(ss / count) * std::sqrt(1.0 + 1.0 / m_eff));
      if (model.m == 0 || m_eff < model.m) model.m = m_eff;
    }
  }
  return model;
}

// Regresses x[t] on x[t-1] over the `window` pairs ending at `now`.
inline BayesianAr1 fit_bayesian_ar1(const Trajectory& series, std::size_t now, std::size_t horizon,
                                    std::size_t window) {
  detail::check_series(series, now);
  if (window < 3) fail(ErrorKind::InvalidValue, "window must be >= 3");
  if (now < 3) fail(ErrorKind::InsufficientHistory, "need at least three transitions");
  const std::size_t n = std::min(window, now);
  BayesianAr1 model;
  model.horizon = horizon;
  for (const auto& x : series) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t t = now + 1 - n; t <= now; ++t) {
      sx += x[t - 1];
      sy += x[t];
      sxx += x[t - 1] * x[t - 1];
      sxy += x[t - 1] * x[t];
    }
    const double N = static_cast<double>(n);
    BayesianAr1::Farm f;
    f.last = x[now];
    double det = N * sxx - sx * sx;
    if (det <= 1e-12 * (1.0 + N * sxx)) {
      // Flat history: the slope is unidentified, so fall back to persistence.
      f.a = 0.0;
      f.b = 1.0;
      det = 0.0;
    } else {
      f.b = (N * sxy - sx * sy) / det;
      f.a = (sy - f.b * sx) / N;
      f.v_aa = sxx / det;
      f.v_ab = -sx / det;
      f.v_bb = N / det;
    }
    double sse = 0.0;
    for (std::size_t t = now + 1 - n; t <= now; ++t) {
      const double e = x[t] - f.a - f.b * x[t - 1];
      sse += e * e;
    }
    f.dof = static_cast<int>(n) - 2;
    f.s2 = sse / f.dof;
    model.farms.push_back(f);
  }
  return model;
}

// Reproducible i.i.d. trajectories; hours are independent and values are
// clamped to [0, capacity[farm]].
inline ScenarioSet sample_scenarios(const ForecastModel& model, std::size_t count, std::uint64_t seed,
                                    const std::vector<double>& capacity) {
  if (count < 1) fail(ErrorKind::InvalidValue, "scenario count must be >= 1");
  const std::size_t farms = num_farms(model), hours = horizon(model);
  if (capacity.size() != farms) fail(ErrorKind::DimensionMismatch, "capacity vector does not match farms");
  ScenarioSet set;
  set.seed = seed;
  SplitMix64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  if (const auto* ar = std::get_if<BayesianAr1>(&model)) {
    for (std::size_t s = 0; s < count; ++s) {
      Trajectory traj(farms, std::vector<double>(hours, 0.0));
      for (std::size_t f = 0; f < farms; ++f) {
        const auto& p = ar->farms[f];
        std::chi_squared_distribution<double> chi(p.dof);
        const double sigma2 = p.s2 > 0.0 ? p.dof * p.s2 / chi(rng) : 0.0;
        // Cholesky of sigma2 * V.
        const double l11 = std::sqrt(sigma2 * p.v_aa);
        const double l21 = l11 > 0.0 ? sigma2 * p.v_ab / l11 : 0.0;
        const double l22 = std::sqrt(std::max(0.0, sigma2 * p.v_bb - l21 * l21));
        const double z1 = z(rng), z2 = z(rng);
        const double a = p.a + l11 * z1, b = p.b + l21 * z1 + l22 * z2;
        const double sd = std::sqrt(sigma2);
        double y = p.last;
        for (std::size_t h = 0; h < hours; ++h) {
          y = std::clamp(a + b * y + sd * z(rng), 0.0, capacity[f]);
          traj[f][h] = y;
        }
      }
      set.scenarios.push_back(std::move(traj));
    }
    return set;
  }
  for (std::size_t s = 0; s < count; ++s) {
    Trajectory traj(farms, std::vector<double>(hours, 0.0));
    for (std::size_t f = 0; f < farms; ++f)
      for (std::size_t h = 0; h < hours; ++h) {
        double v = std::visit(
            [&](const auto& m) -> double {
              using T = std::decay_t<decltype(m)>;
              if constexpr (std::is_same_v<T, BayesianAr1>) {
                return 0.0;
              } else if constexpr (std::is_same_v<T, PersistencePoint>) {
                return m.value[f][h];
              } else if constexpr (std::is_same_v<T, PersistenceEmpirical>) {
                const auto& sup = m.support[f][h];
                return sup[std::uniform_int_distribution<std::size_t>(0, sup.size() - 1)(rng)];
              } else {
                const double draw = z(rng);
                return m.mean[f][h] + m.sd[f][h] * draw;
              }
            },
            model);
        traj[f][h] = std::clamp(v, 0.0, capacity[f]);
      }
    set.scenarios.push_back(std::move(traj));
  }
  return set;
}

inline const char* variant_name(const ForecastModel& model) {
  switch (model.index()) {
    case 0: return "normal_plug_in";
    case 1: return "normal_posterior_predictive";
    case 2: return "persistence_point";
    case 3: return "persistence_empirical";
    default: return "bayesian_ar1";
  }
}

inline nlohmann::json describe(const ForecastModel& model, std::uint64_t seed) {
  nlohmann::json j;
  j["variant"] = variant_name(model);
  j["seed"] = seed;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BayesianAr1>) {
          // Point-estimate recursion and its conditional spread.
          Trajectory mean, sd;
          for (const auto& p : m.farms) {
            mean.emplace_back();
            sd.emplace_back();
            double y = p.last, v = 0.0;
            for (std::size_t h = 0; h < m.horizon; ++h) {
              y = p.a + p.b * y;
              v = p.b * p.b * v + p.s2;
              mean.back().push_back(y);
              sd.back().push_back(std::sqrt(v));
            }
          }
          j["mean"] = mean;
          j["sd"] = sd;
          j["m"] = m.farms.empty() ? 0 : m.farms[0].dof + 2;
        } else if constexpr (std::is_same_v<T, PersistencePoint>) {
          j["mean"] = m.value;
          j["sd"] = Trajectory(m.value.size(), std::vector<double>(m.value.empty() ? 0 : m.value[0].size(), 0.0));
          j["m"] = 1;
        } else if constexpr (std::is_same_v<T, PersistenceEmpirical>) {
          Trajectory mean, sd;
          for (const auto& farm : m.support) {
            mean.emplace_back();
            sd.emplace_back();
            for (const auto& sup : farm) {
              double mu = 0.0, ss = 0.0;
              for (double v : sup) mu += v;
              mu /= static_cast<double>(sup.size());
              for (double v : sup) ss += (v - mu) * (v - mu);
              mean.back().push_back(mu);
              sd.back().push_back(std::sqrt(ss / static_cast<double>(sup.size())));
            }
          }
          j["mean"] = mean;
          j["sd"] = sd;
          j["m"] = m.support.empty() || m.support[0].empty() ? 0 : m.support[0][0].size();
        } else {
          j["mean"] = m.mean;
          j["sd"] = m.sd;
          if constexpr (std::is_same_v<T, NormalPosteriorPredictive>) j["m"] = m.m;
          else j["m"] = nullptr;
        }
      },
      model);
  return j;
}

}  // namespace dduc
