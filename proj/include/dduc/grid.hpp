#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "dduc/csv.hpp"
#include "dduc/error.hpp"

namespace dduc {

struct Bus {
  int id = 0;
  double load_share = 0.0;
};

struct ThermalUnit {
  std::string id;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  int min_on = 1;
  int min_off = 1;
  // Hours on (> 0) or off (< 0) before the first period.
  int init_state = 1;
  double fuel_a = 0.0;
  double fuel_b = 0.0;
  double fuel_c = 0.0;
  double startup_fuel = 0.0;
  double shutdown_fuel = 0.0;
  double fuel_price = 0.0;

  double fuel(double p) const { return fuel_a + fuel_b * p + fuel_c * p * p; }
};

struct WindFarm {
  std::string id;
  int bus = 0;
  // Installed capacity in MW; bounds sampled wind.
  double capacity = std::numeric_limits<double>::infinity();
};

struct TransmissionLine {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;
  double flow_limit = 0.0;
};

struct FuelLinearization {
  double f_min = 0.0;
  double f_avg = 0.0;
};

// Chord of the quadratic fuel curve between p_min and p_max.
inline FuelLinearization linearize_fuel(const ThermalUnit& u) {
  FuelLinearization f;
  if (u.p_max > u.p_min) f.f_avg = (u.fuel(u.p_max) - u.fuel(u.p_min)) / (u.p_max - u.p_min);
  else f.f_avg = u.fuel_b + 2.0 * u.fuel_c * u.p_min;
  f.f_min = u.fuel(u.p_min) - f.f_avg * u.p_min;
  return f;
}

// Rows are lines, columns are buses in ascending id order. Entry (l, b) is
// the flow on l (from -> to positive) per MW injected at b and withdrawn at
// the slack bus.
inline Eigen::MatrixXd compute_ptdf(const std::vector<Bus>& buses, const std::vector<TransmissionLine>& lines,
                                    int slack_bus) {
  const auto n = static_cast<Eigen::Index>(buses.size());
  std::map<int, Eigen::Index> col;
  for (Eigen::Index k = 0; k < n; ++k) col[buses[k].id] = k;
  if (!col.count(slack_bus)) fail(ErrorKind::InvalidValue, "slack bus " + std::to_string(slack_bus) + " not found");
  const Eigen::Index s = col[slack_bus];

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& l : lines) {
    if (!(l.reactance > 0.0)) fail(ErrorKind::InvalidValue, "line " + std::to_string(l.id) + " reactance must be > 0");
    const auto f = col.at(l.from_bus), t = col.at(l.to_bus);
    const double y = 1.0 / l.reactance;
    b(f, f) += y;
    b(t, t) += y;
    b(f, t) -= y;
    b(t, f) -= y;
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != s) keep.push_back(k);
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd reduced(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) reduced(i, j) = b(keep[i], keep[j]);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  if (r > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
    if (lu.rank() < r) fail(ErrorKind::SingularSusceptanceMatrix, "reduced susceptance matrix is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) x(keep[i], keep[j]) = inv(i, j);
  }

  Eigen::MatrixXd ptdf(static_cast<Eigen::Index>(lines.size()), n);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& l = lines[li];
    const auto f = col.at(l.from_bus), t = col.at(l.to_bus);
    for (Eigen::Index k = 0; k < n; ++k)
      ptdf(static_cast<Eigen::Index>(li), k) = (x(f, k) - x(t, k)) / l.reactance;
  }
  return ptdf;
}

class PowerSystem {
 public:
  // Validates everything and computes the PTDF. slack defaults to the lowest bus id.
  PowerSystem(std::vector<Bus> buses, std::vector<ThermalUnit> units, std::vector<WindFarm> farms,
              std::vector<TransmissionLine> lines, std::optional<int> slack = std::nullopt)
      : buses_(std::move(buses)), units_(std::move(units)), farms_(std::move(farms)), lines_(std::move(lines)) {
    std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
    validate();
    slack_ = slack.value_or(buses_.front().id);
    if (!bus_col_.count(slack_)) fail(ErrorKind::InvalidValue, "slack bus " + std::to_string(slack_) + " not found");
    check_connected();
    ptdf_ = compute_ptdf(buses_, lines_, slack_);
    for (const auto& u : units_) fuel_.push_back(linearize_fuel(u));
  }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<ThermalUnit>& units() const { return units_; }
  const std::vector<WindFarm>& farms() const { return farms_; }
  const std::vector<TransmissionLine>& lines() const { return lines_; }
  int slack_bus() const { return slack_; }
  const Eigen::MatrixXd& ptdf() const { return ptdf_; }
  const FuelLinearization& fuel(std::size_t unit) const { return fuel_[unit]; }

  std::size_t bus_index(int bus_id) const { return bus_col_.at(bus_id); }

  std::vector<double> farm_capacities() const {
    std::vector<double> c;
    for (const auto& f : farms_) c.push_back(f.capacity);
    return c;
  }

  // PTDF entry of line l for the bus hosting an injection.
  double shift(std::size_t line, int bus_id) const {
    return ptdf_(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(bus_index(bus_id)));
  }

 private:
  void validate() {
    if (buses_.empty()) fail(ErrorKind::InvalidValue, "system has no buses");
    double share = 0.0;
    for (std::size_t k = 0; k < buses_.size(); ++k) {
      const auto& b = buses_[k];
      if (bus_col_.count(b.id)) fail(ErrorKind::DuplicateId, "bus " + std::to_string(b.id));
      bus_col_[b.id] = k;
      if (!(b.load_share >= 0.0 && b.load_share <= 1.0))
        fail(ErrorKind::InvalidValue, "bus " + std::to_string(b.id) + " load_share outside [0,1]");
      share += b.load_share;
    }
    for (std::size_t k = 0; k < buses_.size(); ++k)
      if (buses_[k].id != buses_.front().id + static_cast<int>(k))
        fail(ErrorKind::InvalidValue, "bus ids must be contiguous");
    if (std::abs(share - 1.0) > 1e-9) fail(ErrorKind::InvalidValue, "load shares sum to " + std::to_string(share));

    std::set<std::string> seen;
    for (const auto& u : units_) {
      const std::string tag = "unit " + u.id;
      if (!seen.insert(u.id).second) fail(ErrorKind::DuplicateId, tag);
      if (!bus_col_.count(u.bus)) fail(ErrorKind::InvalidValue, tag + " references unknown bus");
      if (!(u.p_min >= 0.0 && u.p_min <= u.p_max)) fail(ErrorKind::InvalidValue, tag + " needs 0 <= p_min <= p_max");
      if (u.min_on < 1 || u.min_off < 1) fail(ErrorKind::InvalidValue, tag + " min_on/min_off must be >= 1");
      if (u.init_state == 0) fail(ErrorKind::InvalidValue, tag + " init_state must be nonzero");
      if (u.fuel_price < 0.0 || u.startup_fuel < 0.0 || u.shutdown_fuel < 0.0)
        fail(ErrorKind::InvalidValue, tag + " has negative price or transition fuel");
      // A quadratic attains its minimum over an interval at an endpoint or the vertex.
      double lowest = std::min(u.fuel(u.p_min), u.fuel(u.p_max));
      if (u.fuel_c > 0.0) {
        const double v = -u.fuel_b / (2.0 * u.fuel_c);
        if (v > u.p_min && v < u.p_max) lowest = std::min(lowest, u.fuel(v));
      }
      if (lowest < 0.0) fail(ErrorKind::InvalidValue, tag + " fuel curve negative on [p_min, p_max]");
    }
    seen.clear();
    for (const auto& f : farms_) {
      if (!seen.insert(f.id).second) fail(ErrorKind::DuplicateId, "farm " + f.id);
      if (!bus_col_.count(f.bus)) fail(ErrorKind::InvalidValue, "farm " + f.id + " references unknown bus");
      if (!(f.capacity > 0.0)) fail(ErrorKind::InvalidValue, "farm " + f.id + " capacity must be > 0");
    }
    std::set<int> line_ids;
    for (const auto& l : lines_) {
      const std::string tag = "line " + std::to_string(l.id);
      if (!line_ids.insert(l.id).second) fail(ErrorKind::DuplicateId, tag);
      if (!bus_col_.count(l.from_bus) || !bus_col_.count(l.to_bus))
        fail(ErrorKind::InvalidValue, tag + " references unknown bus");
      if (l.from_bus == l.to_bus) fail(ErrorKind::InvalidValue, tag + " connects a bus to itself");
      if (!(l.reactance > 0.0)) fail(ErrorKind::InvalidValue, tag + " reactance must be > 0");
      if (!(l.flow_limit > 0.0)) fail(ErrorKind::InvalidValue, tag + " flow_limit must be > 0");
    }
  }

  void check_connected() const {
    std::vector<std::vector<std::size_t>> adj(buses_.size());
    for (const auto& l : lines_) {
      adj[bus_col_.at(l.from_bus)].push_back(bus_col_.at(l.to_bus));
      adj[bus_col_.at(l.to_bus)].push_back(bus_col_.at(l.from_bus));
    }
    std::vector<bool> seen(buses_.size(), false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          q.push(w);
        }
    }
    if (count != buses_.size()) {
      for (std::size_t k = 0; k < buses_.size(); ++k)
        if (!seen[k])
          fail(ErrorKind::DisconnectedNetwork,
               "bus " + std::to_string(buses_[k].id) + " is not reachable from bus " + std::to_string(buses_[0].id));
    }
  }

  std::vector<Bus> buses_;
  std::vector<ThermalUnit> units_;
  std::vector<WindFarm> farms_;
  std::vector<TransmissionLine> lines_;
  int slack_ = 0;
  std::map<int, std::size_t> bus_col_;
  Eigen::MatrixXd ptdf_;
  std::vector<FuelLinearization> fuel_;
};

struct SystemFiles {
  std::string buses;
  std::string units;
  std::string lines;
  // Optional; empty means no wind farms.
  std::string farms;
};

namespace detail {

inline std::vector<Bus> read_buses(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto id = t.column("id"), share = t.column("load_share");
  std::vector<Bus> out;
  for (std::size_t r = 0; r < t.size(); ++r) out.push_back({t.integer(r, id), t.number(r, share)});
  return out;
}

inline std::vector<ThermalUnit> read_units(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_id = t.column("id"), c_bus = t.column("bus"), c_pmin = t.column("p_min"), c_pmax = t.column("p_max"),
             c_on = t.column("min_on"), c_off = t.column("min_off"), c_init = t.column("init_state"),
             c_a = t.column("fuel_a"), c_b = t.column("fuel_b"), c_c = t.column("fuel_c"),
             c_su = t.column("startup_fuel"), c_sd = t.column("shutdown_fuel"), c_price = t.column("fuel_price");
  std::vector<ThermalUnit> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    ThermalUnit u;
    u.id = t.text(r, c_id);
    u.bus = t.integer(r, c_bus);
    u.p_min = t.number(r, c_pmin);
    u.p_max = t.number(r, c_pmax);
    u.min_on = std::abs(t.integer(r, c_on));
    // Published tables write minimum off times with a negative sign.
    u.min_off = std::abs(t.integer(r, c_off));
    u.init_state = t.integer(r, c_init);
    u.fuel_a = t.number(r, c_a);
    u.fuel_b = t.number(r, c_b);
    u.fuel_c = t.number(r, c_c);
    u.startup_fuel = t.number(r, c_su);
    u.shutdown_fuel = t.number(r, c_sd);
    u.fuel_price = t.number(r, c_price);
    if (u.id.empty()) fail(ErrorKind::InvalidValue, t.where(r) + ": empty id");
    out.push_back(u);
  }
  return out;
}

inline std::vector<TransmissionLine> read_lines(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_id = t.column("id"), c_f = t.column("from_bus"), c_t = t.column("to_bus"),
             c_x = t.column("reactance"), c_lim = t.column("flow_limit");
  std::vector<TransmissionLine> out;
  for (std::size_t r = 0; r < t.size(); ++r)
    out.push_back({t.integer(r, c_id), t.integer(r, c_f), t.integer(r, c_t), t.number(r, c_x), t.number(r, c_lim)});
  return out;
}

inline std::vector<WindFarm> read_farms(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_id = t.column("id"), c_bus = t.column("bus");
  const bool has_cap = t.has("capacity");
  std::vector<WindFarm> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    WindFarm f{t.text(r, c_id), t.integer(r, c_bus)};
    if (has_cap) f.capacity = t.number(r, t.column("capacity"));
    out.push_back(f);
  }
  return out;
}

}  // namespace detail

inline PowerSystem load_system(const SystemFiles& files, std::optional<int> slack_bus = std::nullopt) {
  auto buses = detail::read_buses(files.buses);
  auto units = detail::read_units(files.units);
  auto lines = detail::read_lines(files.lines);
  std::vector<WindFarm> farms;
  if (!files.farms.empty()) farms = detail::read_farms(files.farms);
  return PowerSystem(std::move(buses), std::move(units), std::move(farms), std::move(lines), slack_bus);
}

// Hourly series in wide form: `hour,<name>,<name>,...`; values[column][hour].
struct Series {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  std::size_t hours() const { return values.empty() ? 0 : values.front().size(); }
};

inline Series read_series(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_hour = t.column("hour");
  Series s;
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < t.header().size(); ++k)
    if (k != c_hour) {
      s.names.push_back(t.header()[k]);
      cols.push_back(k);
    }
  if (cols.empty()) fail(ErrorKind::MissingColumn, path + ": no value columns");
  s.values.assign(cols.size(), {});
  for (std::size_t r = 0; r < t.size(); ++r) {
    const int h = t.integer(r, c_hour);
    if (r > 0 && h != t.integer(r - 1, c_hour) + 1) fail(ErrorKind::InvalidValue, t.where(r) + ": hours must be consecutive");
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double v = t.number(r, cols[k]);
      if (v < 0.0) fail(ErrorKind::InvalidValue, t.where(r) + ": negative value");
      s.values[k].push_back(v);
    }
  }
  return s;
}

// Ratio of total available wind energy to total demand.
inline double wind_penetration(const std::vector<std::vector<double>>& wind, const std::vector<std::vector<double>>& load) {
  std::size_t horizon = load.empty() ? 0 : load.front().size();
  for (const auto* m : {&wind, &load})
    for (const auto& row : *m)
      if (row.size() != horizon) fail(ErrorKind::DimensionMismatch, "wind and load horizons differ");
  double w = 0.0, d = 0.0;
  for (const auto& row : wind)
    for (double v : row) {
      if (v < 0.0) fail(ErrorKind::InvalidValue, "negative wind value");
      w += v;
    }
  for (const auto& row : load)
    for (double v : row) {
      if (v < 0.0) fail(ErrorKind::InvalidValue, "negative load value");
      d += v;
    }
  if (d <= 0.0) fail(ErrorKind::ZeroDemand, "total demand is zero");
  return w / d;
}

// Per-bus demand [bus][hour] from a system load series.
inline std::vector<std::vector<double>> bus_loads(const PowerSystem& sys, const std::vector<double>& system_load) {
  std::vector<std::vector<double>> out;
  for (const auto& b : sys.buses()) {
    std::vector<double> row;
    for (double l : system_load) row.push_back(l * b.load_share);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace dduc
