#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dduc/error.hpp"

namespace dduc {

// Flat `key = value` file. Blank lines and text after '#' are ignored.
// Every key has a default; unknown keys are rejected.
class Config {
 public:
  struct Key {
    std::string name;
    std::string value;
    std::string help;
  };

  static const std::vector<Key>& schema() {
    static const std::vector<Key> keys = {
        {"system_dir", "data/six_bus", "directory holding buses.csv, units.csv, lines.csv, farms.csv"},
        {"load_file", "", "system load series `hour,load`; empty generates synthetic data"},
        {"wind_file", "", "wind series `hour,<farm>...`; empty generates synthetic data"},
        {"out_dir", "out", "output directory"},
        {"seed", "1", "base seed"},
        {"days", "31", "evaluation days"},
        {"warmup_days", "5", "synthetic days before the first evaluation day"},
        {"horizon", "24", "day-ahead horizon in hours"},
        {"block_hours", "4", "intraday sub-horizon; must divide 24"},
        {"c_ens", "3500", "load-shedding price, $/MWh"},
        {"c_wc", "50", "curtailment price, $/MWh"},
        {"scenarios", "50", "search scenarios per SAA solve"},
        {"eval_scenarios", "1000", "scenarios for expected-cost evaluation"},
        {"history_days", "1", "days of history for the day-ahead fits"},
        {"phi_fraction", "0.2", "day-ahead wind standard deviation as a fraction of the true mean"},
        {"history_window", "100", "hours of history for the intraday forecasts"},
        {"intraday_model", "ar1", "intraday data-driven forecast: ar1 or normal"},
        {"workers", "4", "parallel search workers"},
        {"budget", "1000", "selection scenarios beyond the initial ones"},
        {"delta_t", "200", "selection scenarios per iteration"},
        {"allocation", "ocba", "ocba, classic or equal"},
        {"method", "auto", "auto, hourly, lshaped or extensive"},
        {"threads", "0", "worker threads; 0 uses every core"},
        {"penetration", "0.378", "synthetic wind penetration"},
        {"scatter_day", "1", "day whose per-worker realized costs go to scatter.csv"},
    };
    return keys;
  }

  Config() {
    for (const auto& k : schema()) values_[k.name] = k.value;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidConfig, "cannot open " + path);
    Config c;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      const std::string key = trim(line.substr(0, eq));
      if (key.empty() && eq == std::string::npos) continue;
      if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, path + ":" + std::to_string(n) + ": expected key = value");
      c.set(key, trim(line.substr(eq + 1)));
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) fail(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
    values_[key] = value;
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const auto& s = str(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(ErrorKind::InvalidConfig, key + ": '" + s + "' is not a number");
    return v;
  }

  std::uint64_t integer(const std::string& key) const {
    const auto& s = str(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(ErrorKind::InvalidConfig, key + ": '" + s + "' is not a nonnegative integer");
    return v;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace dduc
