#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dduc/studies.hpp"

namespace dduc {

// Shortest text that parses back to the same double.
inline std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline nlohmann::json to_json(const StudyReport& r) {
  nlohmann::json j;
  j["study"] = r.study;
  j["reference"] = r.reference;
  j["config"] = r.config;
  j["policies"] = nlohmann::json::array();
  for (const auto& p : r.policies) {
    nlohmann::json pj = {{"name", p.name},
                         {"total_cost", p.total},
                         {"penalty_cost", p.penalty},
                         {"penalty_ratio", p.penalty_ratio},
                         {"r_delta_g", p.r_delta_g}};
    pj["periods"] = nlohmann::json::array();
    for (const auto& c : p.periods)
      pj["periods"].push_back({{"day", c.day}, {"block", c.block}, {"total_cost", c.total}, {"penalty_cost", c.penalty}});
    j["policies"].push_back(pj);
  }
  j["details"] = r.details;
  return j;
}

inline std::string totals_csv(const StudyReport& r) {
  std::string s = "policy,total_cost,penalty_cost,penalty_ratio,r_delta_g\n";
  for (const auto& p : r.policies)
    s += p.name + ',' + exact(p.total) + ',' + exact(p.penalty) + ',' + exact(p.penalty_ratio) + ',' +
         exact(p.r_delta_g) + '\n';
  return s;
}

inline std::string scatter_csv(const StudyReport& r) {
  std::string s = "worker,realized_cost\n";
  for (const auto& [w, c] : r.scatter) s += std::to_string(w) + ',' + exact(c) + '\n';
  return s;
}

// report.json, totals.csv and timing.json; scatter.csv for the selection study.
inline void write_report(const std::string& dir, const StudyReport& r) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidValue, "cannot write " + (std::filesystem::path(dir) / name).string());
    out << text;
  };
  put("report.json", to_json(r).dump(2) + '\n');
  put("totals.csv", totals_csv(r));
  if (r.study == "opsel") put("scatter.csv", scatter_csv(r));
  put("timing.json", r.timing.dump(2) + '\n');
}

}  // namespace dduc
