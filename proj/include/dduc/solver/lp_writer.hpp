#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dduc/solver/lp.hpp"

namespace dduc {

namespace detail {

inline std::string lp_name(const LpInstance& lp, std::size_t j) {
  if (j < lp.var_names.size() && !lp.var_names[j].empty()) return lp.var_names[j];
  return "x" + std::to_string(j + 1);
}

inline void lp_terms(std::ostream& os, const LpInstance& lp, const std::vector<std::pair<std::size_t, double>>& terms) {
  std::size_t width = 0;
  bool first = true;
  for (const auto& [j, c] : terms) {
    if (c == 0.0) continue;
    std::ostringstream t;
    t << std::setprecision(17);
    t << (c < 0 ? "- " : (first ? "" : "+ ")) << std::abs(c) << ' ' << lp_name(lp, j);
    const std::string s = t.str();
    if (width + s.size() > 240) {
      os << "\n   ";
      width = 0;
    }
    os << ' ' << s;
    width += s.size() + 1;
    first = false;
  }
  if (first) os << " 0 " << lp_name(lp, 0);
}

inline std::string lp_number(double v) {
  if (v == kInfinity) return "+inf";
  if (v == -kInfinity) return "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

// CPLEX LP text format. Columns listed in `integers` are declared binary
// when their bounds are [0, 1] and general otherwise.
inline void write_lp(std::ostream& os, const LpInstance& lp, const std::vector<int>& integers = {}) {
  os << "\\ offset " << detail::lp_number(lp.offset) << "\nMinimize\n obj:";
  std::vector<std::pair<std::size_t, double>> obj;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) obj.emplace_back(j, lp.cost[j]);
  detail::lp_terms(os, lp, obj);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    os << " c" << i + 1 << ':';
    std::vector<std::pair<std::size_t, double>> row;
    for (const auto& t : lp.rows[i]) row.emplace_back(static_cast<std::size_t>(t.var), t.coef);
    detail::lp_terms(os, lp, row);
    const char* op = lp.sense[i] == Sense::LessEqual ? " <= " : lp.sense[i] == Sense::Equal ? " = " : " >= ";
    os << op << detail::lp_number(lp.rhs[i]) << '\n';
  }
  std::vector<bool> is_int(lp.num_vars(), false), is_bin(lp.num_vars(), false);
  for (int j : integers) {
    is_int[j] = true;
    is_bin[j] = lp.lower[j] == 0.0 && lp.upper[j] == 1.0;
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (is_bin[j]) continue;
    const double lo = lp.lower[j], hi = lp.upper[j];
    const std::string n = detail::lp_name(lp, j);
    if (lo == -kInfinity && hi == kInfinity) os << ' ' << n << " free\n";
    else if (lo == hi) os << ' ' << n << " = " << detail::lp_number(lo) << '\n';
    else os << ' ' << detail::lp_number(lo) << " <= " << n << " <= " << detail::lp_number(hi) << '\n';
  }
  bool any_bin = false, any_gen = false;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    any_bin = any_bin || is_bin[j];
    any_gen = any_gen || (is_int[j] && !is_bin[j]);
  }
  if (any_bin) {
    os << "Binaries\n";
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
      if (is_bin[j]) os << ' ' << detail::lp_name(lp, j) << '\n';
  }
  if (any_gen) {
    os << "Generals\n";
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
      if (is_int[j] && !is_bin[j]) os << ' ' << detail::lp_name(lp, j) << '\n';
  }
  os << "End\n";
}

}  // namespace dduc
