#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dduc/solver/lp.hpp"

namespace dduc {

enum class MilpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, NodeLimit };

constexpr const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "Optimal";
    case MilpStatus::Infeasible: return "Infeasible";
    case MilpStatus::Unbounded: return "Unbounded";
    case MilpStatus::NodeLimit: return "NodeLimit";
  }
  return "?";
}

struct MilpOptions {
  // Relative to max(1, |incumbent|).
  double gap_tol = 1e-6;
  std::size_t node_limit = 200000;
  double integrality_tol = 1e-6;
  SimplexOptions lp;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<double> x;
  double objective = kInfinity;
  double bound = -kInfinity;
  double gap = kInfinity;
  std::size_t nodes = 0;
};

inline double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInfinity;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

// Branch and bound over binary columns. Most-fractional branching, a
// depth-first plunge into the nearer rounding, and a restart from the open
// node with the lowest bound whenever a plunge ends.
class BranchAndBound {
 public:
  BranchAndBound(const LpInstance& lp, std::vector<int> binaries, MilpOptions options = {})
      : simplex_(lp, options.lp), binaries_(std::move(binaries)), opt_(options) {
    for (int j : binaries_) {
      if (j < 0 || static_cast<std::size_t>(j) >= lp.num_vars())
        fail(ErrorKind::DimensionMismatch, "binary index out of range");
      base_lo_.push_back(std::max(0.0, lp.lower[j]));
      base_hi_.push_back(std::min(1.0, lp.upper[j]));
    }
  }

  const LpInstance& instance() const { return simplex_.instance(); }

  // Rows added here persist across solves (used for Benders cuts).
  void add_row(std::vector<Term> terms, Sense s, double b) {
    simplex_.add_row(std::move(terms), s, b);
    root_basis_.reset();
  }

  // The caller guarantees `incumbent` is feasible.
  MilpSolution solve(const std::optional<std::vector<double>>& incumbent = std::nullopt) {
    MilpSolution best;
    if (incumbent) {
      best.x = *incumbent;
      best.objective = objective_of(best.x);
    }
    std::vector<Node> open;
    Node root;
    root.fix.assign(binaries_.size(), -1);
    root.bound = -kInfinity;
    root.basis = root_basis_;
    std::optional<Node> current = std::move(root);
    std::size_t nodes = 0;
    bool unbounded = false;

    while (current || !open.empty()) {
      if (!current) {
        auto it = std::min_element(open.begin(), open.end(),
                                   [](const Node& a, const Node& b) { return a.bound < b.bound; });
        current = std::move(*it);
        open.erase(it);
      }
      Node node = std::move(*current);
      current.reset();
      if (prunable(node.bound, best.objective)) continue;
      if (nodes >= opt_.node_limit) {
        open.push_back(std::move(node));
        break;
      }
      ++nodes;
      apply(node);
      if (node.basis) simplex_.set_basis(*node.basis);
      const LpSolution rel = node.basis || nodes > 1 ? simplex_.reoptimize() : simplex_.solve();
      if (nodes == 1 && rel.status == LpStatus::Optimal) root_basis_ = simplex_.basis();
      if (rel.status == LpStatus::Unbounded) {
        unbounded = true;
        break;
      }
      if (rel.status != LpStatus::Optimal) continue;
      if (prunable(rel.objective, best.objective)) continue;

      int branch = -1;
      double most = opt_.integrality_tol;
      for (std::size_t k = 0; k < binaries_.size(); ++k) {
        const double v = rel.x[binaries_[k]];
        const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
        if (frac > most) {
          most = frac;
          branch = static_cast<int>(k);
        }
      }
      if (branch < 0) {
        std::vector<double> x = rel.x;
        for (int j : binaries_) x[j] = std::round(x[j]);
        const double obj = objective_of(x);
        if (obj < best.objective) {
          best.x = std::move(x);
          best.objective = obj;
        }
        continue;
      }
      const double v = rel.x[binaries_[branch]];
      const int near = v >= 0.5 ? 1 : 0;
      Node far{node.fix, rel.objective, simplex_.basis()};
      far.fix[branch] = static_cast<std::int8_t>(1 - near);
      open.push_back(std::move(far));
      Node child{std::move(node.fix), rel.objective, std::nullopt};
      child.fix[branch] = static_cast<std::int8_t>(near);
      current = std::move(child);
    }
    restore();

    best.nodes = nodes;
    if (unbounded) {
      best.status = MilpStatus::Unbounded;
      return best;
    }
    double bound = best.objective;
    for (const auto& n : open) bound = std::min(bound, n.bound);
    if (current) bound = std::min(bound, current->bound);
    best.bound = bound;
    const bool exhausted = open.empty() && !current;
    if (!std::isfinite(best.objective)) {
      best.status = exhausted ? MilpStatus::Infeasible : MilpStatus::NodeLimit;
      return best;
    }
    best.gap = relative_gap(best.objective, bound);
    best.status = exhausted || best.gap <= opt_.gap_tol ? MilpStatus::Optimal : MilpStatus::NodeLimit;
    return best;
  }

 private:
  struct Node {
    // -1 free, otherwise the fixed value.
    std::vector<std::int8_t> fix;
    double bound = -kInfinity;
    std::optional<Basis> basis;
  };

  bool prunable(double node_bound, double incumbent) const {
    if (!std::isfinite(incumbent)) return false;
    return node_bound >= incumbent - opt_.gap_tol * std::max(1.0, std::abs(incumbent));
  }

  double objective_of(const std::vector<double>& x) const {
    const LpInstance& lp = simplex_.instance();
    double v = lp.offset;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) v += lp.cost[j] * x[j];
    return v;
  }

  void apply(const Node& node) {
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
      if (node.fix[k] < 0) simplex_.set_column_bounds(binaries_[k], base_lo_[k], base_hi_[k]);
      else simplex_.set_column_bounds(binaries_[k], node.fix[k], node.fix[k]);
    }
  }

  void restore() {
    for (std::size_t k = 0; k < binaries_.size(); ++k)
      simplex_.set_column_bounds(binaries_[k], base_lo_[k], base_hi_[k]);
  }

  Simplex simplex_;
  std::vector<int> binaries_;
  std::vector<double> base_lo_, base_hi_;
  MilpOptions opt_;
  std::optional<Basis> root_basis_;
};

inline MilpSolution solve_milp(const LpInstance& lp, const std::vector<int>& binaries, const MilpOptions& options = {},
                               const std::optional<std::vector<double>>& incumbent = std::nullopt) {
  BranchAndBound bb(lp, binaries, options);
  return bb.solve(incumbent);
}

}  // namespace dduc
