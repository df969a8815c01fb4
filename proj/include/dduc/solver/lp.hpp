#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dduc/error.hpp"

namespace dduc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Term {
  int var;
  double coef;
};

// Row-form linear program: minimize cost.x + offset subject to
// rows[i].x (sense[i]) rhs[i] and lower <= x <= upper.
struct LpInstance {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::vector<Term>> rows;
  std::vector<Sense> sense;
  std::vector<double> rhs;
  double offset = 0.0;
  // Optional; only read by the LP file writer.
  std::vector<std::string> var_names;

  int add_variable(double c, double lo, double hi, std::string name = {}) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    if (!name.empty() || !var_names.empty()) {
      var_names.resize(cost.size() - 1);
      var_names.push_back(std::move(name));
    }
    return static_cast<int>(cost.size()) - 1;
  }

  int add_row(std::vector<Term> terms, Sense s, double b) {
    rows.push_back(std::move(terms));
    sense.push_back(s);
    rhs.push_back(b);
    return static_cast<int>(rows.size()) - 1;
  }

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void validate() const {
    const auto n = cost.size();
    if (lower.size() != n || upper.size() != n)
      fail(ErrorKind::DimensionMismatch, "bound vectors do not match the objective length");
    if (sense.size() != rows.size() || rhs.size() != rows.size())
      fail(ErrorKind::DimensionMismatch, "row sense/rhs vectors do not match the row count");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cost[j])) fail(ErrorKind::InvalidValue, "non-finite cost at column " + std::to_string(j));
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInfinity ||
          upper[j] == -kInfinity)
        fail(ErrorKind::InvalidValue, "invalid bounds at column " + std::to_string(j));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!std::isfinite(rhs[i])) fail(ErrorKind::InvalidValue, "non-finite rhs at row " + std::to_string(i));
      for (const auto& t : rows[i]) {
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= n)
          fail(ErrorKind::DimensionMismatch, "row " + std::to_string(i) + " references unknown column");
        if (!std::isfinite(t.coef)) fail(ErrorKind::InvalidValue, "non-finite coefficient in row " + std::to_string(i));
      }
    }
  }
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

constexpr const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  // d(objective)/d(rhs_i) at the optimum.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 64;
  // 0 selects 100 * (rows + columns) + 1000.
  std::size_t max_iterations = 0;
  // Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t bland_after = 50;
};

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free };

struct Basis {
  std::vector<int> head;
  std::vector<VarState> state;
};

// Bounded revised simplex over the internal form  A x - r = 0,  where each
// row owns a logical variable r_i whose bounds encode the row sense.
// The basis inverse is kept explicitly and updated by rank-one pivots.
//
// Cold and warm starts share one path: reduced costs that violate dual
// feasibility are either fixed by a bound flip or neutralised by a shifted
// cost, the dual simplex restores primal feasibility, and the primal simplex
// then finishes with the true costs.
class Simplex {
 public:
  explicit Simplex(LpInstance lp, SimplexOptions options = {}) : lp_(std::move(lp)), opt_(options) {
    lp_.validate();
    load_structure();
  }

  const LpInstance& instance() const { return lp_; }

  LpSolution solve() {
    cold_basis();
    return run();
  }

  // Re-solve after bound, rhs, or row changes starting from the last basis.
  LpSolution reoptimize() {
    if (!has_basis_) return solve();
    if (needs_refactor_ && !refactor()) return solve();
    return run();
  }

  void set_column_bounds(int j, double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      fail(ErrorKind::InvalidValue, "invalid bounds for column " + std::to_string(j));
    lp_.lower[j] = lo;
    lp_.upper[j] = hi;
    lo_[j] = lo;
    hi_[j] = hi;
  }

  void set_row_rhs(int i, double b) {
    lp_.rhs[i] = b;
    set_logical_bounds(i);
  }

  void set_cost(int j, double c) {
    lp_.cost[j] = c;
    cost_[j] = c;
  }

  // Copies bounds and rhs from an instance with identical structure.
  void update_data(const LpInstance& other) {
    for (std::size_t j = 0; j < n_; ++j) set_column_bounds(static_cast<int>(j), other.lower[j], other.upper[j]);
    for (std::size_t i = 0; i < m_; ++i) set_row_rhs(static_cast<int>(i), other.rhs[i]);
  }

  // Appends a row; its logical enters the basis so a stored basis stays usable.
  void add_row(std::vector<Term> terms, Sense s, double b) {
    const bool had_basis = has_basis_;
    Basis old;
    if (had_basis) old = basis();
    lp_.add_row(std::move(terms), s, b);
    lp_.validate();
    load_structure();
    if (had_basis) {
      old.state.push_back(VarState::Basic);
      old.head.push_back(static_cast<int>(n_ + m_ - 1));
      set_basis(old);
    }
  }

  Basis basis() const { return Basis{head_, state_}; }

  void set_basis(const Basis& b) {
    if (b.head.size() != m_ || b.state.size() != n_ + m_)
      fail(ErrorKind::DimensionMismatch, "basis does not match the instance");
    head_ = b.head;
    state_ = b.state;
    has_basis_ = true;
    needs_refactor_ = true;
  }

  std::size_t iterations() const { return iterations_; }

 private:
  // ---- structure -------------------------------------------------------
  void load_structure() {
    n_ = lp_.num_vars();
    m_ = lp_.num_rows();
    const std::size_t total = n_ + m_;
    col_start_.assign(n_ + 1, 0);
    for (const auto& row : lp_.rows)
      for (const auto& t : row) ++col_start_[t.var + 1];
    for (std::size_t j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.assign(col_start_[n_], 0);
    col_val_.assign(col_start_[n_], 0.0);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& t : lp_.rows[i]) {
        col_row_[fill[t.var]] = static_cast<int>(i);
        col_val_[fill[t.var]++] = t.coef;
      }
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    cost_.assign(total, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      cost_[j] = lp_.cost[j];
    }
    for (std::size_t i = 0; i < m_; ++i) set_logical_bounds(static_cast<int>(i));
    x_.assign(total, 0.0);
    d_.assign(total, 0.0);
    work_cost_.assign(total, 0.0);
    has_basis_ = false;
  }

  void set_logical_bounds(int i) {
    const std::size_t j = n_ + static_cast<std::size_t>(i);
    const double b = lp_.rhs[i];
    switch (lp_.sense[i]) {
      case Sense::LessEqual: lo_[j] = -kInfinity; hi_[j] = b; break;
      case Sense::GreaterEqual: lo_[j] = b; hi_[j] = kInfinity; break;
      case Sense::Equal: lo_[j] = b; hi_[j] = b; break;
    }
  }

  bool is_fixed(std::size_t j) const { return lo_[j] == hi_[j]; }

  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(static_cast<std::size_t>(col_row_[k]), col_val_[k]);
    } else {
      f(j - n_, -1.0);
    }
  }

  double dot_column(const std::vector<double>& v, std::size_t j) const {
    double s = 0.0;
    for_column(j, [&](std::size_t i, double a) { s += v[i] * a; });
    return s;
  }

  double& binv(std::size_t i, std::size_t k) { return binv_[i * m_ + k]; }
  double binv(std::size_t i, std::size_t k) const { return binv_[i * m_ + k]; }

  void ftran(std::size_t j, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    for_column(j, [&](std::size_t k, double a) {
      for (std::size_t i = 0; i < m_; ++i) out[i] += binv(i, k) * a;
    });
  }

  // ---- basis management --------------------------------------------------
  void cold_basis() {
    head_.resize(m_);
    state_.assign(n_ + m_, VarState::Basic);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) state_[j] = VarState::AtLower;
      else if (std::isfinite(hi_[j])) state_[j] = VarState::AtUpper;
      else state_[j] = VarState::Free;
    }
    for (std::size_t i = 0; i < m_; ++i) head_[i] = static_cast<int>(n_ + i);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv(i, i) = -1.0;
    has_basis_ = true;
    needs_refactor_ = false;
    since_refactor_ = 0;
  }

  // Basic logicals are unit columns, so only the block of basic structural
  // columns against the rows whose logical is nonbasic needs factoring:
  // with M = B[rows, structurals], x_S = inv(M) b_rows and each basic
  // logical l takes B[l, S] x_S - b_l.
  bool refactor() {
    since_refactor_ = 0;
    needs_refactor_ = false;
    if (m_ == 0) return true;
    std::vector<int> pos_of_row(m_, -1), struct_pos, open_rows;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto h = static_cast<std::size_t>(head_[i]);
      if (h >= n_) pos_of_row[h - n_] = static_cast<int>(i);
      else struct_pos.push_back(static_cast<int>(i));
    }
    std::vector<int> open_index(m_, -1);
    for (std::size_t r = 0; r < m_; ++r)
      if (pos_of_row[r] < 0) {
        open_index[r] = static_cast<int>(open_rows.size());
        open_rows.push_back(static_cast<int>(r));
      }
    const auto k = static_cast<Eigen::Index>(struct_pos.size());
    if (static_cast<std::size_t>(k) != open_rows.size()) return false;

    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_ - k), k);
    std::vector<int> closed_index(m_, -1);
    {
      Eigen::Index c = 0;
      for (std::size_t r = 0; r < m_; ++r)
        if (pos_of_row[r] >= 0) closed_index[r] = static_cast<int>(c++);
    }
    for (Eigen::Index c = 0; c < k; ++c)
      for_column(static_cast<std::size_t>(head_[struct_pos[c]]), [&](std::size_t r, double a) {
        if (open_index[r] >= 0) mat(open_index[r], c) = a;
        else coupling(closed_index[r], c) = a;
      });

    // Equilibrate so that badly scaled rows (cuts, penalties) are not
    // mistaken for rank loss: S = R M C, inv(M) = C inv(S) R.
    Eigen::MatrixXd inv_m(k, k);
    if (k > 0) {
      Eigen::VectorXd rs = Eigen::VectorXd::Ones(k), cs = Eigen::VectorXd::Ones(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const double r = mat.row(i).cwiseAbs().maxCoeff();
        if (r > 0.0) rs(i) = 1.0 / r;
      }
      mat = rs.asDiagonal() * mat;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double c = mat.col(j).cwiseAbs().maxCoeff();
        if (c > 0.0) cs(j) = 1.0 / c;
      }
      mat = mat * cs.asDiagonal();
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
      if (!(lu.rcond() > 1e-13)) return false;
      inv_m = cs.asDiagonal() * lu.inverse() * rs.asDiagonal();
    }
    const Eigen::MatrixXd logical_rows = coupling * inv_m;

    binv_.assign(m_ * m_, 0.0);
    for (Eigen::Index c = 0; c < k; ++c) {
      double* row = &binv_[static_cast<std::size_t>(struct_pos[c]) * m_];
      for (Eigen::Index q = 0; q < k; ++q) row[open_rows[q]] = inv_m(c, q);
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (pos_of_row[r] < 0) continue;
      double* row = &binv_[static_cast<std::size_t>(pos_of_row[r]) * m_];
      for (Eigen::Index q = 0; q < k; ++q) row[open_rows[q]] = logical_rows(closed_index[r], q);
      row[r] = -1.0;
    }
    return true;
  }

  void pivot(std::size_t r, const std::vector<double>& alpha) {
    const double p = alpha[r];
    double* row_r = &binv_[r * m_];
    for (std::size_t k = 0; k < m_; ++k) row_r[k] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row_i = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) row_i[k] -= f * row_r[k];
    }
    ++since_refactor_;
  }

  double nonbasic_value(std::size_t j) const {
    switch (state_[j]) {
      case VarState::AtLower: return lo_[j];
      case VarState::AtUpper: return hi_[j];
      default: return 0.0;
    }
  }

  // Keeps nonbasic states consistent with (possibly changed) bounds.
  void normalize_nonbasic_states() {
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      const bool lo_ok = std::isfinite(lo_[j]);
      const bool hi_ok = std::isfinite(hi_[j]);
      if (state_[j] == VarState::AtLower && !lo_ok) state_[j] = hi_ok ? VarState::AtUpper : VarState::Free;
      else if (state_[j] == VarState::AtUpper && !hi_ok) state_[j] = lo_ok ? VarState::AtLower : VarState::Free;
      else if (state_[j] == VarState::Free && (lo_ok || hi_ok)) state_[j] = lo_ok ? VarState::AtLower : VarState::AtUpper;
    }
  }

  void compute_primal() {
    for (std::size_t j = 0; j < n_ + m_; ++j)
      if (state_[j] != VarState::Basic) x_[j] = nonbasic_value(j);
    std::vector<double> w(m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      const double v = x_[j];
      for_column(j, [&](std::size_t i, double a) { w[i] -= a * v; });
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      const double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) s += row[k] * w[k];
      x_[head_[i]] = s;
    }
  }

  void compute_duals(const std::vector<double>& c) {
    y_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[head_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
    for (std::size_t j = 0; j < n_ + m_; ++j)
      d_[j] = state_[j] == VarState::Basic ? 0.0 : c[j] - dot_column(y_, j);
  }

  // Largest scaled violation of A x - r = 0.
  double primal_residual() const {
    std::vector<double> r(m_, 0.0), mag(m_, 1.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      const double v = x_[j];
      if (v == 0.0) continue;
      for_column(j, [&](std::size_t i, double a) {
        r[i] += a * v;
        mag[i] = std::max(mag[i], std::abs(a * v));
      });
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, std::abs(r[i]) / mag[i]);
    return worst;
  }

  double infeasibility(std::size_t j) const {
    const double v = x_[j];
    if (v < lo_[j] - opt_.primal_tol * (1.0 + std::abs(lo_[j]))) return lo_[j] - v;
    if (v > hi_[j] + opt_.primal_tol * (1.0 + std::abs(hi_[j]))) return v - hi_[j];
    return 0.0;
  }

  bool dual_infeasible(std::size_t j) const {
    if (state_[j] == VarState::Basic || is_fixed(j)) return false;
    switch (state_[j]) {
      case VarState::AtLower: return d_[j] < -opt_.dual_tol;
      case VarState::AtUpper: return d_[j] > opt_.dual_tol;
      default: return std::abs(d_[j]) > opt_.dual_tol;
    }
  }

  std::size_t iteration_cap() const {
    return opt_.max_iterations ? opt_.max_iterations : 100 * (n_ + m_) + 1000;
  }

  void count_iteration() {
    if (++iterations_ > iteration_cap())
      fail(ErrorKind::NumericalFailure, "simplex exceeded " + std::to_string(iteration_cap()) +
                                            " iterations (" + std::to_string(n_) + " columns, " +
                                            std::to_string(m_) + " rows)");
    if (since_refactor_ >= opt_.refactor_interval) {
      if (!refactor()) fail(ErrorKind::NumericalFailure, "basis became singular during refactorisation");
      compute_primal();
      compute_duals(work_cost_);
    }
  }

  // ---- driver --------------------------------------------------------------
  LpSolution run() {
    iterations_ = 0;
    normalize_nonbasic_states();
    compute_primal();
    for (int polish = 0; polish < 4; ++polish) {
      work_cost_ = cost_;
      compute_duals(work_cost_);
      bool flipped = false;
      bool shifted = false;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (!dual_infeasible(j)) continue;
        if (state_[j] == VarState::AtLower && std::isfinite(hi_[j])) {
          state_[j] = VarState::AtUpper;
          flipped = true;
        } else if (state_[j] == VarState::AtUpper && std::isfinite(lo_[j])) {
          state_[j] = VarState::AtLower;
          flipped = true;
        } else {
          work_cost_[j] -= d_[j];
          d_[j] = 0.0;
          shifted = true;
        }
      }
      if (flipped) compute_primal();

      if (!dual_simplex()) return finish(LpStatus::Infeasible);
      if (shifted) {
        work_cost_ = cost_;
        compute_duals(work_cost_);
      }
      if (!primal_simplex()) return finish(LpStatus::Unbounded);

      // Clean up accumulated drift before declaring optimality.
      if (since_refactor_ > 0) {
        compute_primal();
        if (primal_residual() > 1e-9) {
          if (!refactor()) fail(ErrorKind::NumericalFailure, "final basis is singular");
          compute_primal();
        }
        compute_duals(cost_);
      }
      bool clean = true;
      for (std::size_t j = 0; j < n_ + m_ && clean; ++j)
        if ((state_[j] == VarState::Basic && infeasibility(j) > 0.0) || dual_infeasible(j)) clean = false;
      if (clean) return finish(LpStatus::Optimal);
    }
    fail(ErrorKind::NumericalFailure, "simplex could not reach a clean optimal basis");
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    if (status == LpStatus::Optimal) {
      compute_duals(cost_);
      sol.duals.assign(m_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) sol.duals[i] = y_[i];
      sol.reduced_costs.assign(n_, 0.0);
      for (std::size_t j = 0; j < n_; ++j) sol.reduced_costs[j] = state_[j] == VarState::Basic ? 0.0 : d_[j];
      double obj = lp_.offset;
      for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
      sol.objective = obj;
    }
    return sol;
  }

  // Dual simplex on work_cost_. Returns false when the primal is infeasible.
  bool dual_simplex() {
    std::vector<double> rho(m_), alpha_row(n_ + m_, 0.0), alpha;
    std::size_t degenerate = 0;
    while (true) {
      const bool bland = degenerate > opt_.bland_after;
      std::size_t r = m_;
      double worst = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double inf = infeasibility(static_cast<std::size_t>(head_[i]));
        if (inf <= 0.0) continue;
        if (bland) {
          if (r == m_ || head_[i] < head_[r]) r = i;
        } else if (inf > worst) {
          worst = inf;
          r = i;
        }
      }
      if (r == m_) return true;

      const std::size_t leaving = static_cast<std::size_t>(head_[r]);
      const bool to_lower = x_[leaving] < lo_[leaving];
      const double target = to_lower ? lo_[leaving] : hi_[leaving];
      for (std::size_t k = 0; k < m_; ++k) rho[k] = binv(r, k);

      // Harris two-pass ratio test over the pivot row.
      double bound = kInfinity;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        alpha_row[j] = 0.0;
        if (state_[j] == VarState::Basic || is_fixed(j)) continue;
        const double a = dot_column(rho, j);
        alpha_row[j] = a;
        if (!eligible_dual(j, a, to_lower)) continue;
        const double dj = std::max(0.0, signed_slack(j));
        bound = std::min(bound, (dj + opt_.dual_tol) / std::abs(a));
      }
      if (bound == kInfinity) return false;

      std::size_t q = n_ + m_;
      double best_abs = 0.0;
      double best_ratio = kInfinity;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::Basic || is_fixed(j)) continue;
        const double a = alpha_row[j];
        if (!eligible_dual(j, a, to_lower)) continue;
        const double ratio = std::max(0.0, signed_slack(j)) / std::abs(a);
        if (ratio > bound) continue;
        if (bland) {
          if (ratio < best_ratio || (ratio == best_ratio && j < q)) {
            best_ratio = ratio;
            q = j;
          }
        } else if (std::abs(a) > best_abs) {
          best_abs = std::abs(a);
          q = j;
        }
      }
      if (q == n_ + m_) return false;

      ftran(q, alpha);
      if (std::abs(alpha[r] - alpha_row[q]) > 1e-7 * (1.0 + std::abs(alpha[r]))) {
        if (!refactor()) fail(ErrorKind::NumericalFailure, "basis became singular in dual simplex");
        compute_primal();
        compute_duals(work_cost_);
        count_iteration();
        continue;
      }

      const double theta_d = d_[q] / alpha_row[q];
      const double step = (x_[leaving] - target) / alpha[r];
      x_[q] += step;
      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha[i];
      x_[leaving] = target;

      for (std::size_t j = 0; j < n_ + m_; ++j)
        if (state_[j] != VarState::Basic && alpha_row[j] != 0.0) d_[j] -= theta_d * alpha_row[j];
      for (std::size_t k = 0; k < m_; ++k) y_[k] += theta_d * rho[k];
      d_[q] = 0.0;
      d_[leaving] = -theta_d;

      state_[leaving] = to_lower ? VarState::AtLower : VarState::AtUpper;
      if (is_fixed(leaving)) state_[leaving] = VarState::AtLower;
      state_[q] = VarState::Basic;
      head_[r] = static_cast<int>(q);
      pivot(r, alpha);

      degenerate = std::abs(theta_d) <= 1e-12 ? degenerate + 1 : 0;
      count_iteration();
    }
  }

  // Distance of d_j from violating dual feasibility, in the direction the
  // variable's bound state allows.
  double signed_slack(std::size_t j) const {
    switch (state_[j]) {
      case VarState::AtLower: return d_[j];
      case VarState::AtUpper: return -d_[j];
      default: return 0.0;
    }
  }

  bool eligible_dual(std::size_t j, double a, bool to_lower) const {
    if (std::abs(a) <= opt_.pivot_tol) return false;
    // The leaving variable rises when a * dx_j < 0.
    const double want = to_lower ? -1.0 : 1.0;
    switch (state_[j]) {
      case VarState::AtLower: return a * want > 0.0;
      case VarState::AtUpper: return a * want < 0.0;
      case VarState::Free: return true;
      default: return false;
    }
  }

  // Primal simplex on work_cost_ from a primal feasible basis.
  // Returns false when the objective is unbounded.
  bool primal_simplex() {
    std::vector<double> alpha, rho(m_);
    std::size_t degenerate = 0;
    while (true) {
      const bool bland = degenerate > opt_.bland_after;
      std::size_t q = n_ + m_;
      double best = 0.0;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (!dual_infeasible(j)) continue;
        if (bland) {
          q = j;
          break;
        }
        if (std::abs(d_[j]) > best) {
          best = std::abs(d_[j]);
          q = j;
        }
      }
      if (q == n_ + m_) return true;

      const double dir = d_[q] < 0.0 ? 1.0 : -1.0;
      ftran(q, alpha);

      double bound = kInfinity;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const std::size_t b = static_cast<std::size_t>(head_[i]);
        if (a > opt_.pivot_tol && std::isfinite(lo_[b]))
          bound = std::min(bound, (x_[b] - lo_[b] + opt_.primal_tol) / a);
        else if (a < -opt_.pivot_tol && std::isfinite(hi_[b]))
          bound = std::min(bound, (hi_[b] - x_[b] + opt_.primal_tol) / -a);
      }
      const double flip = hi_[q] - lo_[q];
      if (bound == kInfinity && !std::isfinite(flip)) return false;

      if (std::isfinite(flip) && flip <= bound) {
        for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= dir * flip * alpha[i];
        state_[q] = state_[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        x_[q] = nonbasic_value(q);
        degenerate = 0;
        count_iteration();
        continue;
      }

      std::size_t r = m_;
      double best_abs = 0.0;
      double step = 0.0;
      bool leave_lower = true;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const std::size_t b = static_cast<std::size_t>(head_[i]);
        double ratio;
        bool lower;
        if (a > opt_.pivot_tol && std::isfinite(lo_[b])) {
          ratio = (x_[b] - lo_[b]) / a;
          lower = true;
        } else if (a < -opt_.pivot_tol && std::isfinite(hi_[b])) {
          ratio = (hi_[b] - x_[b]) / -a;
          lower = false;
        } else {
          continue;
        }
        if (ratio > bound) continue;
        const bool better = bland ? (r == m_ || ratio < step || (ratio == step && head_[i] < head_[r]))
                                  : std::abs(a) > best_abs;
        if (better) {
          r = i;
          best_abs = std::abs(a);
          step = ratio;
          leave_lower = lower;
        }
      }
      if (r == m_) return false;
      step = std::max(step, 0.0);

      const std::size_t leaving = static_cast<std::size_t>(head_[r]);
      for (std::size_t k = 0; k < m_; ++k) rho[k] = binv(r, k);
      const double theta_d = d_[q] / alpha[r];
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::Basic || j == q) continue;
        const double a = dot_column(rho, j);
        if (a != 0.0) d_[j] -= theta_d * a;
      }
      for (std::size_t k = 0; k < m_; ++k) y_[k] += theta_d * rho[k];

      x_[q] += dir * step;
      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * alpha[i];
      x_[leaving] = leave_lower ? lo_[leaving] : hi_[leaving];

      d_[q] = 0.0;
      d_[leaving] = -theta_d;
      state_[leaving] = leave_lower ? VarState::AtLower : VarState::AtUpper;
      state_[q] = VarState::Basic;
      head_[r] = static_cast<int>(q);
      pivot(r, alpha);

      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
      count_iteration();
    }
  }

  LpInstance lp_;
  SimplexOptions opt_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, cost_, work_cost_;
  std::vector<double> x_, d_, y_;
  std::vector<int> head_;
  std::vector<VarState> state_;
  std::vector<double> binv_;
  bool has_basis_ = false;
  bool needs_refactor_ = false;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
};

inline LpSolution solve_lp(const LpInstance& lp, const SimplexOptions& options = {}) {
  Simplex simplex(lp, options);
  return simplex.solve();
}

}  // namespace dduc
