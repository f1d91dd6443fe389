#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mts/error.hpp"
#include "mts/rational.hpp"

namespace mts {

enum class Relation { kEq, kGe, kLe };

struct LinearConstraint {
  std::vector<std::pair<int, Rational>> terms;  // (variable index, coefficient)
  Relation relation = Relation::kGe;
  Rational rhs = 0;
};

// minimize objective . x subject to the constraints and x >= 0.
struct LinearProgram {
  int n_vars = 0;
  std::vector<LinearConstraint> constraints;
  std::vector<std::pair<int, Rational>> objective;
};

struct LpSolution {
  Rational optimum;
  std::vector<Rational> point;  // primal certificate, satisfies every constraint exactly
  std::size_t pivots = 0;
};

namespace detail {

using SparseRow = std::vector<std::pair<int, Rational>>;

inline void add_scaled(std::map<int, Rational>& acc, const SparseRow& row, const Rational& f) {
  for (const auto& [j, v] : row) {
    auto [it, inserted] = acc.try_emplace(j, 0);
    it->second += f * v;
    if (it->second == 0) acc.erase(it);
  }
}

inline int sign(const Rational& v) { return sgn(v); }

// Floating-point entries below this magnitude count as zero.
inline constexpr double kFloatEps = 1e-9;
inline int sign(double v) { return v > kFloatEps ? 1 : v < -kFloatEps ? -1 : 0; }

inline void clean(Rational&) {}
inline void clean(double& v) {
  if (sign(v) == 0) v = 0;
}

// Dense simplex tableau for: maximize obj . v, A v = rhs, v >= 0, rhs >= 0,
// with an initial feasible basis given by `basis`. T is Rational for exact
// solves or double for the guiding pass.
template <class T>
class TableauT {
 public:
  TableauT(std::vector<std::vector<T>> rows, std::vector<T> rhs, std::vector<int> basis, std::size_t n_cols)
      : rows_(std::move(rows)), rhs_(std::move(rhs)), basis_(std::move(basis)), n_cols_(n_cols) {}

  // Returns false when the objective is unbounded above. Throws
  // IterationLimit once `max_pivots` is exceeded (0 = no limit).
  bool maximize(const std::vector<T>& obj, const std::vector<bool>& eligible, std::size_t max_pivots = 0) {
    price(obj);
    int degenerate_run = 0;
    bool bland = false;
    for (;;) {
      if (max_pivots != 0 && pivots_ > max_pivots) throw IterationLimit();
      int enter = -1;
      if (bland) {
        for (std::size_t j = 0; j < n_cols_; ++j) {
          if (eligible[j] && sign(reduced_[j]) > 0) {
            enter = static_cast<int>(j);
            break;
          }
        }
      } else {
        const T* best = nullptr;
        for (std::size_t j = 0; j < n_cols_; ++j) {
          if (eligible[j] && sign(reduced_[j]) > 0 && (best == nullptr || reduced_[j] > *best)) {
            best = &reduced_[j];
            enter = static_cast<int>(j);
          }
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      T best_ratio{};
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const T& a = rows_[i][enter];
        if (sign(a) <= 0) continue;
        T ratio = rhs_[i] / a;
        int cmp = leave < 0 ? -1 : sign(T(ratio - best_ratio));
        if (cmp < 0 || (cmp == 0 && basis_[i] < basis_[leave])) {
          leave = static_cast<int>(i);
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;

      if (sign(best_ratio) == 0) {
        // Bland's rule takes over on long degenerate runs and hands back
        // after the first strictly improving pivot.
        if (++degenerate_run > 20) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    ++pivots_;
    std::vector<T>& prow = rows_[r];
    T inv = 1 / prow[c];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < n_cols_; ++j) {
      if (sign(prow[j]) != 0) {
        prow[j] *= inv;
        nz.push_back(j);
      } else {
        prow[j] = 0;
      }
    }
    prow[c] = 1;
    rhs_[r] *= inv;
    clean(rhs_[r]);
    T f;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r || sign(rows_[i][c]) == 0) continue;
      f = rows_[i][c];
      std::vector<T>& row = rows_[i];
      for (std::size_t j : nz) {
        row[j] -= f * prow[j];
        clean(row[j]);
      }
      row[c] = 0;
      rhs_[i] -= f * rhs_[r];
      clean(rhs_[i]);
    }
    if (!reduced_.empty() && sign(reduced_[c]) != 0) {
      f = reduced_[c];
      for (std::size_t j : nz) {
        reduced_[j] -= f * prow[j];
        clean(reduced_[j]);
      }
      reduced_[c] = 0;
      value_ += f * rhs_[r];
    }
    basis_[r] = static_cast<int>(c);
  }

  // Recomputes reduced costs obj_j - sum_i obj_{basis(i)} a_ij and the value.
  void price(const std::vector<T>& obj) {
    reduced_ = obj;
    value_ = 0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const T& cb = obj[basis_[i]];
      if (sign(cb) == 0) continue;
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (sign(rows_[i][j]) != 0) reduced_[j] -= cb * rows_[i][j];
      }
      value_ += cb * rhs_[i];
    }
    for (T& v : reduced_) clean(v);
  }

  std::size_t n_rows() const { return rows_.size(); }
  const std::vector<T>& row(std::size_t i) const { return rows_[i]; }
  const T& rhs(std::size_t i) const { return rhs_[i]; }
  int basic(std::size_t i) const { return basis_[i]; }
  const std::vector<int>& basis() const { return basis_; }
  const std::vector<T>& reduced() const { return reduced_; }
  const T& value() const { return value_; }
  std::size_t pivots() const { return pivots_; }

  struct IterationLimit {};

 private:
  std::vector<std::vector<T>> rows_;
  std::vector<T> rhs_;
  std::vector<int> basis_;
  std::size_t n_cols_;
  std::vector<T> reduced_;
  T value_{};
  std::size_t pivots_ = 0;
};

using Tableau = TableauT<Rational>;

struct Reduced {
  // x_pivot = constant + sum coef * x_free, per eliminated variable
  std::vector<int> free_vars;          // original index of each reduced variable
  std::vector<int> reduced_index;      // original -> reduced index, -1 if eliminated
  std::vector<std::pair<int, std::pair<Rational, SparseRow>>> eliminated;  // (orig, (const, row over reduced))
  std::vector<SparseRow> ineq_rows;    // over reduced vars, each row >= ineq_rhs
  std::vector<Rational> ineq_rhs;
  SparseRow objective;                 // over reduced vars
  Rational objective_offset;
};

// Gauss-Jordan on the equalities, substitution into everything else, and
// deduplication of the remaining >= rows.
inline Reduced presolve(const LinearProgram& lp) {
  const int n = lp.n_vars;
  std::vector<std::map<int, Rational>> eq_rows;
  std::vector<Rational> eq_rhs;
  std::vector<std::pair<SparseRow, Rational>> ge_rows;
  for (const LinearConstraint& c : lp.constraints) {
    for (const auto& [j, v] : c.terms) {
      if (j < 0 || j >= n) throw Error("constraint references unknown variable");
    }
    if (c.relation == Relation::kEq) {
      std::map<int, Rational> row;
      add_scaled(row, c.terms, 1);
      eq_rows.push_back(std::move(row));
      eq_rhs.push_back(c.rhs);
    } else {
      Rational s = c.relation == Relation::kGe ? 1 : -1;
      SparseRow row;
      for (const auto& [j, v] : c.terms) row.emplace_back(j, s * v);
      ge_rows.emplace_back(std::move(row), s * c.rhs);
    }
  }

  // Each pivot row holds: pivot variable with coefficient 1, plus only
  // non-pivot variables.
  std::vector<int> pivot_of_row;
  std::vector<std::map<int, Rational>> piv_rows;
  std::vector<Rational> piv_rhs;
  std::vector<bool> is_pivot(n, false);
  for (std::size_t e = 0; e < eq_rows.size(); ++e) {
    std::map<int, Rational> row = eq_rows[e];
    Rational rhs = eq_rhs[e];
    for (std::size_t p = 0; p < piv_rows.size(); ++p) {
      auto it = row.find(pivot_of_row[p]);
      if (it == row.end()) continue;
      Rational f = it->second;
      for (const auto& [j, v] : piv_rows[p]) {
        auto [jt, ins] = row.try_emplace(j, 0);
        jt->second -= f * v;
        if (jt->second == 0) row.erase(jt);
      }
      rhs -= f * piv_rhs[p];
    }
    if (row.empty()) {
      if (rhs != 0) throw InfeasibleError();
      continue;
    }
    // Eliminate the highest-index variable: for entropy coordinates that is
    // the largest joint set in the row.
    auto last = std::prev(row.end());
    int pv = last->first;
    Rational inv = 1 / last->second;
    for (auto& [j, v] : row) v *= inv;
    rhs *= inv;
    for (std::size_t p = 0; p < piv_rows.size(); ++p) {
      auto it = piv_rows[p].find(pv);
      if (it == piv_rows[p].end()) continue;
      Rational f = it->second;
      for (const auto& [j, v] : row) {
        auto [jt, ins] = piv_rows[p].try_emplace(j, 0);
        jt->second -= f * v;
        if (jt->second == 0) piv_rows[p].erase(jt);
      }
      piv_rhs[p] -= f * rhs;
    }
    pivot_of_row.push_back(pv);
    piv_rows.push_back(std::move(row));
    piv_rhs.push_back(std::move(rhs));
    is_pivot[pv] = true;
  }

  Reduced red;
  red.reduced_index.assign(n, -1);
  for (int j = 0; j < n; ++j) {
    if (!is_pivot[j]) {
      red.reduced_index[j] = static_cast<int>(red.free_vars.size());
      red.free_vars.push_back(j);
    }
  }
  // x_pv = rhs - sum_{j != pv} coef_j x_j
  std::vector<int> elim_slot(n, -1);
  for (std::size_t p = 0; p < piv_rows.size(); ++p) {
    SparseRow expr;
    for (const auto& [j, v] : piv_rows[p]) {
      if (j == pivot_of_row[p]) continue;
      expr.emplace_back(red.reduced_index[j], -v);
    }
    elim_slot[pivot_of_row[p]] = static_cast<int>(red.eliminated.size());
    red.eliminated.push_back({pivot_of_row[p], {piv_rhs[p], std::move(expr)}});
  }

  auto substitute = [&](const SparseRow& row, Rational& constant) {
    std::map<int, Rational> acc;
    for (const auto& [j, v] : row) {
      if (elim_slot[j] < 0) {
        SparseRow single{{red.reduced_index[j], v}};
        add_scaled(acc, single, 1);
      } else {
        const auto& [c0, expr] = red.eliminated[elim_slot[j]].second;
        constant += v * c0;
        add_scaled(acc, expr, v);
      }
    }
    return SparseRow(acc.begin(), acc.end());
  };

  // Keep the largest rhs for each distinct coefficient row.
  std::map<std::string, std::size_t> seen;
  auto add_ge = [&](SparseRow row, Rational rhs) {
    if (row.empty()) {
      if (rhs > 0) throw InfeasibleError();
      return;
    }
    std::string key;
    for (const auto& [j, v] : row) key += std::to_string(j) + ":" + v.get_str() + " ";
    auto it = seen.find(key);
    if (it != seen.end()) {
      if (rhs > red.ineq_rhs[it->second]) red.ineq_rhs[it->second] = rhs;
      return;
    }
    seen.emplace(std::move(key), red.ineq_rows.size());
    red.ineq_rows.push_back(std::move(row));
    red.ineq_rhs.push_back(std::move(rhs));
  };

  for (auto& [row, rhs] : ge_rows) {
    Rational constant = 0;
    SparseRow sub = substitute(row, constant);
    add_ge(std::move(sub), rhs - constant);
  }
  // Eliminated variables keep their sign constraint.
  for (const auto& [orig, def] : red.eliminated) {
    add_ge(def.second, -def.first);
  }
  red.objective_offset = 0;
  red.objective = substitute(lp.objective, red.objective_offset);
  return red;
}

}  // namespace detail

namespace detail {

// Columns of the dual system: y_0..y_{M-1} (one per >= row), s_0..s_{F-1}
// (slacks), then artificials for rows with negative cost.
template <class T>
TableauT<T> build_dual(const Reduced& red, const std::vector<Rational>& cost, std::size_t& n_art) {
  const std::size_t F = red.free_vars.size();
  const std::size_t M = red.ineq_rows.size();
  auto conv = [](const Rational& v) {
    if constexpr (std::is_same_v<T, double>) {
      return v.get_d();
    } else {
      return v;
    }
  };
  n_art = 0;
  for (std::size_t j = 0; j < F; ++j) n_art += cost[j] < 0;
  std::size_t n_cols = M + F + n_art;
  std::vector<std::vector<T>> rows(F, std::vector<T>(n_cols, T(0)));
  std::vector<T> rhs(F);
  std::vector<int> basis(F);
  for (std::size_t i = 0; i < M; ++i) {
    for (const auto& [j, v] : red.ineq_rows[i]) rows[j][i] = conv(v);
  }
  std::size_t a = 0;
  for (std::size_t j = 0; j < F; ++j) {
    rows[j][M + j] = 1;
    rhs[j] = conv(cost[j]);
    if (cost[j] < 0) {
      for (std::size_t i = 0; i < M + F; ++i) rows[j][i] = -rows[j][i];
      rhs[j] = -rhs[j];
      rows[j][M + F + a] = 1;
      basis[j] = static_cast<int>(M + F + a);
      ++a;
    } else {
      basis[j] = static_cast<int>(M + j);
    }
  }
  return TableauT<T>(std::move(rows), std::move(rhs), std::move(basis), n_cols);
}

enum class DualStatus { kOptimal, kInfeasible, kUnbounded };

// Two-phase maximization of ineq_rhs . y over the dual system.
template <class T>
DualStatus solve_dual(const Reduced& red, const std::vector<Rational>& cost, std::unique_ptr<TableauT<T>>& out,
                      std::size_t max_pivots = 0) {
  const std::size_t F = red.free_vars.size();
  const std::size_t M = red.ineq_rows.size();
  std::size_t n_art = 0;
  out = std::make_unique<TableauT<T>>(build_dual<T>(red, cost, n_art));
  TableauT<T>& t = *out;
  std::size_t n_cols = M + F + n_art;
  if (n_art > 0) {
    std::vector<T> phase1(n_cols, T(0));
    for (std::size_t a = 0; a < n_art; ++a) phase1[M + F + a] = -1;
    std::vector<bool> all(n_cols, true);
    t.maximize(phase1, all, max_pivots);
    if (sign(t.value()) < 0) return DualStatus::kInfeasible;
    // Drive zero-level artificials out of the basis.
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
      if (static_cast<std::size_t>(t.basic(i)) < M + F) continue;
      std::size_t j = 0;
      while (j < M + F && sign(t.row(i)[j]) == 0) ++j;
      if (j == M + F) throw std::logic_error("lp_solve: rank-deficient dual system");
      t.pivot(i, j);
    }
  }
  std::vector<T> phase2(n_cols, T(0));
  for (std::size_t i = 0; i < M; ++i) {
    if constexpr (std::is_same_v<T, double>) {
      phase2[i] = red.ineq_rhs[i].get_d();
    } else {
      phase2[i] = red.ineq_rhs[i];
    }
  }
  std::vector<bool> eligible(n_cols, false);
  for (std::size_t j = 0; j < M + F; ++j) eligible[j] = true;
  return t.maximize(phase2, eligible, max_pivots) ? DualStatus::kOptimal : DualStatus::kUnbounded;
}

// Solves the square system given by `cols` (dense, column-major over F rows)
// exactly; transpose solves cols^T z = b instead. Returns nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(const std::vector<std::vector<Rational>>& cols,
                                                          const std::vector<Rational>& b, bool transpose) {
  const std::size_t n = b.size();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) {
      if (transpose) {
        a[c][r] = cols[c][r];
      } else {
        a[r][c] = cols[c][r];
      }
    }
  for (std::size_t r = 0; r < n; ++r) a[r][n] = b[r];
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    while (p < n && sgn(a[p][col]) == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[col]);
    Rational inv = 1 / a[col][col];
    for (std::size_t j = col; j <= n; ++j)
      if (sgn(a[col][j]) != 0) a[col][j] *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || sgn(a[i][col]) == 0) continue;
      Rational f = a[i][col];
      for (std::size_t j = col; j <= n; ++j)
        if (sgn(a[col][j]) != 0) a[i][j] -= f * a[col][j];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = a[r][n];
  return x;
}

struct DualCertificate {
  Rational value;              // ineq_rhs . y
  std::vector<Rational> x;     // primal point on the reduced variables
};

// Exact check of a candidate optimal dual basis: y_B solves B y_B = cost with
// y_B >= 0, and the primal point x solving B^T x = d_B is feasible for the
// reduced primal. Weak duality then proves optimality.
inline std::optional<DualCertificate> certify_basis(const Reduced& red, const std::vector<Rational>& cost,
                                                    const std::vector<int>& basis) {
  const std::size_t F = red.free_vars.size();
  const std::size_t M = red.ineq_rows.size();
  std::vector<std::vector<Rational>> cols;
  std::vector<Rational> d;
  for (int b : basis) {
    std::vector<Rational> col(F, 0);
    if (b < 0 || static_cast<std::size_t>(b) >= M + F) return std::nullopt;
    if (static_cast<std::size_t>(b) < M) {
      for (const auto& [j, v] : red.ineq_rows[b]) col[j] = v;
      d.push_back(red.ineq_rhs[b]);
    } else {
      col[b - M] = 1;
      d.push_back(0);
    }
    cols.push_back(std::move(col));
  }
  auto y = solve_square(cols, cost, false);
  if (!y) return std::nullopt;
  for (const Rational& v : *y)
    if (v < 0) return std::nullopt;
  auto x = solve_square(cols, d, true);
  if (!x) return std::nullopt;
  for (const Rational& v : *x)
    if (v < 0) return std::nullopt;
  for (std::size_t i = 0; i < M; ++i) {
    Rational lhs = 0;
    for (const auto& [j, v] : red.ineq_rows[i]) lhs += v * (*x)[j];
    if (lhs < red.ineq_rhs[i]) return std::nullopt;
  }
  DualCertificate cert;
  cert.value = 0;
  for (std::size_t k = 0; k < basis.size(); ++k) cert.value += d[k] * (*y)[k];
  cert.x = std::move(*x);
  return cert;
}

}  // namespace detail

// Exact rational LP. The primal (min c.x, A x >= b, x >= 0, after equality
// elimination) is solved through its dual (max b.y, A^T y <= c, y >= 0). A
// floating-point pass of the same simplex proposes an optimal basis, which is
// certified exactly; if certification fails the two-phase simplex reruns in
// rationals. Either way the primal point is checked exactly against every
// original constraint.
enum class LpMethod { kGuided, kExact };

inline LpSolution lp_solve(const LinearProgram& lp, LpMethod method = LpMethod::kGuided) {
  detail::Reduced red = detail::presolve(lp);
  const std::size_t F = red.free_vars.size();
  const std::size_t M = red.ineq_rows.size();

  std::vector<Rational> c(F, 0);
  for (const auto& [j, v] : red.objective) c[j] = v;

  std::optional<detail::DualCertificate> cert;
  std::size_t pivots = 0;
  if (method == LpMethod::kGuided) {
    std::unique_ptr<detail::TableauT<double>> guide;
    try {
      if (detail::solve_dual<double>(red, c, guide, 20 * (M + F) + 1000) == detail::DualStatus::kOptimal) {
        pivots = guide->pivots();
        cert = detail::certify_basis(red, c, guide->basis());
      }
    } catch (const detail::TableauT<double>::IterationLimit&) {
    } catch (const std::logic_error&) {
    }
  }

  if (!cert) {
    std::unique_ptr<detail::Tableau> t;
    detail::DualStatus status = detail::solve_dual<Rational>(red, c, t);
    if (status == detail::DualStatus::kInfeasible) {
      // Dual infeasible: primal is unbounded if it is feasible at all. The
      // primal is feasible iff the dual with zero cost is bounded.
      std::unique_ptr<detail::Tableau> t0;
      if (detail::solve_dual<Rational>(red, std::vector<Rational>(F, 0), t0) == detail::DualStatus::kUnbounded) {
        throw InfeasibleError();
      }
      throw UnboundedError();
    }
    if (status == detail::DualStatus::kUnbounded) throw InfeasibleError();
    // Primal point on the reduced variables: x_j = -(reduced cost of slack j).
    cert.emplace();
    cert->value = t->value();
    cert->x.resize(F);
    for (std::size_t j = 0; j < F; ++j) cert->x[j] = -t->reduced()[M + j];
    pivots = t->pivots();
  }
  const std::vector<Rational>& xr = cert->x;

  std::vector<Rational> x(lp.n_vars, 0);
  for (std::size_t j = 0; j < F; ++j) x[red.free_vars[j]] = xr[j];
  for (const auto& [orig, def] : red.eliminated) {
    Rational v = def.first;
    for (const auto& [j, coef] : def.second) v += coef * xr[j];
    x[orig] = v;
  }

  // Certificate check against the original problem.
  for (int j = 0; j < lp.n_vars; ++j) {
    if (x[j] < 0) throw std::logic_error("lp_solve: certificate has a negative coordinate");
  }
  for (const LinearConstraint& con : lp.constraints) {
    Rational lhs = 0;
    for (const auto& [j, v] : con.terms) lhs += v * x[j];
    bool ok = con.relation == Relation::kEq   ? lhs == con.rhs
              : con.relation == Relation::kGe ? lhs >= con.rhs
                                              : lhs <= con.rhs;
    if (!ok) throw std::logic_error("lp_solve: certificate violates a constraint");
  }
  Rational primal = 0;
  for (const auto& [j, v] : lp.objective) primal += v * x[j];
  if (primal != cert->value + red.objective_offset) {
    throw std::logic_error("lp_solve: duality gap in certificate");
  }

  LpSolution sol;
  sol.optimum = primal;
  sol.point = std::move(x);
  sol.pivots = pivots;
  return sol;
}

}  // namespace mts
