#pragma once

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mts/error.hpp"
#include "mts/rational.hpp"
#include "mts/scheme.hpp"
#include "mts/simplex.hpp"
#include "mts/structure.hpp"
#include "mts/verify.hpp"

namespace mts {

inline constexpr int kConeVarCap = 8;

// The cap can be lowered through MTS_MAX_CONE_VARS but never raised.
inline int max_cone_vars() {
  const char* env = std::getenv("MTS_MAX_CONE_VARS");
  if (env == nullptr || *env == '\0') return kConeVarCap;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return kConeVarCap;
  return static_cast<int>(std::min<long>(v, kConeVarCap));
}

inline void require_cone_size(int n_vars) {
  if (n_vars < 1) throw Error("cone needs at least one variable");
  if (n_vars > max_cone_vars()) {
    throw Error("cone size cap exceeded: " + std::to_string(n_vars) + " variables, cap " +
                std::to_string(max_cone_vars()));
  }
}

// One coordinate per nonempty subset of the variables; h of the empty set is 0.
struct EntropyVector {
  int n_vars = 0;
  std::vector<Rational> coords;  // coords[mask - 1]

  explicit EntropyVector(int n = 0) : n_vars(n), coords(n > 0 ? (std::size_t{1} << n) - 1 : 0, 0) {}

  Rational h(VarMask mask) const { return mask == 0 ? Rational(0) : coords.at(mask - 1); }
  void set(VarMask mask, Rational v) {
    if (mask == 0) throw Error("the empty set has no coordinate");
    coords.at(mask - 1) = std::move(v);
  }
  friend bool operator==(const EntropyVector&, const EntropyVector&) = default;
};

enum class RowTag { kElemental, kC0, kC1, kC2, kC3 };

inline std::string to_string(RowTag t) {
  switch (t) {
    case RowTag::kElemental: return "elemental";
    case RowTag::kC0: return "C0";
    case RowTag::kC1: return "C1";
    case RowTag::kC2: return "C2";
    case RowTag::kC3: return "C3";
  }
  return "?";
}

// sum coef * h_mask  (relation)  rhs, terms sorted by mask, no zero coefficients.
struct ConeRow {
  std::vector<std::pair<VarMask, Rational>> terms;
  Relation relation = Relation::kGe;
  Rational rhs = 0;
  RowTag tag = RowTag::kElemental;
};

struct ConstraintSystem {
  int n_vars = 0;
  std::vector<ConeRow> rows;

  std::size_t count(RowTag tag) const {
    std::size_t n = 0;
    for (const ConeRow& r : rows) n += r.tag == tag;
    return n;
  }
};

namespace detail {

inline ConeRow make_row(std::map<VarMask, Rational> acc, Relation rel, RowTag tag) {
  ConeRow r;
  r.relation = rel;
  r.tag = tag;
  for (auto& [m, v] : acc) {
    if (m != 0 && v != 0) r.terms.emplace_back(m, std::move(v));
  }
  return r;
}

inline void add_term(std::map<VarMask, Rational>& acc, VarMask m, const Rational& v) {
  if (m == 0) return;
  acc[m] += v;
}

inline Rational evaluate(const ConeRow& row, const EntropyVector& x) {
  Rational v = 0;
  for (const auto& [m, c] : row.terms) v += c * x.h(m);
  return v;
}

inline bool satisfied(const ConeRow& row, const Rational& value) {
  switch (row.relation) {
    case Relation::kEq: return value == row.rhs;
    case Relation::kGe: return value >= row.rhs;
    case Relation::kLe: return value <= row.rhs;
  }
  return false;
}

}  // namespace detail

// h_all - h_{all\i} >= 0 for each i, and I(i;j|K) >= 0 for i<j, K in the rest.
inline ConstraintSystem elemental_inequalities(int n_vars) {
  if (n_vars < 2) throw Error("elemental inequalities need at least two variables");
  require_cone_size(n_vars);
  ConstraintSystem sys;
  sys.n_vars = n_vars;
  const VarMask all = (VarMask{1} << n_vars) - 1;
  for (int i = 0; i < n_vars; ++i) {
    std::map<VarMask, Rational> acc;
    detail::add_term(acc, all, 1);
    detail::add_term(acc, all & ~bit(static_cast<std::size_t>(i)), -1);
    sys.rows.push_back(detail::make_row(std::move(acc), Relation::kGe, RowTag::kElemental));
  }
  for (int i = 0; i < n_vars; ++i) {
    for (int j = i + 1; j < n_vars; ++j) {
      VarMask bi = bit(static_cast<std::size_t>(i));
      VarMask bj = bit(static_cast<std::size_t>(j));
      VarMask rest = all & ~bi & ~bj;
      // Every subset K of rest, including the empty set.
      for (VarMask k = rest;; k = (k - 1) & rest) {
        std::map<VarMask, Rational> acc;
        detail::add_term(acc, k | bi, 1);
        detail::add_term(acc, k | bj, 1);
        detail::add_term(acc, k | bi | bj, -1);
        detail::add_term(acc, k, -1);
        sys.rows.push_back(detail::make_row(std::move(acc), Relation::kGe, RowTag::kElemental));
        if (k == 0) break;
      }
    }
  }
  return sys;
}

// Equality rows for the independence (C0), decodability (C1) and security
// (C2 strong, C3 weak) conditions. By default only the extreme sets are used:
// |A| = t_k for C1 and |A| = t_k - 1 for C2/C3; within the Shannon cone these
// imply the rows for larger and smaller sets. `full` emits every set.
inline ConstraintSystem system_constraints(const StructurePair& structure, Security security,
                                           bool full = false) {
  const StructurePair s = validate(structure);
  const int n_vars = static_cast<int>(n_variables(s));
  require_cone_size(n_vars);
  const AccessArray& arr = s.array;
  const int N = s.n;
  const int K = arr.K();

  ConstraintSystem sys;
  sys.n_vars = n_vars;
  std::set<std::vector<std::pair<VarMask, std::string>>> seen;
  auto push = [&](std::map<VarMask, Rational> acc, RowTag tag) {
    ConeRow r = detail::make_row(std::move(acc), Relation::kEq, tag);
    if (r.terms.empty()) return;
    // Rows equal up to a nonzero scale are the same hyperplane.
    Rational lead = r.terms.front().second;
    std::vector<std::pair<VarMask, std::string>> key;
    for (const auto& [m, v] : r.terms) key.emplace_back(m, to_string(Rational(v / lead)));
    if (!seen.insert(std::move(key)).second) return;
    sys.rows.push_back(std::move(r));
  };

  {
    std::map<VarMask, Rational> acc;
    detail::add_term(acc, all_secrets_mask(s), 1);
    for (int k = 1; k <= K; ++k)
      for (int j = 1; j <= arr.count(k); ++j) detail::add_term(acc, bit(index_of(s, VariableId::secret(k, j))), -1);
    push(std::move(acc), RowTag::kC0);
  }

  for (int k = 1; k <= K; ++k) {
    const int t = arr.threshold(k);
    const VarMask tail = secrets_mask(s, k, K);
    for (int size = t; size <= (full ? N : t); ++size) {
      detail::for_each_subset(N, size, [&](std::uint32_t a) {
        VarMask pa = shares_mask(s, a);
        std::map<VarMask, Rational> acc;
        detail::add_term(acc, tail | pa, 1);
        detail::add_term(acc, pa, -1);
        push(std::move(acc), RowTag::kC1);
      });
    }
  }

  auto secure_rows = [&](VarMask secret, int t, RowTag tag) {
    for (int size = full ? 0 : t - 1; size <= t - 1; ++size) {
      detail::for_each_subset(N, size, [&](std::uint32_t a) {
        VarMask pa = shares_mask(s, a);
        std::map<VarMask, Rational> acc;
        detail::add_term(acc, secret | pa, 1);
        detail::add_term(acc, pa, -1);
        detail::add_term(acc, secret, -1);
        push(std::move(acc), tag);
      });
    }
  };
  if (security == Security::kStrong) {
    for (int k = 1; k <= K; ++k) secure_rows(secrets_mask(s, 1, k), arr.threshold(k), RowTag::kC2);
  } else {
    for (int k = 1; k <= K; ++k)
      for (int j = 1; j <= arr.count(k); ++j)
        secure_rows(bit(index_of(s, VariableId::secret(k, j))), arr.threshold(k), RowTag::kC3);
  }
  return sys;
}

// Elemental inequalities plus the structure's condition rows.
inline ConstraintSystem cone_system(const StructurePair& s, Security security, bool full = false) {
  ConstraintSystem sys = elemental_inequalities(static_cast<int>(n_variables(s)));
  ConstraintSystem extra = system_constraints(s, security, full);
  for (ConeRow& r : extra.rows) sys.rows.push_back(std::move(r));
  return sys;
}

// Index of the first violated row, if any.
inline std::optional<std::size_t> first_violation(const ConstraintSystem& sys, const EntropyVector& x) {
  if (x.n_vars != sys.n_vars) throw Error("vector dimension does not match the constraint system");
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    if (!detail::satisfied(sys.rows[i], detail::evaluate(sys.rows[i], x))) return i;
  }
  return std::nullopt;
}

inline bool in_cone(const StructurePair& s, Security security, const EntropyVector& x) {
  return !first_violation(cone_system(s, security), x).has_value();
}

inline EntropyVector entropy_vector(const RankProfile& rp) {
  const int n = static_cast<int>(rp.scheme().n_variables());
  require_cone_size(n);
  EntropyVector x(n);
  for (VarMask m = 1; m < (VarMask{1} << n); ++m) x.set(m, rp.entropy(m));
  return x;
}

// "mask:coef mask:coef ... >= rhs tag", one row per line.
inline std::string dump(const ConstraintSystem& sys) {
  std::ostringstream out;
  for (const ConeRow& r : sys.rows) {
    for (const auto& [m, v] : r.terms) out << m << ":" << to_string(v) << " ";
    out << (r.relation == Relation::kEq ? "=" : r.relation == Relation::kGe ? ">=" : "<=") << " "
        << to_string(r.rhs) << " " << to_string(r.tag) << "\n";
  }
  return out.str();
}

namespace detail {

// Coordinates are LP variables mask - 1; extra variables follow.
inline LinearProgram cone_program(const ConstraintSystem& sys, int extra_vars) {
  LinearProgram lp;
  lp.n_vars = static_cast<int>((std::size_t{1} << sys.n_vars) - 1) + extra_vars;
  for (const ConeRow& r : sys.rows) {
    LinearConstraint c;
    c.relation = r.relation;
    c.rhs = r.rhs;
    for (const auto& [m, v] : r.terms) c.terms.emplace_back(static_cast<int>(m - 1), v);
    lp.constraints.push_back(std::move(c));
  }
  return lp;
}

inline int coord(VarMask m) { return static_cast<int>(m - 1); }

// Orbit of each coordinate under permutations of the participants and of the
// secrets within each sub-array: a mask is identified by how many shares and
// how many secrets of each sub-array it holds. Index mask - 1 as in coord().
inline std::vector<int> symmetry_orbits(const StructurePair& s, int& n_orbits) {
  const std::size_t n = n_variables(s);
  std::vector<VarMask> groups;
  for (int k = 1; k <= s.array.K(); ++k) groups.push_back(secrets_mask(s, k, k));
  groups.push_back(all_shares_mask(s));
  std::map<std::vector<int>, int> ids;
  std::vector<int> out;
  for (VarMask m = 1; m < (VarMask{1} << n); ++m) {
    std::vector<int> key;
    for (VarMask g : groups) key.push_back(std::popcount(m & g));
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  n_orbits = static_cast<int>(ids.size());
  return out;
}

// Restricts a program to points constant on each orbit: variable j becomes
// var_map[j] (variables past var_map keep their order after the orbits).
inline LinearProgram fold(const LinearProgram& lp, const std::vector<int>& var_map, int n_orbits) {
  const int tail = lp.n_vars - static_cast<int>(var_map.size());
  auto map = [&](int j) { return j < static_cast<int>(var_map.size()) ? var_map[j] : n_orbits + j - static_cast<int>(var_map.size()); };
  auto fold_terms = [&](const std::vector<std::pair<int, Rational>>& terms) {
    std::map<int, Rational> acc;
    for (const auto& [j, v] : terms) acc[map(j)] += v;
    std::vector<std::pair<int, Rational>> out;
    for (auto& [j, v] : acc)
      if (v != 0) out.emplace_back(j, v);
    return out;
  };
  LinearProgram out;
  out.n_vars = n_orbits + tail;
  for (const LinearConstraint& c : lp.constraints) out.constraints.push_back({fold_terms(c.terms), c.relation, c.rhs});
  out.objective = fold_terms(lp.objective);
  return out;
}

}  // namespace detail

// Exact minimum of the ratio over the Shannon cone cut by the structure's
// conditions. Normalization: sigma and tau fix every secret at length >= 1;
// sigma-avg and tau-avg fix the secret lengths to sum to |T|. The cone is
// closed under scaling, so these choices do not change the value. The
// program, its objective and its normalization are all invariant under
// permuting participants and permuting secrets within a sub-array, so the
// average of an optimum over those permutations is again optimal; the LP is
// solved over orbit coordinates only.
inline Rational lower_bound_ratio(const StructurePair& structure, RatioKind kind) {
  const StructurePair s = validate(structure);
  ConstraintSystem sys = cone_system(s, kind.security);
  const int N = s.n;
  const int total = s.array.total();
  const bool sigma = kind.ratio == Ratio::kSigma;
  LinearProgram lp = detail::cone_program(sys, sigma ? 1 : 0);
  const int z = lp.n_vars - 1;

  std::vector<VarMask> secrets;
  for (int i = 0; i < total; ++i) secrets.push_back(bit(static_cast<std::size_t>(i)));
  std::vector<VarMask> shares;
  for (int i = 1; i <= N; ++i) shares.push_back(bit(index_of(s, VariableId::share(i))));

  const bool per_secret = kind.ratio == Ratio::kSigma || kind.ratio == Ratio::kTau;
  if (per_secret) {
    for (VarMask m : secrets) lp.constraints.push_back({{{detail::coord(m), 1}}, Relation::kGe, 1});
  } else {
    LinearConstraint c;
    c.relation = Relation::kEq;
    c.rhs = total;
    for (VarMask m : secrets) c.terms.emplace_back(detail::coord(m), 1);
    lp.constraints.push_back(std::move(c));
  }

  switch (kind.ratio) {
    case Ratio::kSigma:
      for (VarMask m : shares) lp.constraints.push_back({{{z, 1}, {detail::coord(m), -1}}, Relation::kGe, 0});
      lp.objective = {{z, 1}};
      break;
    case Ratio::kSigmaAvg:
      for (VarMask m : shares) lp.objective.emplace_back(detail::coord(m), make_rational(1, N));
      break;
    case Ratio::kTau:
    case Ratio::kTauAvg:
      lp.objective.emplace_back(detail::coord(all_shares_mask(s)), 1);
      for (VarMask m : secrets) lp.objective.emplace_back(detail::coord(m), -1);
      break;
  }
  int n_orbits = 0;
  std::vector<int> orbits = detail::symmetry_orbits(s, n_orbits);
  return lp_solve(detail::fold(lp, orbits, n_orbits)).optimum;
}

// Where each variable of `small` sits in `big`: shares map to shares, and the
// secrets of a sub-array map to the first secrets of the sub-array of `big`
// with the same threshold.
inline std::vector<std::size_t> variable_embedding(const StructurePair& small, const StructurePair& big) {
  validate(small);
  validate(big);
  if (small.n != big.n) throw Error("structures have different participant counts");
  if (!subset_of(small.array, big.array)) throw Error("access array is not contained in the target");
  std::vector<std::size_t> map;
  for (const SubArray& a : small.array.subarrays) {
    int kb = 1;
    while (big.array.threshold(kb) != a.threshold) ++kb;
    for (int j = 1; j <= a.count; ++j) map.push_back(index_of(big, VariableId::secret(kb, j)));
  }
  for (int i = 1; i <= small.n; ++i) map.push_back(index_of(big, VariableId::share(i)));
  return map;
}

// Lifts a point of the small structure's cone: X_a = x_{a \ B}, B the added
// secrets. Added secrets get zero entropy and the result lies in the big cone.
inline EntropyVector extend_vector(const EntropyVector& x, const StructurePair& small, const StructurePair& big,
                                   Security security = Security::kWeak) {
  if (x.n_vars != static_cast<int>(n_variables(small))) throw Error("vector dimension does not match the structure");
  std::vector<std::size_t> map = variable_embedding(small, big);
  if (!in_cone(small, security, x)) throw Error("vector is outside the cone of the smaller structure");
  const int nb = static_cast<int>(n_variables(big));
  require_cone_size(nb);
  std::vector<int> back(static_cast<std::size_t>(nb), -1);
  for (std::size_t i = 0; i < map.size(); ++i) back[map[i]] = static_cast<int>(i);
  EntropyVector out(nb);
  for (VarMask m = 1; m < (VarMask{1} << nb); ++m) {
    VarMask small_mask = 0;
    for (int i = 0; i < nb; ++i) {
      if ((m & bit(static_cast<std::size_t>(i))) && back[i] >= 0) small_mask |= bit(static_cast<std::size_t>(back[i]));
    }
    out.set(m, x.h(small_mask));
  }
  return out;
}

// Projection onto the coordinates of the small structure's variables.
inline EntropyVector restrict_vector(const EntropyVector& x, const StructurePair& big, const StructurePair& small) {
  if (x.n_vars != static_cast<int>(n_variables(big))) throw Error("vector dimension does not match the structure");
  std::vector<std::size_t> map = variable_embedding(small, big);
  const int ns = static_cast<int>(map.size());
  EntropyVector out(ns);
  for (VarMask m = 1; m < (VarMask{1} << ns); ++m) {
    VarMask big_mask = 0;
    for (int i = 0; i < ns; ++i)
      if (m & bit(static_cast<std::size_t>(i))) big_mask |= bit(map[static_cast<std::size_t>(i)]);
    out.set(m, x.h(big_mask));
  }
  return out;
}

// alpha_all h(P_[N]) + sum alpha_i h(P_i) >= sum beta_j h(S_j), secrets in the
// canonical order of the structure the bound is stated for.
struct LinearBound {
  Rational alpha_all = 0;
  std::vector<Rational> alpha;  // one per participant
  std::vector<Rational> beta;   // one per secret
};

// Coefficient form of a dtb, tvb, tsb or tsdb check produced by audit_bounds.
inline LinearBound bound_row(const StructurePair& s, const BoundCheck& b) {
  const AccessArray& arr = s.array;
  const int K = arr.K();
  LinearBound out;
  out.alpha.assign(static_cast<std::size_t>(s.n), 0);
  out.beta.assign(static_cast<std::size_t>(arr.total()), 0);
  auto beta = [&](int k, int j) -> Rational& { return out.beta[index_of(s, VariableId::secret(k, j))]; };
  if (b.id == "dtb") {
    out.alpha[static_cast<std::size_t>(b.shares.at(0) - 1)] = 1;
    for (int k = 1; k <= K; ++k) beta(k, b.secrets.at(k - 1)) = 1;
  } else if (b.id == "tvb") {
    out.alpha_all = 1;
    for (int k = 1; k <= K; ++k) beta(k, b.secrets.at(k - 1)) = arr.threshold(k);
  } else if (b.id == "tsb" || b.id == "tsdb") {
    const int k = b.k;
    const int tk = arr.threshold(k);
    const bool diff = b.id == "tsdb";
    if (diff) {
      for (int m : b.shares) out.alpha[static_cast<std::size_t>(m - 1)] = 1;
    } else {
      out.alpha_all = 1;
    }
    for (int i = 1; i < k; ++i) beta(i, b.secrets.at(i - 1)) = diff ? tk : arr.threshold(i);
    for (int i = k; i <= K; ++i)
      for (int j = 1; j <= arr.count(i); ++j) beta(i, j) = 1;
    if (diff) {
      for (int i = k + 1; i <= K; ++i) beta(i, b.secrets.at(i - 1)) += tk - arr.threshold(i);
    }
  } else {
    throw Error("no coefficient form for bound " + b.id);
  }
  return out;
}

// True when lhs - rhs >= 0 on the whole cone of `s`. The cone is homogeneous,
// so the minimum is either 0 or unbounded below.
inline bool bound_valid(const LinearBound& bound, const StructurePair& s, Security security) {
  if (bound.alpha.size() != static_cast<std::size_t>(s.n) ||
      bound.beta.size() != static_cast<std::size_t>(s.array.total())) {
    throw Error("bound does not match the structure");
  }
  LinearProgram lp = detail::cone_program(cone_system(s, security), 0);
  std::map<int, Rational> obj;
  if (bound.alpha_all != 0) obj[detail::coord(all_shares_mask(s))] += bound.alpha_all;
  for (int i = 1; i <= s.n; ++i)
    obj[detail::coord(bit(index_of(s, VariableId::share(i))))] += bound.alpha[static_cast<std::size_t>(i - 1)];
  for (std::size_t j = 0; j < bound.beta.size(); ++j) obj[detail::coord(bit(j))] -= bound.beta[j];
  for (auto& [j, v] : obj)
    if (v != 0) lp.objective.emplace_back(j, v);
  try {
    return lp_solve(lp).optimum >= 0;
  } catch (const UnboundedError&) {
    return false;
  }
}

// Drops the coefficients of the secrets `small` does not have and reports
// whether the truncated bound still holds on the small structure's cone.
inline bool check_truncation(const LinearBound& bound, const StructurePair& small, const StructurePair& big,
                             Security security = Security::kWeak) {
  for (const Rational& b : bound.beta)
    if (b < 0) throw Error("precondition: secret coefficients must be nonnegative");
  std::vector<std::size_t> map = variable_embedding(small, big);
  if (!bound_valid(bound, big, security)) throw Error("precondition: bound does not hold on the larger structure");
  LinearBound cut;
  cut.alpha_all = bound.alpha_all;
  cut.alpha = bound.alpha;
  const std::size_t ts = static_cast<std::size_t>(small.array.total());
  for (std::size_t j = 0; j < ts; ++j) cut.beta.push_back(bound.beta.at(map[j]));
  return bound_valid(cut, small, security);
}

}  // namespace mts
