#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mts/error.hpp"
#include "mts/field.hpp"
#include "mts/optimal.hpp"
#include "mts/plan.hpp"
#include "mts/scheme.hpp"
#include "mts/structure.hpp"
#include "mts/verify.hpp"

namespace mts {

inline constexpr int kFieldSearchAttempts = 50;

// t x |elements| matrix with entry (r, c) = elements[c]^r.
inline MatrixFq vandermonde(std::size_t t, const std::vector<Element>& elements, Prime q) {
  if (t < 1) throw Error("vandermonde needs at least one row");
  std::set<Element> seen;
  for (Element e : elements) {
    if (e >= q.value()) throw Error("vandermonde element out of range");
    if (!seen.insert(e).second) throw Error("duplicate vandermonde element");
  }
  MatrixFq m(q, t, elements.size());
  for (std::size_t c = 0; c < elements.size(); ++c) {
    Element v = 1;
    for (std::size_t r = 0; r < t; ++r) {
      m(r, c) = v;
      v = gf::mul(v, elements[c], q);
    }
  }
  return m;
}

// V(t,[a]): elements 1..a.
inline MatrixFq vandermonde_range(std::size_t t, std::size_t a, Prime q) {
  std::vector<Element> e(a);
  std::iota(e.begin(), e.end(), Element{1});
  return vandermonde(t, e, q);
}

namespace detail {

inline MatrixFq column_range(const MatrixFq& m, std::size_t first, std::size_t count) {
  std::vector<std::size_t> cols(count);
  std::iota(cols.begin(), cols.end(), first);
  return m.select_columns(cols);
}

// Places `part` into the top rows of a rows x part.cols() zero matrix.
inline MatrixFq pad_rows(const MatrixFq& part, std::size_t rows) {
  MatrixFq out(part.modulus(), rows, part.cols());
  for (std::size_t r = 0; r < part.rows(); ++r)
    for (std::size_t c = 0; c < part.cols(); ++c) out(r, c) = part(r, c);
  return out;
}

inline MatrixFq side_by_side(const MatrixFq& a, const MatrixFq& b) {
  const MatrixFq* parts[] = {&a, &b};
  return hstack(a.modulus(), a.rows(), parts);
}

inline std::shared_ptr<Recipe> make_recipe(std::string label, std::uint64_t min_order, bool needs_check,
                                           std::function<LinearScheme(Prime)> build) {
  auto r = std::make_shared<Recipe>();
  r->label = std::move(label);
  r->min_order = min_order;
  r->needs_check = needs_check;
  r->build = std::move(build);
  return r;
}

inline void require_structure(int n, int t) {
  if (n < 2 || t < 2 || t > n) throw Error("threshold out of range");
}

}  // namespace detail

// V(t,[N+1]) over the given prime: secret is column 1, share i is column i+1.
inline LinearScheme single_threshold_over(int t, int n, Prime q) {
  detail::require_structure(n, t);
  MatrixFq v = vandermonde_range(static_cast<std::size_t>(t), static_cast<std::size_t>(n + 1), q);
  std::vector<MatrixFq> blocks;
  for (int c = 0; c <= n; ++c) blocks.push_back(detail::column_range(v, static_cast<std::size_t>(c), 1));
  auto recipe = detail::make_recipe("V(" + std::to_string(t) + ",[" + std::to_string(n + 1) + "])",
                                    static_cast<std::uint64_t>(n + 2), false,
                                    [t, n](Prime p) { return single_threshold_over(t, n, p); });
  return LinearScheme(make_structure(n, {{t, 1}}), q, static_cast<std::size_t>(t), std::move(blocks),
                      std::move(recipe));
}

inline LinearScheme build_single_threshold(int t, int n) {
  detail::require_structure(n, t);
  return single_threshold_over(t, n, next_prime_at_least(static_cast<std::uint64_t>(n + 2)));
}

// V(t,[n+N]) with n = min(t,m): the first n columns are secrets S_{1,1..n},
// the remaining N are shares; secrets n+1..m are zero-width.
inline LinearScheme weak_block_over(int n_part, int t, int m, Prime q) {
  detail::require_structure(n_part, t);
  if (m < 1) throw Error("empty sub-array");
  int n = std::min(t, m);
  MatrixFq v = vandermonde_range(static_cast<std::size_t>(t), static_cast<std::size_t>(n + n_part), q);
  std::vector<MatrixFq> blocks;
  for (int j = 0; j < m; ++j) {
    if (j < n) {
      blocks.push_back(detail::column_range(v, static_cast<std::size_t>(j), 1));
    } else {
      blocks.emplace_back(q, static_cast<std::size_t>(t), 0);
    }
  }
  for (int i = 0; i < n_part; ++i) blocks.push_back(detail::column_range(v, static_cast<std::size_t>(n + i), 1));
  auto recipe = detail::make_recipe("V(" + std::to_string(t) + ",[" + std::to_string(n + n_part) + "])",
                                    static_cast<std::uint64_t>(n + n_part + 1), false,
                                    [n_part, t, m](Prime p) { return weak_block_over(n_part, t, m, p); });
  return LinearScheme(make_structure(n_part, {{t, m}}), q, static_cast<std::size_t>(t), std::move(blocks),
                      std::move(recipe));
}

inline LinearScheme build_weak_block(int n_part, int t, int m) {
  detail::require_structure(n_part, t);
  if (m < 1) throw Error("empty sub-array");
  int n = std::min(t, m);
  return weak_block_over(n_part, t, m, next_prime_at_least(static_cast<std::uint64_t>(n + n_part + 1)));
}

namespace detail {

// Instantiates `make` over primes from `start` until the weak verifier
// accepts, at most kFieldSearchAttempts primes.
inline LinearScheme searched(std::uint64_t start, const std::function<LinearScheme(Prime)>& make,
                             const std::string& label) {
  Prime q = next_prime_at_least(start);
  for (int attempt = 0; attempt < kFieldSearchAttempts; ++attempt) {
    LinearScheme s = make(q);
    if (check_conditions(s, Security::kWeak).ok()) return s;
    q = next_prime_at_least(q.value() + 1);
  }
  throw Error("field search failed for " + label);
}

}  // namespace detail

// B(N,T1,T2) over a given prime, without verification.
inline LinearScheme b_matrix_over(int n, SubArray t1, SubArray t2, Prime q) {
  const int m1 = t1.count, k1 = t1.threshold, m2 = t2.count, k2 = t2.threshold;
  if (!(m1 > k1 && k1 > k2 && k2 > m2 && m2 >= 1)) {
    throw Error("B requires m1 > t1 > t2 > m2 >= 1");
  }
  if (k1 > n) throw Error("threshold out of range");
  const std::size_t rows = static_cast<std::size_t>(m1 * k2 - k1 * m2);
  const std::size_t c1 = static_cast<std::size_t>(k2 - m2);
  const std::size_t c2 = static_cast<std::size_t>(m1 - k1);

  MatrixFq first = vandermonde_range(rows, static_cast<std::size_t>(m1 + n) * c1, q);
  MatrixFq second = detail::pad_rows(
      vandermonde_range(c2 * static_cast<std::size_t>(k2), static_cast<std::size_t>(n) * c2, q), rows);
  MatrixFq ident = detail::pad_rows(MatrixFq::identity(q, static_cast<std::size_t>(m2) * c2), rows);

  std::vector<MatrixFq> blocks;
  for (int j = 0; j < m1; ++j) blocks.push_back(detail::column_range(first, static_cast<std::size_t>(j) * c1, c1));
  for (int j = 0; j < m2; ++j) blocks.push_back(detail::column_range(ident, static_cast<std::size_t>(j) * c2, c2));
  for (int i = 0; i < n; ++i) {
    MatrixFq left = detail::column_range(first, static_cast<std::size_t>(m1 + i) * c1, c1);
    MatrixFq right = detail::column_range(second, static_cast<std::size_t>(i) * c2, c2);
    blocks.push_back(detail::side_by_side(left, right));
  }
  std::string label = "B(" + std::to_string(n) + ",(" + std::to_string(k1) + "," + std::to_string(m1) + "),(" +
                      std::to_string(k2) + "," + std::to_string(m2) + "))";
  auto recipe = detail::make_recipe(label, q.value(), true,
                                    [n, t1, t2](Prime p) { return b_matrix_over(n, t1, t2, p); });
  return LinearScheme(make_structure(n, {t1, t2}), q, rows, std::move(blocks), std::move(recipe));
}

inline LinearScheme build_B(int n, SubArray t1, SubArray t2) {
  const int m1 = t1.count, k1 = t1.threshold, m2 = t2.count, k2 = t2.threshold;
  if (!(m1 > k1 && k1 > k2 && k2 > m2 && m2 >= 1)) {
    throw Error("B requires m1 > t1 > t2 > m2 >= 1");
  }
  std::uint64_t bound = static_cast<std::uint64_t>(
      std::max((m1 + n) * (k2 - m2), n * (m1 - k1)));
  return detail::searched(bound + 1, [&](Prime p) { return b_matrix_over(n, t1, t2, p); }, "B");
}

// A(N,T1,a) over a given prime, without verification. With identity_tail
// (a = 1 only) each appended part is an identity over zero rows.
inline LinearScheme a_matrix_over(int n, SubArray t1, int a, Prime q, bool identity_tail = false) {
  const int m1 = t1.count, k1 = t1.threshold;
  if (m1 <= k1) throw Error("A requires m1 > t1");
  if (a < 1 || a > k1 - 1) throw Error("a out of range");
  if (k1 > n) throw Error("threshold out of range");
  if (identity_tail && a != 1) throw Error("identity tail requires a = 1");
  const std::size_t rows = static_cast<std::size_t>(a * m1);
  const std::size_t wa = static_cast<std::size_t>(a);
  const std::size_t c2 = static_cast<std::size_t>(m1 - k1);
  const int plain = k1 - a;      // shares with only the Vandermonde part
  const int extended = n - plain;

  MatrixFq first = vandermonde_range(rows, static_cast<std::size_t>(a * (m1 + n)), q);
  MatrixFq second = identity_tail
                        ? MatrixFq(q, rows, 0)
                        : detail::pad_rows(vandermonde_range(wa * c2, static_cast<std::size_t>(extended) * c2, q), rows);
  MatrixFq ident = detail::pad_rows(MatrixFq::identity(q, c2), rows);

  std::vector<MatrixFq> blocks;
  for (int j = 0; j < m1; ++j) blocks.push_back(detail::column_range(first, static_cast<std::size_t>(j) * wa, wa));
  for (int i = 0; i < n; ++i) {
    MatrixFq left = detail::column_range(first, static_cast<std::size_t>(m1 + i) * wa, wa);
    if (i < plain) {
      blocks.push_back(std::move(left));
    } else if (identity_tail) {
      blocks.push_back(detail::side_by_side(left, ident));
    } else {
      MatrixFq right = detail::column_range(second, static_cast<std::size_t>(i - plain) * c2, c2);
      blocks.push_back(detail::side_by_side(left, right));
    }
  }
  std::string label = "A(" + std::to_string(n) + ",(" + std::to_string(k1) + "," + std::to_string(m1) + ")," +
                      std::to_string(a) + ")";
  auto recipe = detail::make_recipe(label, q.value(), true, [n, t1, a, identity_tail](Prime p) {
    return a_matrix_over(n, t1, a, p, identity_tail);
  });
  return LinearScheme(make_structure(n, {t1}), q, rows, std::move(blocks), std::move(recipe));
}

inline LinearScheme build_A(int n, SubArray t1, int a, bool identity_tail = false) {
  const int m1 = t1.count, k1 = t1.threshold;
  if (m1 <= k1) throw Error("A requires m1 > t1");
  if (a < 1 || a > k1 - 1) throw Error("a out of range");
  std::uint64_t bound = static_cast<std::uint64_t>(std::max(a * (m1 + n), (n - k1 + a) * (m1 - k1)));
  return detail::searched(
      bound + 1, [&](Prime p) { return a_matrix_over(n, t1, a, p, identity_tail); }, "A");
}

// Relabels the scheme's secrets onto target secrets; `mapping[s]` is the
// target of the scheme's s-th secret in canonical order. Unmapped target
// secrets become zero-width dummies.
inline LinearScheme embed(const LinearScheme& scheme, const StructurePair& target,
                          const std::vector<VariableId>& mapping) {
  const StructurePair& small = scheme.structure();
  const StructurePair big = validate(target);
  if (small.n != big.n) throw Error("embed requires the same number of participants");
  if (mapping.size() != static_cast<std::size_t>(small.array.total())) throw Error("embed mapping size mismatch");
  std::vector<int> source(static_cast<std::size_t>(big.array.total()), -1);
  for (std::size_t s = 0; s < mapping.size(); ++s) {
    const VariableId& v = mapping[s];
    if (!v.is_secret()) throw Error("embed mapping must target secrets");
    std::size_t idx = index_of(big, v);
    VariableId from = variable_at(small, s);
    if (big.array.threshold(v.a) != small.array.threshold(from.a)) throw Error("embed threshold mismatch");
    if (source[idx] != -1) throw Error("embed mapping is not injective");
    source[idx] = static_cast<int>(s);
  }
  std::vector<MatrixFq> blocks;
  for (std::size_t idx = 0; idx < source.size(); ++idx) {
    if (source[idx] >= 0) {
      blocks.push_back(scheme.block(static_cast<std::size_t>(source[idx])));
    } else {
      blocks.emplace_back(scheme.modulus(), scheme.n_rows(), 0);
    }
  }
  for (int i = 1; i <= small.n; ++i) blocks.push_back(scheme.block(VariableId::share(i)));

  std::shared_ptr<Recipe> recipe;
  if (scheme.recipe()) {
    auto inner = scheme.recipe();
    recipe = detail::make_recipe(inner->label, inner->min_order, inner->needs_check,
                                 [inner, big, mapping](Prime p) { return embed(inner->build(p), big, mapping); });
  }
  return LinearScheme(big, scheme.modulus(), scheme.n_rows(), std::move(blocks), std::move(recipe));
}

// Default embedding: each small sub-array goes to the target sub-array with
// the same threshold, secret j to secret j.
inline LinearScheme embed(const LinearScheme& scheme, const StructurePair& target) {
  const StructurePair& small = scheme.structure();
  if (small.n != target.n) throw Error("embed requires the same number of participants");
  if (!subset_of(small.array, target.array)) throw Error("access array is not a subset of the target");
  std::vector<VariableId> mapping;
  for (int k = 1; k <= small.array.K(); ++k) {
    int tk = 1;
    while (target.array.threshold(tk) != small.array.threshold(k)) ++tk;
    for (int j = 1; j <= small.array.count(k); ++j) mapping.push_back(VariableId::secret(tk, j));
  }
  return embed(scheme, target, mapping);
}

// Block-diagonal combination: every joint rank becomes the sum of the parts'.
inline LinearScheme combine(const std::vector<LinearScheme>& parts) {
  if (parts.empty()) throw Error("combine needs at least one part");
  const StructurePair& s = parts.front().structure();
  Prime q = parts.front().modulus();
  std::size_t rows = 0;
  for (const LinearScheme& p : parts) {
    if (!(p.structure() == s)) throw Error("combine: mismatched structure");
    if (!(p.modulus() == q)) throw Error("combine: mismatched field");
    rows += p.n_rows();
  }
  std::vector<MatrixFq> blocks;
  for (std::size_t v = 0; v < n_variables(s); ++v) {
    std::size_t cols = 0;
    for (const LinearScheme& p : parts) cols += p.width(v);
    MatrixFq b(q, rows, cols);
    std::size_t r0 = 0, c0 = 0;
    for (const LinearScheme& p : parts) {
      const MatrixFq& src = p.block(v);
      for (std::size_t r = 0; r < src.rows(); ++r)
        for (std::size_t c = 0; c < src.cols(); ++c) b(r0 + r, c0 + c) = src(r, c);
      r0 += src.rows();
      c0 += src.cols();
    }
    blocks.push_back(std::move(b));
  }

  std::shared_ptr<Recipe> recipe;
  bool rebuildable = std::all_of(parts.begin(), parts.end(), [](const LinearScheme& p) { return p.recipe() != nullptr; });
  if (rebuildable) {
    std::vector<std::shared_ptr<const Recipe>> inner;
    std::uint64_t min_order = 2;
    bool check = false;
    std::string label;
    for (const LinearScheme& p : parts) {
      inner.push_back(p.recipe());
      min_order = std::max(min_order, p.recipe()->min_order);
      check = check || p.recipe()->needs_check;
      label += (label.empty() ? "" : " + ") + p.recipe()->label;
    }
    recipe = detail::make_recipe(label, min_order, check, [inner](Prime p) {
      std::vector<LinearScheme> rebuilt;
      for (const auto& r : inner) rebuilt.push_back(r->build(p));
      return combine(rebuilt);
    });
  }
  return LinearScheme(s, q, rows, std::move(blocks), std::move(recipe));
}

// Rebuilds every part over one prime q* >= every part's minimum admissible
// order. Parts whose layout needs verification (B, A) are re-verified; on a
// failure q* advances to the next prime.
inline std::vector<LinearScheme> unify_field(const std::vector<LinearScheme>& parts) {
  if (parts.empty()) return {};
  std::uint64_t start = 2;
  for (const LinearScheme& p : parts) {
    start = std::max(start, p.recipe() ? p.recipe()->min_order : p.modulus().value());
  }
  Prime q = next_prime_at_least(start);
  for (int attempt = 0; attempt < kFieldSearchAttempts; ++attempt) {
    std::vector<LinearScheme> out;
    bool ok = true;
    for (const LinearScheme& p : parts) {
      if (p.modulus() == q) {
        out.push_back(p);
        continue;
      }
      if (!p.recipe()) throw Error("part cannot be rebuilt over another field");
      LinearScheme rebuilt = p.recipe()->build(q);
      if (p.recipe()->needs_check && !check_conditions(rebuilt, Security::kWeak).ok()) {
        ok = false;
        break;
      }
      out.push_back(std::move(rebuilt));
    }
    if (ok) return out;
    q = next_prime_at_least(q.value() + 1);
  }
  throw Error("field unification failed");
}

namespace detail {

inline LinearScheme unify_and_combine(const std::vector<LinearScheme>& parts) {
  return combine(unify_field(parts));
}

inline int lcm_int(int a, int b) { return a / std::gcd(a, b) * b; }

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// One V(t,[t+N]) per t-subset of the sub-array's secrets.
inline std::vector<LinearScheme> subset_orbit(const StructurePair& s, int k) {
  const int t = s.array.threshold(k), m = s.array.count(k);
  LinearScheme block = build_weak_block(s.n, t, t);
  std::vector<LinearScheme> out;
  for_each_subset(m, t, [&](std::uint32_t sub) {
    std::vector<VariableId> mapping;
    for (int j : members(sub)) mapping.push_back(VariableId::secret(k, j));
    out.push_back(embed(block, s, mapping));
  });
  return out;
}

// `windows` consecutive cyclic windows of t secrets, each a V(t,[t+N]).
// Consecutive windows tile the cycle, so after x*m/t windows every secret
// is covered exactly x times.
inline std::vector<LinearScheme> cyclic_orbit(const StructurePair& s, int k, long windows) {
  const int t = s.array.threshold(k), m = s.array.count(k);
  LinearScheme block = build_weak_block(s.n, t, t);
  std::vector<LinearScheme> out;
  for (long w = 0; w < windows; ++w) {
    std::vector<VariableId> mapping;
    for (int c = 0; c < t; ++c) mapping.push_back(VariableId::secret(k, static_cast<int>((w * t + c) % m) + 1));
    out.push_back(embed(block, s, mapping));
  }
  return out;
}

inline std::vector<LinearScheme> pattern_parts(const StructurePair& s, const PatternPlan& plan) {
  // Scale so every block count is an integer, including the number of
  // cyclic windows x*m/t of overfull orbits.
  Integer scale = 1;
  auto absorb = [&](const Rational& r) {
    Rational scaled = r * scale;
    scaled.canonicalize();
    Integer d = scaled.get_den();
    scale *= d;
  };
  for (const PatternBlock& b : plan.blocks) {
    absorb(b.multiplicity);
    const SubArray& a = s.array.subarrays[b.i - 1];
    if (b.kind == PatternBlock::Kind::kOrbit && a.count > a.threshold) {
      absorb(b.multiplicity * make_rational(a.count, a.threshold));
    }
  }
  std::vector<LinearScheme> parts;
  for (const PatternBlock& b : plan.blocks) {
    Rational x = b.multiplicity * scale;
    const SubArray& a = s.array.subarrays[b.i - 1];
    if (b.kind == PatternBlock::Kind::kOrbit) {
      if (a.count > a.threshold) {
        Rational w = x * make_rational(a.count, a.threshold);
        for (LinearScheme& p : cyclic_orbit(s, b.i, w.get_num().get_si())) parts.push_back(std::move(p));
      } else {
        LinearScheme block = embed(build_weak_block(s.n, a.threshold, a.count), s);
        for (long c = 0; c < x.get_num().get_si(); ++c) parts.push_back(block);
      }
    } else {
      LinearScheme block = embed(build_B(s.n, s.array.subarrays[b.k - 1], a), s);
      for (long c = 0; c < x.get_num().get_si(); ++c) parts.push_back(block);
    }
  }
  return parts;
}

}  // namespace detail

// A scheme attaining the optimal value of `kind` when it is known. For the
// open weak-sigma case the result is the best pattern combination, whose
// ratio equals optimal_ratio(...).upper.
inline LinearScheme build_optimal(const StructurePair& structure, RatioKind kind) {
  const StructurePair s = validate(structure);
  const AccessArray& arr = s.array;
  const int K = arr.K();
  const int N = s.n;
  std::vector<LinearScheme> parts;

  auto single_for = [&](int k, int j) {
    return embed(build_single_threshold(arr.threshold(k), N), s, {VariableId::secret(k, j)});
  };
  auto weak_block_for = [&](int k, int m) {
    return embed(build_weak_block(N, arr.threshold(k), m), s);
  };
  // A(N,T_k,1) for overfull k, else V(t_k,[t_k+N]).
  auto full_block_for = [&](int k) {
    if (arr.count(k) > arr.threshold(k)) return embed(build_A(N, arr.subarrays[k - 1], 1), s);
    return weak_block_for(k, arr.threshold(k));
  };

  if (kind.security == Security::kStrong) {
    if (kind.ratio == Ratio::kTauAvg) return single_for(K, 1);
    for (int k = 1; k <= K; ++k)
      for (int j = 1; j <= arr.count(k); ++j) parts.push_back(single_for(k, j));
    return detail::unify_and_combine(parts);
  }

  switch (kind.ratio) {
    case Ratio::kSigmaAvg: {
      int best = 1;
      for (int k = 1; k <= K; ++k) {
        if (std::min(arr.threshold(k), arr.count(k)) > std::min(arr.threshold(best), arr.count(best))) best = k;
      }
      return weak_block_for(best, arr.count(best));
    }
    case Ratio::kTauAvg: {
      for (int k = 1; k <= K; ++k) {
        if (arr.count(k) >= arr.threshold(k)) return full_block_for(k);
      }
      int best = 1;
      for (int k = 2; k <= K; ++k) {
        Rational r = make_rational(arr.threshold(k) - arr.count(k), arr.count(k));
        Rational rb = make_rational(arr.threshold(best) - arr.count(best), arr.count(best));
        if (r < rb) best = k;
      }
      return weak_block_for(best, arr.count(best));
    }
    case Ratio::kTau: {
      int b = randomness_break_index(s);
      if (b == K) {
        for (int i = 1; i <= K; ++i) parts.push_back(weak_block_for(i, arr.count(i)));
        return detail::unify_and_combine(parts);
      }
      int k = b + 1;
      for (int i = 1; i < k; ++i) parts.push_back(weak_block_for(i, arr.count(i)));
      parts.push_back(embed(build_A(N, arr.subarrays[k - 1], 1), s));
      for (int i = k + 1; i <= K; ++i) {
        if (arr.count(i) < arr.threshold(i)) {
          parts.push_back(embed(build_B(N, arr.subarrays[k - 1], arr.subarrays[i - 1]), s));
        } else {
          parts.push_back(full_block_for(i));
        }
      }
      return detail::unify_and_combine(parts);
    }
    case Ratio::kSigma: {
      switch (weak_sigma_case(s)) {
        case WeakSigmaCase::kAllWithin:
          for (int i = 1; i <= K; ++i) parts.push_back(weak_block_for(i, arr.count(i)));
          return detail::unify_and_combine(parts);
        case WeakSigmaCase::kAllOver: {
          // Orbit i gives every secret of T_i length C(m_i-1,t_i-1); repeat
          // orbit i prod_j c_j / c_i times, reduced by the common gcd.
          std::vector<long> c(static_cast<std::size_t>(K));
          long prod = 1;
          for (int i = 1; i <= K; ++i) {
            c[i - 1] = detail::binomial(arr.count(i) - 1, arr.threshold(i) - 1);
            prod *= c[i - 1];
          }
          long g = 0;
          for (long ci : c) g = std::gcd(g, prod / ci);
          for (int i = 1; i <= K; ++i) {
            std::vector<LinearScheme> orbit = detail::subset_orbit(s, i);
            long reps = prod / c[i - 1] / g;
            for (long r = 0; r < reps; ++r)
              for (const LinearScheme& p : orbit) parts.push_back(p);
          }
          return detail::unify_and_combine(parts);
        }
        case WeakSigmaCase::kSingleOver:
        case WeakSigmaCase::kOpen:
          return detail::unify_and_combine(detail::pattern_parts(s, weak_sigma_plan(s)));
      }
      break;
    }
  }
  throw Error("unreachable ratio kind");
}

}  // namespace mts
