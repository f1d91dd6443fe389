#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mts/error.hpp"
#include "mts/rational.hpp"
#include "mts/scheme.hpp"

namespace mts {

// Memoized joint ranks rk(V_x). In base-q units these are the entropies H(x)
// of the uniform codeword distribution. The scheme must outlive the profile.
class RankProfile {
 public:
  explicit RankProfile(const LinearScheme& scheme) : scheme_(&scheme) {}

  std::size_t joint_rank(VarMask mask) const {
    if (mask == 0) return 0;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(mask);
      if (it != memo_.end()) return it->second;
    }
    std::size_t r = rank(scheme_->columns(mask));
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(mask, r);
    return r;
  }

  std::size_t joint_rank(const std::vector<VariableId>& vars) const {
    VarMask m = 0;
    for (const VariableId& v : vars) m |= bit(index_of(scheme_->structure(), v));
    return joint_rank(m);
  }

  Rational entropy(VarMask mask) const { return Rational(static_cast<unsigned long>(joint_rank(mask))); }

  const LinearScheme& scheme() const { return *scheme_; }

 private:
  const LinearScheme* scheme_;
  mutable std::mutex mu_;
  mutable std::unordered_map<VarMask, std::size_t> memo_;
};

namespace detail {

// Calls f(mask) for every subset of [n] with exactly `size` elements, in
// increasing mask order.
inline void for_each_subset(int n, int size, const std::function<void(std::uint32_t)>& f) {
  if (size < 0 || size > n) return;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (std::popcount(m) == size) f(m);
  }
}

inline std::string participants_str(std::uint32_t a) {
  std::string out = "{";
  for (int i = 0; i < 32; ++i) {
    if (!(a & (1u << i))) continue;
    if (out.size() > 1) out += ",";
    out += "P" + std::to_string(i + 1);
  }
  return out + "}";
}

}  // namespace detail

struct CheckResult {
  bool pass = true;
  std::string witness;  // first failing instance
  std::size_t checks = 0;
};

struct VerificationReport {
  Security security = Security::kWeak;
  CheckResult independence;
  CheckResult decodable;
  CheckResult secure;
  bool ok() const { return independence.pass && decodable.pass && secure.pass; }
};

// Checks the linear-scheme conditions. Decodability is checked on every
// A with |A| >= t_k. Security is checked only on maximal unqualified sets
// |A| = t_k - 1: I(S;P_A) is nondecreasing in A, so zero leakage on the
// maximal sets implies zero leakage on every subset of them.
inline VerificationReport check_conditions(const RankProfile& rp, Security security) {
  const LinearScheme& sc = rp.scheme();
  const StructurePair& s = sc.structure();
  VerificationReport rep;
  rep.security = security;

  std::size_t sum = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(s.array.total()); ++i) sum += sc.width(i);
  std::size_t joint = rp.joint_rank(all_secrets_mask(s));
  rep.independence.checks = 1;
  if (joint != sum) {
    rep.independence.pass = false;
    rep.independence.witness = "rank(all secrets)=" + std::to_string(joint) + " != sum of widths " +
                               std::to_string(sum);
  }

  for (int k = 1; k <= s.array.K(); ++k) {
    VarMask sec = secrets_mask(s, k, s.array.K());
    for (int size = s.array.threshold(k); size <= s.n; ++size) {
      detail::for_each_subset(s.n, size, [&](std::uint32_t a) {
        VarMask pa = shares_mask(s, a);
        ++rep.decodable.checks;
        std::size_t lhs = rp.joint_rank(sec | pa);
        std::size_t rhs = rp.joint_rank(pa);
        if (lhs != rhs && rep.decodable.pass) {
          rep.decodable.pass = false;
          rep.decodable.witness = "k=" + std::to_string(k) + " A=" + detail::participants_str(a) +
                                  ": rank(secrets,P_A)=" + std::to_string(lhs) +
                                  " != rank(P_A)=" + std::to_string(rhs);
        }
      });
    }
  }

  auto secure_check = [&](VarMask sec, int t) {
    std::size_t rs = rp.joint_rank(sec);
    detail::for_each_subset(s.n, t - 1, [&](std::uint32_t a) {
      VarMask pa = shares_mask(s, a);
      ++rep.secure.checks;
      std::size_t lhs = rp.joint_rank(sec | pa);
      std::size_t rpa = rp.joint_rank(pa);
      if (lhs != rs + rpa && rep.secure.pass) {
        rep.secure.pass = false;
        rep.secure.witness = "A=" + detail::participants_str(a) + " secrets=" + describe_mask(s, sec) +
                             ": rank=" + std::to_string(lhs) + " < " + std::to_string(rpa) + "+" +
                             std::to_string(rs);
      }
    });
  };
  if (security == Security::kStrong) {
    for (int k = 1; k <= s.array.K(); ++k) secure_check(secrets_mask(s, 1, k), s.array.threshold(k));
  } else {
    for (int k = 1; k <= s.array.K(); ++k) {
      for (int j = 1; j <= s.array.count(k); ++j) {
        secure_check(bit(index_of(s, VariableId::secret(k, j))), s.array.threshold(k));
      }
    }
  }
  return rep;
}

inline VerificationReport check_conditions(const LinearScheme& scheme, Security security) {
  RankProfile rp(scheme);
  return check_conditions(rp, security);
}

struct RatioReport {
  std::vector<std::size_t> secret_lengths;  // canonical order
  std::vector<std::size_t> share_lengths;
  std::size_t all_shares = 0;   // rk(V_{P_[N]})
  std::size_t all_secrets = 0;  // rk(V_{S_all})
  // sigma and tau divide by the smallest secret length; they are absent when
  // some secret is a zero-width dummy.
  std::optional<Rational> sigma;
  Rational sigma_avg;
  std::optional<Rational> tau;
  Rational tau_avg;

  std::optional<Rational> value(Ratio r) const {
    switch (r) {
      case Ratio::kSigma: return sigma;
      case Ratio::kSigmaAvg: return sigma_avg;
      case Ratio::kTau: return tau;
      case Ratio::kTauAvg: return tau_avg;
    }
    return std::nullopt;
  }
};

inline RatioReport ratios(const RankProfile& rp) {
  const LinearScheme& sc = rp.scheme();
  const StructurePair& s = sc.structure();
  RatioReport rep;
  std::size_t total = static_cast<std::size_t>(s.array.total());
  std::size_t min_secret = SIZE_MAX;
  std::size_t max_share = 0;
  std::size_t sum_shares = 0;
  for (std::size_t i = 0; i < sc.n_variables(); ++i) {
    std::size_t w = sc.width(i);
    if (i < total) {
      rep.secret_lengths.push_back(w);
      min_secret = std::min(min_secret, w);
    } else {
      rep.share_lengths.push_back(w);
      max_share = std::max(max_share, w);
      sum_shares += w;
    }
  }
  rep.all_shares = rp.joint_rank(all_shares_mask(s));
  rep.all_secrets = rp.joint_rank(all_secrets_mask(s));
  if (rep.all_secrets == 0) throw Error("zero-length secret");

  auto q = [](std::size_t v) { return Rational(static_cast<unsigned long>(v)); };
  Rational randomness = q(rep.all_shares) - q(rep.all_secrets);
  Rational avg_secret = q(rep.all_secrets) / s.array.total();
  rep.sigma_avg = (q(sum_shares) / s.n) / avg_secret;
  rep.tau_avg = randomness / avg_secret;
  if (min_secret > 0) {
    rep.sigma = q(max_share) / q(min_secret);
    rep.tau = randomness / q(min_secret);
  }
  return rep;
}

inline RatioReport ratios(const LinearScheme& scheme) {
  RankProfile rp(scheme);
  return ratios(rp);
}

struct BoundCheck {
  std::string id;
  int k = 0;                 // focus sub-array, 0 when the bound has none
  std::vector<int> secrets;  // chosen secret index j_i per sub-array (0 = not used)
  std::vector<int> shares;   // share tuple, 1-based
  Rational lhs;
  Rational rhs;
  bool holds = true;
  bool tight = false;
  std::string note;
};

struct AuditOptions {
  bool all_orders = false;             // sweep every share role assignment, not just sorted tuples
  std::size_t max_instances = 20000;   // per bound
};

namespace detail {

inline std::vector<int> members(std::uint32_t a) {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i)
    if (a & (1u << i)) out.push_back(i + 1);
  return out;
}

// Every choice of one secret index per sub-array.
inline void for_each_choice(const AccessArray& arr, std::size_t cap,
                            const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> j(static_cast<std::size_t>(arr.K()), 1);
  std::size_t done = 0;
  for (;;) {
    if (done++ >= cap) return;
    f(j);
    int k = arr.K() - 1;
    while (k >= 0 && j[k] == arr.subarrays[k].count) j[k--] = 1;
    if (k < 0) return;
    ++j[k];
  }
}

}  // namespace detail

// Evaluates every converse bound applicable to `security` on the scheme's
// entropies. Bounds proved for weak security are also checked on strong
// schemes, since strong security implies weak security.
inline std::vector<BoundCheck> audit_bounds(const RankProfile& rp, Security security,
                                            const AuditOptions& opt = {}) {
  const LinearScheme& sc = rp.scheme();
  const StructurePair& s = sc.structure();
  if (!check_conditions(rp, security).ok()) throw Error("precondition: scheme invalid");

  const AccessArray& arr = s.array;
  const int K = arr.K();
  const int N = s.n;
  std::vector<BoundCheck> out;

  auto H = [&](VarMask m) { return rp.entropy(m); };
  auto Hs = [&](int k, int j) { return H(bit(index_of(s, VariableId::secret(k, j)))); };
  auto Hp = [&](std::uint32_t a) { return H(shares_mask(s, a)); };
  auto sub_sum = [&](int k) {
    Rational v = 0;
    for (int j = 1; j <= arr.count(k); ++j) v += Hs(k, j);
    return v;
  };
  auto all_p = (1u << N) - 1;
  auto emit = [&](BoundCheck b) {
    b.holds = b.lhs <= b.rhs;
    b.tight = b.lhs == b.rhs;
    out.push_back(std::move(b));
  };

  // Size of a secret: H(S) <= I(P_a;P_b | P_C) with |C| = t-1, for t < N.
  for (int k = 1; k <= K; ++k) {
    int t = arr.threshold(k);
    if (t >= N) continue;
    std::size_t n = 0;
    for (int j = 1; j <= arr.count(k); ++j) {
      Rational hs = Hs(k, j);
      detail::for_each_subset(N, t + 1, [&](std::uint32_t tuple) {
        for (int a : detail::members(tuple)) {
          for (int b : detail::members(tuple)) {
            if (b <= a || n >= opt.max_instances) continue;
            std::uint32_t c = tuple & ~(1u << (a - 1)) & ~(1u << (b - 1));
            std::uint32_t ca = c | (1u << (a - 1));
            std::uint32_t cb = c | (1u << (b - 1));
            BoundCheck bc;
            bc.id = "secret-size";
            bc.k = k;
            bc.secrets.assign(static_cast<std::size_t>(K), 0);
            bc.secrets[k - 1] = j;
            bc.shares = {a, b};
            for (int m : detail::members(c)) bc.shares.push_back(m);
            bc.lhs = hs;
            bc.rhs = Hp(ca) + Hp(cb) - Hp(tuple) - Hp(c);
            emit(std::move(bc));
            ++n;
          }
        }
      });
    }
  }

  if (security == Security::kStrong) {
    Rational total = 0;
    Rational weighted = 0;
    for (int k = 1; k <= K; ++k) {
      total += sub_sum(k);
      weighted += arr.threshold(k) * sub_sum(k);
    }
    for (int i = 1; i <= N; ++i) {
      BoundCheck bc;
      bc.id = "strong-sum";
      bc.shares = {i};
      bc.lhs = total;
      bc.rhs = Hp(1u << (i - 1));
      emit(std::move(bc));
    }
    BoundCheck bc;
    bc.id = "strong-threshold";
    for (int i = 1; i <= N; ++i) bc.shares.push_back(i);
    bc.lhs = weighted;
    bc.rhs = Hp(all_p);
    emit(std::move(bc));
  }

  // Different-threshold bound and threshold-value bound, per secret choice.
  detail::for_each_choice(arr, opt.max_instances, [&](const std::vector<int>& j) {
    Rational one = 0;
    Rational weighted = 0;
    for (int k = 1; k <= K; ++k) {
      one += Hs(k, j[k - 1]);
      weighted += arr.threshold(k) * Hs(k, j[k - 1]);
    }
    for (int i = 1; i <= N; ++i) {
      BoundCheck bc;
      bc.id = "dtb";
      bc.secrets = j;
      bc.shares = {i};
      bc.lhs = one;
      bc.rhs = Hp(1u << (i - 1));
      emit(std::move(bc));
    }
    BoundCheck bc;
    bc.id = "tvb";
    bc.secrets = j;
    bc.lhs = weighted;
    bc.rhs = Hp(all_p);
    emit(std::move(bc));
  });

  {
    BoundCheck bc;
    bc.id = "tvb-perm";
    bc.lhs = 0;
    for (int k = 1; k <= K; ++k) bc.lhs += make_rational(arr.threshold(k), arr.count(k)) * sub_sum(k);
    bc.rhs = Hp(all_p);
    emit(std::move(bc));
  }

  // Threshold-sum-difference bound and threshold-sum bound, per focus k.
  for (int k = 1; k <= K; ++k) {
    int tk = arr.threshold(k);
    Rational tail = 0;
    for (int i = k; i <= K; ++i) tail += sub_sum(i);
    // Choices j_i for i != k; j_k itself is unused.
    AccessArray others = arr;
    others.subarrays[k - 1].count = 1;
    std::size_t n = 0;
    detail::for_each_choice(others, opt.max_instances, [&](const std::vector<int>& j) {
      std::vector<int> used = j;
      used[k - 1] = 0;
      Rational head = 0;
      Rational tsdb_extra = 0;
      for (int i = 1; i < k; ++i) head += arr.threshold(i) * Hs(i, j[i - 1]);
      Rational tsdb_head = 0;
      for (int i = 1; i < k; ++i) tsdb_head += tk * Hs(i, j[i - 1]);
      for (int i = k + 1; i <= K; ++i) tsdb_extra += (tk - arr.threshold(i)) * Hs(i, j[i - 1]);

      BoundCheck tsb;
      tsb.id = "tsb";
      tsb.k = k;
      tsb.secrets = used;
      tsb.lhs = head + tail;
      tsb.rhs = Hp(all_p);
      emit(std::move(tsb));

      detail::for_each_subset(N, tk, [&](std::uint32_t tuple) {
        if (n++ >= opt.max_instances) return;
        BoundCheck bc;
        bc.id = "tsdb";
        bc.k = k;
        bc.secrets = used;
        bc.shares = detail::members(tuple);
        bc.lhs = tsdb_head + tail + tsdb_extra;
        bc.rhs = 0;
        for (int m : bc.shares) bc.rhs += Hp(1u << (m - 1));
        if (N == tk) bc.note = "reduced";
        emit(std::move(bc));
      });
    });

    BoundCheck perm;
    perm.id = "tsb-perm";
    perm.k = k;
    perm.lhs = tail;
    for (int i = 1; i < k; ++i) perm.lhs += make_rational(arr.threshold(i), arr.count(i)) * sub_sum(i);
    perm.rhs = Hp(all_p);
    emit(std::move(perm));
  }

  // Threshold-product bound over t_1-subsets of shares.
  {
    Integer prod = 1;
    for (int k = 1; k <= K; ++k) prod *= arr.threshold(k);
    Rational lhs = 0;
    for (int i = 1; i <= K; ++i) lhs += Rational(prod) / arr.threshold(i) * sub_sum(i);
    Rational coef = Rational(prod) / arr.threshold(1);
    std::size_t n = 0;
    detail::for_each_subset(N, arr.threshold(1), [&](std::uint32_t tuple) {
      if (n++ >= opt.max_instances) return;
      BoundCheck bc;
      bc.id = "tpb";
      bc.shares = detail::members(tuple);
      bc.lhs = lhs;
      bc.rhs = 0;
      for (int m : bc.shares) bc.rhs += coef * Hp(1u << (m - 1));
      emit(std::move(bc));
    });
  }

  // Average information ratio: sum H(S) / max_i min(t_i,m_i) <= sum H(P_i) / N.
  {
    int best = 0;
    Rational secrets = 0;
    Rational shares = 0;
    for (int k = 1; k <= K; ++k) {
      best = std::max(best, std::min(arr.threshold(k), arr.count(k)));
      secrets += sub_sum(k);
    }
    for (int i = 1; i <= N; ++i) shares += Hp(1u << (i - 1));
    BoundCheck bc;
    bc.id = "avg-info";
    bc.lhs = N * secrets;
    bc.rhs = best * shares;
    emit(std::move(bc));
  }

  // Extra bound for three participants with a threshold-3 sub-array of at
  // least four secrets and a threshold-2 sub-array of at least three:
  // H(S_a) + sum_{4 of T1} H(S) + 2 sum_{3 of T2} H(S) <= sum H(P_i) + H(P_e).
  int k3 = 0, k2 = 0;
  for (int k = 1; k <= K; ++k) {
    if (arr.threshold(k) == 3 && arr.count(k) >= 4) k3 = k;
    if (arr.threshold(k) == 2 && arr.count(k) >= 3) k2 = k;
  }
  if (N == 3 && k3 != 0 && k2 != 0) {
    Rational shares = Hp(1u) + Hp(2u) + Hp(4u);
    std::size_t n = 0;
    auto instance = [&](std::uint32_t four, int lead, std::uint32_t three, int e) {
      if (n++ >= opt.max_instances) return;
      BoundCheck bc;
      bc.id = "extra-3-2";
      bc.secrets.assign(static_cast<std::size_t>(K), 0);
      bc.secrets[k3 - 1] = lead;
      bc.shares = {e};
      bc.lhs = Hs(k3, lead);
      for (int j : detail::members(four)) bc.lhs += Hs(k3, j);
      for (int j : detail::members(three)) bc.lhs += 2 * Hs(k2, j);
      bc.rhs = shares + Hp(1u << (e - 1));
      auto list = [](std::uint32_t m) {
        std::string r;
        for (int j : detail::members(m)) r += (r.empty() ? "" : ",") + std::to_string(j);
        return "(" + r + ")";
      };
      bc.note = "first=" + list(four) + " second=" + list(three);
      emit(std::move(bc));
    };
    if (opt.all_orders) {
      detail::for_each_subset(arr.count(k3), 4, [&](std::uint32_t four) {
        detail::for_each_subset(arr.count(k2), 3, [&](std::uint32_t three) {
          for (int lead : detail::members(four))
            for (int e = 1; e <= 3; ++e) instance(four, lead, three, e);
        });
      });
    } else {
      instance(0xFu, 1, 0x7u, 3);
    }
  }
  return out;
}

inline std::vector<BoundCheck> audit_bounds(const LinearScheme& scheme, Security security,
                                            const AuditOptions& opt = {}) {
  RankProfile rp(scheme);
  return audit_bounds(rp, security, opt);
}

inline std::string describe(const BoundCheck& b) {
  std::string out = b.id;
  if (b.k != 0) out += " k=" + std::to_string(b.k);
  if (!b.secrets.empty()) {
    out += " j=(";
    for (std::size_t i = 0; i < b.secrets.size(); ++i) out += (i ? "," : "") + std::to_string(b.secrets[i]);
    out += ")";
  }
  if (!b.shares.empty()) {
    out += " shares=(";
    for (std::size_t i = 0; i < b.shares.size(); ++i) out += (i ? "," : "") + std::to_string(b.shares[i]);
    out += ")";
  }
  return out;
}

}  // namespace mts
