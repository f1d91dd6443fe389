#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mts/error.hpp"
#include "mts/field.hpp"
#include "mts/scheme.hpp"
#include "mts/scheme_io.hpp"

namespace mts {

// One value vector per secret in canonical order; length = block width.
using SecretAssignment = std::vector<std::vector<Element>>;

// Shares held by some participants, keyed by participant index (1-based).
struct ShareBundle {
  std::uint64_t fingerprint = 0;
  std::map<int, std::vector<Element>> shares;

  friend bool operator==(const ShareBundle&, const ShareBundle&) = default;
};

namespace detail {

// Uniform element of F_q from 64 random bits: floor(u * q / 2^64).
inline Element uniform_element(std::mt19937_64& rng, std::uint64_t q) {
  unsigned __int128 wide = static_cast<unsigned __int128>(rng()) * q;
  return static_cast<Element>(wide >> 64);
}

inline std::vector<Element> concat(const std::vector<std::vector<Element>>& parts) {
  std::vector<Element> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace detail

// Samples a codeword c uniformly among those with c V_S = secrets and hands
// participant i the share c V_{P_i}.
inline ShareBundle deal(const LinearScheme& scheme, const SecretAssignment& secrets, std::uint64_t seed) {
  const StructurePair& s = scheme.structure();
  const std::size_t n_secrets = static_cast<std::size_t>(s.array.total());
  if (secrets.size() != n_secrets) throw Error("secret count does not match the structure");
  const std::uint64_t q = scheme.modulus().value();
  for (std::size_t j = 0; j < n_secrets; ++j) {
    if (secrets[j].size() != scheme.width(j)) throw Error("secret length does not match block width");
    for (Element e : secrets[j])
      if (e >= q) throw Error("secret value out of range");
  }

  MatrixFq vs = scheme.columns(all_secrets_mask(s));
  std::vector<Element> target = detail::concat(secrets);
  AffineSolution sol;
  try {
    sol = solve_affine(vs.transpose(), target);
  } catch (const Error&) {
    // Full column rank of V_S makes every secret value reachable.
    throw std::logic_error("deal: no codeword for the given secrets");
  }
  std::mt19937_64 rng(seed);
  std::vector<Element> c = sol.particular;
  for (const auto& v : sol.nullspace) {
    Element r = detail::uniform_element(rng, q);
    if (r == 0) continue;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = gf::add(c[i], gf::mul(r, v[i], q), q);
  }

  ShareBundle out;
  out.fingerprint = fingerprint(scheme);
  for (int i = 1; i <= s.n; ++i) out.shares[i] = vec_mat(c, scheme.block(VariableId::share(i)));
  return out;
}

// Secrets of sub-arrays k..K recovered from the given shares.
inline std::vector<std::pair<VariableId, std::vector<Element>>> reconstruct(const LinearScheme& scheme,
                                                                           const ShareBundle& bundle, int k) {
  const StructurePair& s = scheme.structure();
  if (k < 1 || k > s.array.K()) throw Error("sub-array index out of range");
  if (bundle.fingerprint != fingerprint(scheme)) throw Error("share bundle does not belong to this scheme");
  std::uint32_t a = 0;
  std::vector<std::vector<Element>> values;
  for (const auto& [i, v] : bundle.shares) {
    if (i < 1 || i > s.n) throw Error("unknown participant " + std::to_string(i));
    if (v.size() != scheme.block(VariableId::share(i)).cols()) throw Error("share length does not match block width");
    a |= 1u << (i - 1);
    values.push_back(v);
  }
  if (static_cast<int>(bundle.shares.size()) < s.array.threshold(k)) throw Error("unqualified set");

  MatrixFq vp = scheme.columns(shares_mask(s, a));
  AffineSolution sol;
  try {
    sol = solve_affine(vp.transpose(), detail::concat(values));
  } catch (const Error&) {
    throw Error("inconsistent shares");
  }

  std::vector<std::pair<VariableId, std::vector<Element>>> out;
  for (int kk = k; kk <= s.array.K(); ++kk) {
    for (int j = 1; j <= s.array.count(kk); ++j) {
      const MatrixFq& b = scheme.block(VariableId::secret(kk, j));
      for (const auto& v : sol.nullspace) {
        for (Element e : vec_mat(v, b))
          if (e != 0) throw Error("shares do not determine the secrets");
      }
      out.emplace_back(VariableId::secret(kk, j), vec_mat(sol.particular, b));
    }
  }
  return out;
}

// Joint counts of (share values of A, target value) over every codeword.
// Values are encoded base q, first coordinate least significant.
struct CensusTable {
  std::uint64_t q = 0;
  std::uint64_t codewords = 0;
  std::size_t share_width = 0;
  std::size_t target_width = 0;
  std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> joint;  // share code -> target code -> count

  std::map<std::uint64_t, std::uint64_t> target_marginal() const {
    std::map<std::uint64_t, std::uint64_t> m;
    for (const auto& [a, row] : joint)
      for (const auto& [t, n] : row) m[t] += n;
    return m;
  }

  // True when every conditional distribution of the target equals its
  // marginal, i.e. the shares reveal nothing about the target.
  bool independent() const {
    auto marginal = target_marginal();
    for (const auto& [a, row] : joint) {
      std::uint64_t na = 0;
      for (const auto& [t, n] : row) na += n;
      for (const auto& [t, nt] : marginal) {
        auto it = row.find(t);
        std::uint64_t joint_n = it == row.end() ? 0 : it->second;
        if (static_cast<unsigned __int128>(joint_n) * codewords != static_cast<unsigned __int128>(na) * nt) {
          return false;
        }
      }
    }
    return true;
  }

  std::vector<Element> decode(std::uint64_t code, std::size_t width) const {
    std::vector<Element> out(width);
    for (std::size_t i = 0; i < width; ++i) {
      out[i] = code % q;
      code /= q;
    }
    return out;
  }
};

inline constexpr std::uint64_t kCensusCap = 10'000'000;

// Enumerates all q^{n_rows} codewords. `participants` uses bit i-1 for P_i;
// `target` is a mask of secret variables.
inline CensusTable leakage_census(const LinearScheme& scheme, std::uint32_t participants, VarMask target,
                                  unsigned threads = 0) {
  const StructurePair& s = scheme.structure();
  if (target == 0 || (target & ~all_secrets_mask(s)) != 0) throw Error("census target must be a set of secrets");
  if (participants >= (1u << s.n)) throw Error("unknown participant in census set");
  const std::uint64_t q = scheme.modulus().value();
  const std::size_t rows = scheme.n_rows();
  std::uint64_t total = 1;
  for (std::size_t r = 0; r < rows; ++r) {
    if (total > kCensusCap / q) throw Error("scheme too large for census");
    total *= q;
  }
  MatrixFq vt = scheme.columns(target);
  MatrixFq va = scheme.columns(shares_mask(s, participants));
  // Codes must fit in 64 bits.
  auto fits = [&](std::size_t w) {
    unsigned __int128 p = 1;
    for (std::size_t i = 0; i < w; ++i) {
      p *= q;
      if (p > (unsigned __int128)UINT64_MAX) return false;
    }
    return true;
  };
  if (!fits(vt.cols()) || !fits(va.cols())) throw Error("scheme too large for census");

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, total / 4096)));
  using Partial = std::unordered_map<std::uint64_t, std::unordered_map<std::uint64_t, std::uint64_t>>;
  std::vector<Partial> partial(threads);

  auto encode = [q](const std::vector<Element>& v) {
    std::uint64_t code = 0;
    for (std::size_t i = v.size(); i-- > 0;) code = code * q + v[i];
    return code;
  };
  auto work = [&](unsigned id, std::uint64_t from, std::uint64_t to) {
    std::vector<Element> c(rows);
    std::uint64_t x = from;
    for (std::size_t r = 0; r < rows; ++r) {
      c[r] = x % q;
      x /= q;
    }
    for (std::uint64_t n = from; n < to; ++n) {
      partial[id][encode(vec_mat(c, va))][encode(vec_mat(c, vt))]++;
      for (std::size_t r = 0; r < rows; ++r) {
        if (++c[r] < q) break;
        c[r] = 0;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned id = 0; id < threads; ++id) {
    std::uint64_t from = total * id / threads;
    std::uint64_t to = total * (id + 1) / threads;
    pool.emplace_back(work, id, from, to);
  }
  for (auto& t : pool) t.join();

  CensusTable out;
  out.q = q;
  out.codewords = total;
  out.share_width = va.cols();
  out.target_width = vt.cols();
  for (const Partial& p : partial)
    for (const auto& [a, row] : p)
      for (const auto& [t, n] : row) out.joint[a][t] += n;
  return out;
}

// Text form:
//   mts-shares v1
//   fingerprint 0123456789abcdef
//   P 1 : 3,4
inline std::string serialize(const ShareBundle& b) {
  std::ostringstream out;
  out << "mts-shares v1\n";
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(b.fingerprint));
  out << "fingerprint " << hex << "\n";
  for (const auto& [i, v] : b.shares) {
    out << "P " << i << " :";
    for (std::size_t e = 0; e < v.size(); ++e) out << (e == 0 ? " " : ",") << v[e];
    out << "\n";
  }
  return out.str();
}

inline ShareBundle parse_bundle(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    std::string t = detail::trim(line);
    if (!t.empty() && t[0] != '#') lines.push_back(t);
  }
  if (lines.size() < 2 || lines[0] != "mts-shares v1") throw Error("share file: bad header");
  if (lines[1].rfind("fingerprint ", 0) != 0) throw Error("share file: expected 'fingerprint'");
  ShareBundle b;
  std::string hex = detail::trim(lines[1].substr(12));
  if (hex.size() != 16 || hex.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw Error("share file: malformed fingerprint");
  }
  b.fingerprint = std::stoull(hex, nullptr, 16);
  for (std::size_t l = 2; l < lines.size(); ++l) {
    std::size_t colon = lines[l].find(':');
    std::istringstream head(lines[l].substr(0, colon == std::string::npos ? 0 : colon));
    std::string kind;
    int i = 0;
    if (colon == std::string::npos || !(head >> kind >> i) || kind != "P") {
      throw Error("share file: malformed line '" + lines[l] + "'");
    }
    std::vector<Element> v;
    std::string body = detail::trim(lines[l].substr(colon + 1));
    if (!body.empty()) {
      for (const std::string& e : detail::split(body, ',')) v.push_back(detail::parse_u64(e, "share value"));
    }
    if (!b.shares.emplace(i, std::move(v)).second) throw Error("share file: duplicate participant");
  }
  return b;
}

}  // namespace mts
