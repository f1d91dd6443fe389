#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mts/error.hpp"
#include "mts/rational.hpp"

namespace mts {

// One group of secrets sharing a threshold: `count` secrets, each decodable
// by any `threshold` participants.
struct SubArray {
  int threshold = 0;
  int count = 0;
  friend bool operator==(const SubArray&, const SubArray&) = default;
};

// The access structure array, grouped by threshold with thresholds strictly
// decreasing. Construction does not validate; see validate().
struct AccessArray {
  std::vector<SubArray> subarrays;

  int K() const { return static_cast<int>(subarrays.size()); }
  int total() const {
    int s = 0;
    for (const SubArray& a : subarrays) s += a.count;
    return s;
  }
  int threshold(int k) const { return subarrays[k - 1].threshold; }  // 1-based
  int count(int k) const { return subarrays[k - 1].count; }          // 1-based

  friend bool operator==(const AccessArray&, const AccessArray&) = default;
};

struct StructurePair {
  int n = 0;  // participants
  AccessArray array;

  friend bool operator==(const StructurePair&, const StructurePair&) = default;
};

enum class Security { kStrong, kWeak };
enum class Ratio { kSigma, kSigmaAvg, kTau, kTauAvg };

struct RatioKind {
  Ratio ratio = Ratio::kSigma;
  Security security = Security::kWeak;
  friend bool operator==(const RatioKind&, const RatioKind&) = default;
};

inline const std::vector<Ratio>& all_ratios() {
  static const std::vector<Ratio> kAll = {Ratio::kSigma, Ratio::kSigmaAvg, Ratio::kTau,
                                          Ratio::kTauAvg};
  return kAll;
}

inline std::string to_string(Security s) { return s == Security::kStrong ? "strong" : "weak"; }

inline std::string to_string(Ratio r) {
  switch (r) {
    case Ratio::kSigma: return "sigma";
    case Ratio::kSigmaAvg: return "sigma-avg";
    case Ratio::kTau: return "tau";
    case Ratio::kTauAvg: return "tau-avg";
  }
  return "?";
}

inline std::string to_string(RatioKind k) { return to_string(k.ratio) + "/" + to_string(k.security); }

inline Security parse_security(const std::string& s) {
  if (s == "strong") return Security::kStrong;
  if (s == "weak") return Security::kWeak;
  throw Error("unknown security level: " + s);
}

inline Ratio parse_ratio(const std::string& s) {
  if (s == "sigma") return Ratio::kSigma;
  if (s == "sigma-avg") return Ratio::kSigmaAvg;
  if (s == "tau") return Ratio::kTau;
  if (s == "tau-avg") return Ratio::kTauAvg;
  throw Error("unknown ratio kind: " + s);
}

// Either an exact value or a bracket [lower, upper] when the optimum is open.
struct OptimalValue {
  bool known = true;
  Rational value;
  Rational lower;
  Rational upper;

  static OptimalValue exact(Rational v) {
    OptimalValue o;
    o.known = true;
    o.lower = v;
    o.upper = v;
    o.value = std::move(v);
    return o;
  }
  static OptimalValue unknown(Rational lo, Rational hi) {
    if (lo > hi) throw Error("unknown optimum with lower > upper");
    OptimalValue o;
    o.known = false;
    o.lower = std::move(lo);
    o.upper = std::move(hi);
    return o;
  }
};

inline StructurePair validate(const StructurePair& s) {
  if (s.n < 2) throw Error("threshold out of range");
  const auto& subs = s.array.subarrays;
  if (subs.empty()) throw Error("empty sub-array");
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k].count < 1) throw Error("empty sub-array");
    if (subs[k].threshold < 2 || subs[k].threshold > s.n) throw Error("threshold out of range");
    if (k > 0 && subs[k].threshold >= subs[k - 1].threshold) {
      throw Error("thresholds not strictly decreasing");
    }
  }
  return s;
}

// Merges duplicate thresholds and sorts decreasingly. Use this when the caller
// intends duplicates to be merged; validate() rejects them.
inline AccessArray normalize(const std::vector<SubArray>& groups) {
  std::map<int, int, std::greater<>> merged;
  for (const SubArray& g : groups) merged[g.threshold] += g.count;
  AccessArray out;
  for (const auto& [t, m] : merged) out.subarrays.push_back({t, m});
  return out;
}

// Definition of containment for access arrays: every group of `small` has a
// group of `big` with the same threshold and at least as many secrets.
inline bool subset_of(const AccessArray& small, const AccessArray& big) {
  for (const SubArray& s : small.subarrays) {
    auto it = std::find_if(big.subarrays.begin(), big.subarrays.end(),
                           [&](const SubArray& b) { return b.threshold == s.threshold; });
    if (it == big.subarrays.end() || s.count > it->count) return false;
  }
  return true;
}

// "3,3,2" <-> [(3,2),(2,1)]. The list must be non-increasing.
inline AccessArray parse_access_array(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw Error("malformed threshold list: " + text);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw Error("malformed threshold list: " + text);
    }
    if (used != item.size()) throw Error("malformed threshold list: " + text);
    values.push_back(v);
  }
  if (values.empty()) throw Error("empty sub-array");
  AccessArray out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] > values[i - 1]) {
      throw Error("threshold list must be non-increasing: " + text);
    }
    if (!out.subarrays.empty() && out.subarrays.back().threshold == values[i]) {
      ++out.subarrays.back().count;
    } else {
      out.subarrays.push_back({values[i], 1});
    }
  }
  return out;
}

inline std::string format_access_array(const AccessArray& a) {
  std::string out;
  for (const SubArray& s : a.subarrays) {
    for (int j = 0; j < s.count; ++j) {
      if (!out.empty()) out += ",";
      out += std::to_string(s.threshold);
    }
  }
  return out;
}

inline std::string to_string(const StructurePair& s) {
  return "(" + std::to_string(s.n) + ",[" + format_access_array(s.array) + "])";
}

inline StructurePair make_structure(int n, std::vector<SubArray> groups) {
  return StructurePair{n, AccessArray{std::move(groups)}};
}

}  // namespace mts
