#pragma once

#include <algorithm>

#include "mts/plan.hpp"
#include "mts/rational.hpp"
#include "mts/structure.hpp"

namespace mts {

// Smallest k with m_k > t_k, minus one; K when no sub-array is overfull.
inline int randomness_break_index(const StructurePair& s) {
  for (int k = 1; k <= s.array.K(); ++k) {
    if (s.array.count(k) > s.array.threshold(k)) return k - 1;
  }
  return s.array.K();
}

enum class WeakSigmaCase { kAllWithin = 1, kAllOver = 2, kSingleOver = 3, kOpen = 4 };

// Case 1: every m_i <= t_i. Case 3: exactly one m_i > t_i. Case 2: every
// m_i >= t_i with at least two overfull. Otherwise open. Structures in both
// case 2 and case 3 go to case 3; the formulas agree there.
inline WeakSigmaCase weak_sigma_case(const StructurePair& s) {
  int over = 0, under = 0;
  for (const SubArray& a : s.array.subarrays) {
    if (a.count > a.threshold) ++over;
    if (a.count < a.threshold) ++under;
  }
  if (over == 0) return WeakSigmaCase::kAllWithin;
  if (over == 1) return WeakSigmaCase::kSingleOver;
  if (under == 0) return WeakSigmaCase::kAllOver;
  return WeakSigmaCase::kOpen;
}

// max(K, K-1 + m_k/t_k + sum_{i>k}(m_i - t_i)/t_k) for focus sub-array k.
inline Rational weak_sigma_focus_bound(const StructurePair& s, int k) {
  const AccessArray& arr = s.array;
  Rational tail = 0;
  for (int i = k + 1; i <= arr.K(); ++i) tail += arr.count(i) - arr.threshold(i);
  Rational v = Rational(arr.K() - 1) + make_rational(arr.count(k), arr.threshold(k)) + tail / arr.threshold(k);
  return std::max(Rational(arr.K()), v);
}

// Best lower bound for weak sigma from the three converse bounds.
inline Rational weak_sigma_lower(const StructurePair& s) {
  const AccessArray& arr = s.array;
  Rational best = arr.K();
  Rational product_bound = 0;
  for (int i = 1; i <= arr.K(); ++i) product_bound += make_rational(arr.count(i), arr.threshold(i));
  best = std::max(best, product_bound);
  for (int k = 1; k <= arr.K(); ++k) best = std::max(best, weak_sigma_focus_bound(s, k));
  return best;
}

inline OptimalValue optimal_ratio(const StructurePair& structure, RatioKind kind) {
  const StructurePair s = validate(structure);
  const AccessArray& arr = s.array;
  const int K = arr.K();
  const int total = arr.total();

  if (kind.security == Security::kStrong) {
    switch (kind.ratio) {
      case Ratio::kSigma:
      case Ratio::kSigmaAvg:
        return OptimalValue::exact(total);
      case Ratio::kTau: {
        Rational v = 0;
        for (const SubArray& a : arr.subarrays) v += a.count * (a.threshold - 1);
        return OptimalValue::exact(v);
      }
      case Ratio::kTauAvg:
        return OptimalValue::exact(total * (arr.threshold(K) - 1));
    }
  }

  switch (kind.ratio) {
    case Ratio::kSigmaAvg: {
      int best = 0;
      for (const SubArray& a : arr.subarrays) best = std::max(best, std::min(a.threshold, a.count));
      return OptimalValue::exact(make_rational(total, best));
    }
    case Ratio::kSigma: {
      switch (weak_sigma_case(s)) {
        case WeakSigmaCase::kAllWithin:
          return OptimalValue::exact(K);
        case WeakSigmaCase::kAllOver: {
          Rational v = 0;
          for (const SubArray& a : arr.subarrays) v += make_rational(a.count, a.threshold);
          return OptimalValue::exact(v);
        }
        case WeakSigmaCase::kSingleOver: {
          int k = 1;
          while (arr.count(k) <= arr.threshold(k)) ++k;
          return OptimalValue::exact(weak_sigma_focus_bound(s, k));
        }
        case WeakSigmaCase::kOpen:
          return OptimalValue::unknown(weak_sigma_lower(s), weak_sigma_plan(s).share_length);
      }
      break;
    }
    case Ratio::kTauAvg: {
      bool some_full = false;
      Rational best;
      bool first = true;
      for (const SubArray& a : arr.subarrays) {
        if (a.count >= a.threshold) some_full = true;
        Rational r = make_rational(a.threshold - a.count, a.count);
        if (first || r < best) best = r;
        first = false;
      }
      if (some_full) return OptimalValue::exact(0);
      return OptimalValue::exact(total * best);
    }
    case Ratio::kTau: {
      int b = randomness_break_index(s);
      Rational v = 0;
      for (int i = 1; i <= b; ++i) v += arr.threshold(i) - arr.count(i);
      return OptimalValue::exact(v);
    }
  }
  throw Error("unreachable ratio kind");
}

}  // namespace mts
