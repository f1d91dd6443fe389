#pragma once

#include <string>
#include <vector>

#include "mts/rational.hpp"
#include "mts/simplex.hpp"
#include "mts/structure.hpp"

namespace mts {

// Building blocks for weak-security information-ratio constructions.
//   kOrbit (sub-array i): V(t_i,[n+N]) with n = min(t_i,m_i), rotated over the
//     secrets of T_i so each gets the same length. Per unit: every secret of
//     T_i gets length 1 and every share max(1, m_i/t_i).
//   kPair (overfull k, underfull i > k): B(N,T_k,T_i). Per unit: secrets of
//     T_k get t_i-m_i, secrets of T_i get m_k-t_k, shares get their sum.
struct PatternBlock {
  enum class Kind { kOrbit, kPair };
  Kind kind = Kind::kOrbit;
  int i = 0;  // orbit sub-array, or the underfull sub-array of a pair
  int k = 0;  // overfull sub-array of a pair
  Rational multiplicity;
};

struct PatternPlan {
  Rational share_length;  // equals sigma once every secret length is 1
  std::vector<PatternBlock> blocks;
};

inline Rational orbit_share_cost(const SubArray& a) {
  return a.count > a.threshold ? make_rational(a.count, a.threshold) : Rational(1);
}

// Minimizes the common share length subject to every secret having total
// length exactly 1, over nonnegative multiplicities of the pattern blocks.
inline PatternPlan weak_sigma_plan(const StructurePair& s) {
  const AccessArray& arr = s.array;
  const int K = arr.K();
  std::vector<PatternBlock> blocks;
  for (int i = 1; i <= K; ++i) blocks.push_back({PatternBlock::Kind::kOrbit, i, 0, 0});
  for (int k = 1; k <= K; ++k) {
    if (arr.count(k) <= arr.threshold(k)) continue;
    for (int i = k + 1; i <= K; ++i) {
      if (arr.count(i) < arr.threshold(i)) blocks.push_back({PatternBlock::Kind::kPair, i, k, 0});
    }
  }

  LinearProgram lp;
  lp.n_vars = static_cast<int>(blocks.size());
  for (int sub = 1; sub <= K; ++sub) {
    LinearConstraint c;
    c.relation = Relation::kEq;
    c.rhs = 1;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const PatternBlock& pb = blocks[b];
      if (pb.kind == PatternBlock::Kind::kOrbit) {
        if (pb.i == sub) c.terms.emplace_back(static_cast<int>(b), 1);
      } else if (pb.k == sub) {
        c.terms.emplace_back(static_cast<int>(b), arr.threshold(pb.i) - arr.count(pb.i));
      } else if (pb.i == sub) {
        c.terms.emplace_back(static_cast<int>(b), arr.count(pb.k) - arr.threshold(pb.k));
      }
    }
    lp.constraints.push_back(std::move(c));
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const PatternBlock& pb = blocks[b];
    Rational cost = pb.kind == PatternBlock::Kind::kOrbit
                        ? orbit_share_cost(arr.subarrays[pb.i - 1])
                        : Rational(arr.threshold(pb.i) - arr.count(pb.i) + arr.count(pb.k) -
                                   arr.threshold(pb.k));
    lp.objective.emplace_back(static_cast<int>(b), cost);
  }
  LpSolution sol = lp_solve(lp);

  PatternPlan plan;
  plan.share_length = sol.optimum;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (sol.point[b] == 0) continue;
    PatternBlock pb = blocks[b];
    pb.multiplicity = sol.point[b];
    plan.blocks.push_back(pb);
  }
  return plan;
}

}  // namespace mts
