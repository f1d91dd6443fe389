#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mts/error.hpp"
#include "mts/field.hpp"
#include "mts/structure.hpp"

namespace mts {

// Bit i of a mask is variable i in canonical order.
using VarMask = std::uint64_t;

struct VariableId {
  enum class Kind { kSecret, kShare };
  Kind kind = Kind::kShare;
  int a = 0;  // sub-array k for secrets, participant i for shares (1-based)
  int b = 0;  // index j within the sub-array (1-based); unused for shares

  static VariableId secret(int k, int j) { return {Kind::kSecret, k, j}; }
  static VariableId share(int i) { return {Kind::kShare, i, 0}; }
  bool is_secret() const { return kind == Kind::kSecret; }
  friend bool operator==(const VariableId&, const VariableId&) = default;
};

inline std::string to_string(const VariableId& v) {
  if (v.is_secret()) return "S" + std::to_string(v.a) + "." + std::to_string(v.b);
  return "P" + std::to_string(v.a);
}

// Canonical variable order: S_{1,1} .. S_{K,m_K}, then P_1 .. P_N.
inline std::size_t n_variables(const StructurePair& s) {
  return static_cast<std::size_t>(s.array.total() + s.n);
}

inline std::size_t index_of(const StructurePair& s, const VariableId& v) {
  if (v.is_secret()) {
    if (v.a < 1 || v.a > s.array.K() || v.b < 1 || v.b > s.array.count(v.a)) {
      throw Error("unknown variable: " + to_string(v));
    }
    std::size_t idx = 0;
    for (int k = 1; k < v.a; ++k) idx += static_cast<std::size_t>(s.array.count(k));
    return idx + static_cast<std::size_t>(v.b - 1);
  }
  if (v.a < 1 || v.a > s.n) throw Error("unknown variable: " + to_string(v));
  return static_cast<std::size_t>(s.array.total() + v.a - 1);
}

inline VariableId variable_at(const StructurePair& s, std::size_t idx) {
  std::size_t total = static_cast<std::size_t>(s.array.total());
  if (idx >= total) {
    if (idx >= n_variables(s)) throw Error("variable index out of range");
    return VariableId::share(static_cast<int>(idx - total) + 1);
  }
  for (int k = 1; k <= s.array.K(); ++k) {
    std::size_t m = static_cast<std::size_t>(s.array.count(k));
    if (idx < m) return VariableId::secret(k, static_cast<int>(idx) + 1);
    idx -= m;
  }
  throw Error("variable index out of range");
}

inline VarMask bit(std::size_t idx) { return VarMask{1} << idx; }

// Secrets of sub-arrays [from, to], 1-based inclusive.
inline VarMask secrets_mask(const StructurePair& s, int from, int to) {
  VarMask m = 0;
  std::size_t idx = 0;
  for (int k = 1; k <= s.array.K(); ++k) {
    for (int j = 0; j < s.array.count(k); ++j, ++idx) {
      if (k >= from && k <= to) m |= bit(idx);
    }
  }
  return m;
}

inline VarMask all_secrets_mask(const StructurePair& s) { return secrets_mask(s, 1, s.array.K()); }

inline VarMask all_shares_mask(const StructurePair& s) {
  VarMask m = 0;
  for (int i = 1; i <= s.n; ++i) m |= bit(index_of(s, VariableId::share(i)));
  return m;
}

// Participant subset (bit i-1 = P_i) to a variable mask.
inline VarMask shares_mask(const StructurePair& s, std::uint32_t participants) {
  VarMask m = 0;
  std::size_t base = static_cast<std::size_t>(s.array.total());
  for (int i = 0; i < s.n; ++i) {
    if (participants & (1u << i)) m |= bit(base + static_cast<std::size_t>(i));
  }
  return m;
}

inline std::string describe_mask(const StructurePair& s, VarMask m) {
  std::string out = "{";
  for (std::size_t i = 0; i < n_variables(s); ++i) {
    if (!(m & bit(i))) continue;
    if (out.size() > 1) out += ",";
    out += to_string(variable_at(s, i));
  }
  return out + "}";
}

class LinearScheme;

// How a scheme was produced, so it can be rebuilt over a different prime.
struct Recipe {
  std::string label;
  std::uint64_t min_order = 2;  // smallest admissible field order for the layout
  bool needs_check = false;     // larger primes are not automatically admissible
  std::function<LinearScheme(Prime)> build;
};

// A generator matrix split into one column block per variable. Blocks may be
// empty (width 0) for dummy secrets.
class LinearScheme {
 public:
  LinearScheme(StructurePair structure, Prime q, std::size_t n_rows, std::vector<MatrixFq> blocks,
               std::shared_ptr<const Recipe> recipe = nullptr)
      : structure_(validate(structure)),
        q_(q),
        n_rows_(n_rows),
        blocks_(std::move(blocks)),
        recipe_(std::move(recipe)) {
    if (mts::n_variables(structure_) > 64) throw Error("too many variables");
    if (blocks_.size() != mts::n_variables(structure_)) throw Error("block count does not match structure");
    for (const MatrixFq& b : blocks_) {
      if (b.rows() != n_rows_ || !(b.modulus() == q_)) throw Error("block shape mismatch");
      if (b.cols() > 0 && rank(b) != b.cols()) throw Error("block is not full column rank");
    }
  }

  const StructurePair& structure() const { return structure_; }
  Prime modulus() const { return q_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_variables() const { return blocks_.size(); }
  const std::vector<MatrixFq>& blocks() const { return blocks_; }
  const MatrixFq& block(std::size_t idx) const { return blocks_.at(idx); }
  const MatrixFq& block(const VariableId& v) const { return blocks_[index_of(structure_, v)]; }
  std::size_t width(std::size_t idx) const { return blocks_.at(idx).cols(); }
  const std::shared_ptr<const Recipe>& recipe() const { return recipe_; }

  MatrixFq generator() const {
    std::vector<const MatrixFq*> parts;
    for (const MatrixFq& b : blocks_) parts.push_back(&b);
    return hstack(q_, n_rows_, parts);
  }

  // Columns of every variable in `mask`, stacked in canonical order.
  MatrixFq columns(VarMask mask) const {
    std::vector<const MatrixFq*> parts;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (mask & bit(i)) parts.push_back(&blocks_[i]);
    }
    return hstack(q_, n_rows_, parts);
  }

  friend bool operator==(const LinearScheme& a, const LinearScheme& b) {
    return a.structure_ == b.structure_ && a.q_ == b.q_ && a.n_rows_ == b.n_rows_ &&
           a.blocks_ == b.blocks_;
  }

 private:
  StructurePair structure_;
  Prime q_;
  std::size_t n_rows_;
  std::vector<MatrixFq> blocks_;
  std::shared_ptr<const Recipe> recipe_;
};

}  // namespace mts
