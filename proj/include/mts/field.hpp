#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mts/error.hpp"

namespace mts {

using Element = std::uint64_t;

inline bool is_prime(std::uint64_t m) {
  if (m < 2) return false;
  if (m % 2 == 0) return m == 2;
  for (std::uint64_t d = 3; d * d <= m; d += 2) {
    if (m % d == 0) return false;
  }
  return true;
}

// A prime field order. Kept below 2^32 so a product of two residues fits in
// 64 bits.
class Prime {
 public:
  static constexpr std::uint64_t kMax = (std::uint64_t{1} << 32) - 1;

  explicit Prime(std::uint64_t q) : q_(q) {
    if (q > kMax || !is_prime(q)) {
      throw Error("not a prime modulus: " + std::to_string(q));
    }
  }

  std::uint64_t value() const { return q_; }
  operator std::uint64_t() const { return q_; }
  friend bool operator==(Prime a, Prime b) { return a.q_ == b.q_; }

 private:
  std::uint64_t q_;
};

inline Prime next_prime_at_least(std::uint64_t m) {
  if (m < 2) throw Error("next_prime_at_least requires m >= 2");
  while (!is_prime(m)) ++m;
  return Prime(m);
}

namespace gf {

inline Element add(Element a, Element b, std::uint64_t q) {
  Element s = a + b;
  return s >= q ? s - q : s;
}
inline Element sub(Element a, Element b, std::uint64_t q) {
  return a >= b ? a - b : a + q - b;
}
inline Element mul(Element a, Element b, std::uint64_t q) { return (a * b) % q; }
inline Element neg(Element a, std::uint64_t q) { return a == 0 ? 0 : q - a; }

inline Element pow(Element base, std::uint64_t exp, std::uint64_t q) {
  Element result = 1 % q;
  base %= q;
  while (exp > 0) {
    if (exp & 1) result = mul(result, base, q);
    base = mul(base, base, q);
    exp >>= 1;
  }
  return result;
}

// Extended Euclid; a must be nonzero mod q.
inline Element inv(Element a, std::uint64_t q) {
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = static_cast<std::int64_t>(q), new_r = static_cast<std::int64_t>(a % q);
  if (new_r == 0) throw Error("zero has no inverse");
  while (new_r != 0) {
    std::int64_t quotient = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - quotient * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - quotient * new_r);
  }
  if (t < 0) t += static_cast<std::int64_t>(q);
  return static_cast<Element>(t);
}

inline Element reduce(std::int64_t v, std::uint64_t q) {
  std::int64_t m = v % static_cast<std::int64_t>(q);
  return static_cast<Element>(m < 0 ? m + static_cast<std::int64_t>(q) : m);
}

}  // namespace gf

// Dense row-major matrix over F_q with least nonnegative residues.
class MatrixFq {
 public:
  MatrixFq(Prime q, std::size_t rows, std::size_t cols)
      : q_(q), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  MatrixFq(Prime q, std::size_t rows, std::size_t cols, std::vector<Element> data)
      : q_(q), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error("matrix data size mismatch");
    for (Element e : data_) {
      if (e >= q_.value()) throw Error("matrix entry out of range");
    }
  }

  static MatrixFq from_rows(Prime q, const std::vector<std::vector<std::int64_t>>& rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows[0].size();
    MatrixFq m(q, r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw Error("ragged matrix rows");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = gf::reduce(rows[i][j], q);
    }
    return m;
  }

  static MatrixFq identity(Prime q, std::size_t n) {
    MatrixFq m(q, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  Prime modulus() const { return q_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<Element>& data() const { return data_; }

  Element& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Element operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Element> column(std::size_t c) const {
    std::vector<Element> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  MatrixFq transpose() const {
    MatrixFq t(q_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  MatrixFq select_columns(std::span<const std::size_t> cols) const {
    MatrixFq out(q_, rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = (*this)(r, cols[j]);
    return out;
  }

  friend bool operator==(const MatrixFq& a, const MatrixFq& b) {
    return a.q_ == b.q_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  Prime q_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Element> data_;
};

// Horizontal concatenation; all parts must share rows and modulus.
inline MatrixFq hstack(Prime q, std::size_t rows, std::span<const MatrixFq* const> parts) {
  std::size_t cols = 0;
  for (const MatrixFq* p : parts) {
    if (p->rows() != rows || !(p->modulus() == q)) throw Error("hstack shape mismatch");
    cols += p->cols();
  }
  MatrixFq out(q, rows, cols);
  std::size_t offset = 0;
  for (const MatrixFq* p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p->cols(); ++c) out(r, offset + c) = (*p)(r, c);
    offset += p->cols();
  }
  return out;
}

inline std::vector<Element> mat_vec(const MatrixFq& a, std::span<const Element> x) {
  if (x.size() != a.cols()) throw Error("dimension mismatch");
  std::uint64_t q = a.modulus();
  std::vector<Element> out(a.rows(), 0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Element acc = 0;
    for (std::size_t c = 0; c < a.cols(); ++c) acc = gf::add(acc, gf::mul(a(r, c), x[c], q), q);
    out[r] = acc;
  }
  return out;
}

// Row vector times matrix: x * A.
inline std::vector<Element> vec_mat(std::span<const Element> x, const MatrixFq& a) {
  if (x.size() != a.rows()) throw Error("dimension mismatch");
  std::uint64_t q = a.modulus();
  std::vector<Element> out(a.cols(), 0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r] == 0) continue;
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] = gf::add(out[c], gf::mul(x[r], a(r, c), q), q);
  }
  return out;
}

namespace detail {

// In-place reduced row echelon form. For each column, left to right, the pivot
// is the first row (top to bottom) at or below the current rank with a
// nonzero entry. Only the first `pivot_cols` columns are eligible as pivots.
// Returns the pivot column of each pivot row.
inline std::vector<std::size_t> rref(MatrixFq& m, std::size_t pivot_cols) {
  std::uint64_t q = m.modulus();
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < pivot_cols && rank < m.rows(); ++c) {
    std::size_t p = rank;
    while (p < m.rows() && m(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != rank) {
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(rank, j));
    }
    Element scale = gf::inv(m(rank, c), q);
    for (std::size_t j = c; j < m.cols(); ++j) m(rank, j) = gf::mul(m(rank, j), scale, q);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == rank || m(r, c) == 0) continue;
      Element f = m(r, c);
      for (std::size_t j = c; j < m.cols(); ++j) {
        m(r, j) = gf::sub(m(r, j), gf::mul(f, m(rank, j), q), q);
      }
    }
    pivots.push_back(c);
    ++rank;
  }
  return pivots;
}

}  // namespace detail

// Rank over F_q by forward elimination.
inline std::size_t rank(const MatrixFq& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  // Eliminate along the shorter dimension.
  MatrixFq work = m.rows() <= m.cols() ? m.transpose() : m;
  std::uint64_t q = work.modulus();
  std::size_t r = 0;
  for (std::size_t c = 0; c < work.cols() && r < work.rows(); ++c) {
    std::size_t p = r;
    while (p < work.rows() && work(p, c) == 0) ++p;
    if (p == work.rows()) continue;
    if (p != r) {
      for (std::size_t j = c; j < work.cols(); ++j) std::swap(work(p, j), work(r, j));
    }
    Element scale = gf::inv(work(r, c), q);
    for (std::size_t i = r + 1; i < work.rows(); ++i) {
      if (work(i, c) == 0) continue;
      Element f = gf::mul(work(i, c), scale, q);
      for (std::size_t j = c; j < work.cols(); ++j) {
        work(i, j) = gf::sub(work(i, j), gf::mul(f, work(r, j), q), q);
      }
    }
    ++r;
  }
  return r;
}

struct AffineSolution {
  std::vector<Element> particular;
  std::vector<std::vector<Element>> nullspace;  // each vector's first nonzero entry is 1
};

// Solves A x = b. The full solution set is particular + span(nullspace).
inline AffineSolution solve_affine(const MatrixFq& a, std::span<const Element> b) {
  if (b.size() != a.rows()) throw Error("solve_affine: A.rows != length(b)");
  Prime q = a.modulus();
  std::size_t n = a.cols();
  MatrixFq aug(q, a.rows(), n + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = a(r, c);
    if (b[r] >= q.value()) throw Error("vector entry out of range");
    aug(r, n) = b[r];
  }
  std::vector<std::size_t> pivots = detail::rref(aug, n);
  for (std::size_t r = pivots.size(); r < aug.rows(); ++r) {
    if (aug(r, n) != 0) throw Error("inconsistent system");
  }

  AffineSolution sol;
  sol.particular.assign(n, 0);
  std::vector<bool> is_pivot(n, false);
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    sol.particular[pivots[r]] = aug(r, n);
    is_pivot[pivots[r]] = true;
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Element> v(n, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = gf::neg(aug(r, f), q);
    Element lead = 0;
    for (Element e : v) {
      if (e != 0) {
        lead = e;
        break;
      }
    }
    Element scale = gf::inv(lead, q);
    for (Element& e : v) e = gf::mul(e, scale, q);
    sol.nullspace.push_back(std::move(v));
  }
  return sol;
}

}  // namespace mts
