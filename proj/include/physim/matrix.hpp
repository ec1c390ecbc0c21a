#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "physim/error.hpp"
#include "physim/random.hpp"

namespace physim {

// Dense 0/1 vector.
class BinaryVector {
 public:
  BinaryVector() = default;
  explicit BinaryVector(std::size_t n) : bits_(n, 0) {}
  BinaryVector(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) push_back(b);
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  void set(std::size_t i, int bit) {
    check_bit(bit);
    bits_.at(i) = static_cast<std::uint8_t>(bit);
  }
  void push_back(int bit) {
    check_bit(bit);
    bits_.push_back(static_cast<std::uint8_t>(bit));
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  friend bool operator==(const BinaryVector&, const BinaryVector&) = default;

 private:
  static void check_bit(int bit) {
    if (bit != 0 && bit != 1) throw invalid_parameter("binary entries must be 0 or 1");
  }
  std::vector<std::uint8_t> bits_;
};

// Dense row-major 0/1 matrix with at least one row and one column.
class BinaryMatrix {
 public:
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw dimension_error("matrix dimensions must be >= 1");
    data_.assign(rows * cols, 0);
  }
  explicit BinaryMatrix(std::size_t n) : BinaryMatrix(n, n) {}

  static BinaryMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty()) throw dimension_error("matrix dimensions must be >= 1");
    BinaryMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw dimension_error("ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m.set(i, j, rows[i][j]);
    }
    return m;
  }

  static BinaryMatrix identity(std::size_t n) {
    BinaryMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  static BinaryMatrix ones(std::size_t rows, std::size_t cols) {
    BinaryMatrix m(rows, cols);
    m.data_.assign(rows * cols, 1);
    return m;
  }

  // i.i.d. Bernoulli(p) entries.
  static BinaryMatrix random(std::size_t n, Rng& rng, double p = 0.5) {
    BinaryMatrix m(n);
    for (auto& e : m.data_) e = rng.bernoulli(p) ? 1 : 0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void set(std::size_t i, std::size_t j, int bit) {
    if (bit != 0 && bit != 1) throw invalid_parameter("binary entries must be 0 or 1");
    if (i >= rows_ || j >= cols_) throw dimension_error("matrix index out of range");
    data_[i * cols_ + j] = static_cast<std::uint8_t>(bit);
  }

  BinaryVector column(std::size_t j) const {
    BinaryVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v.set(i, (*this)(i, j));
    return v;
  }

  void set_column(std::size_t j, const BinaryVector& v) {
    if (v.size() != rows_) throw dimension_error("column length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) set(i, j, v[i]);
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> data_;
};

// ceil(log2 n) for n >= 1.
constexpr int ceil_log2(std::size_t n) { return n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1)); }

// Smallest r with |v| < 2^r for every v up to max_abs (at least 1).
constexpr int bits_for(std::uint64_t max_abs) {
  return std::max(1, static_cast<int>(std::bit_width(max_abs)));
}

// Dense row-major signed integer matrix whose entries satisfy |entry| < 2^bit_width.
class IntMatrix {
 public:
  IntMatrix(std::size_t rows, std::size_t cols, int bit_width)
      : rows_(rows), cols_(cols), bit_width_(bit_width) {
    if (rows == 0 || cols == 0) throw dimension_error("matrix dimensions must be >= 1");
    if (bit_width < 1 || bit_width > 62) throw invalid_parameter("bit width must be in [1, 62]");
    data_.assign(rows * cols, 0);
  }

  // Bit width chosen as the smallest that holds every entry.
  static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    if (rows.empty() || rows.front().empty()) throw dimension_error("matrix dimensions must be >= 1");
    std::uint64_t max_abs = 0;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw dimension_error("ragged matrix rows");
      for (auto v : r) max_abs = std::max<std::uint64_t>(max_abs, static_cast<std::uint64_t>(std::llabs(v)));
    }
    IntMatrix m(rows.size(), rows.front().size(), bits_for(max_abs));
    for (std::size_t i = 0; i < m.rows_; ++i)
      for (std::size_t j = 0; j < m.cols_; ++j) m.set(i, j, rows[i][j]);
    return m;
  }

  static IntMatrix from_binary(const BinaryMatrix& b) {
    IntMatrix m(b.rows(), b.cols(), 1);
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) m.set(i, j, b(i, j));
    return m;
  }

  // Uniform entries in [0, 2^bit_width).
  static IntMatrix random_nonnegative(std::size_t n, int bit_width, Rng& rng) {
    IntMatrix m(n, n, bit_width);
    const std::uint64_t mask = (std::uint64_t{1} << bit_width) - 1;
    for (auto& e : m.data_) e = static_cast<std::int64_t>(rng.next() & mask);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int bit_width() const { return bit_width_; }

  std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void set(std::size_t i, std::size_t j, std::int64_t v) {
    if (i >= rows_ || j >= cols_) throw dimension_error("matrix index out of range");
    if (static_cast<std::uint64_t>(std::llabs(v)) >> bit_width_ != 0) {
      throw invalid_parameter("entry " + std::to_string(v) + " does not fit in " + std::to_string(bit_width_) +
                              " bits");
    }
    data_[i * cols_ + j] = v;
  }

  // Equality compares values only; two matrices with the same entries but
  // different declared widths are equal.
  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  int bit_width_;
  std::vector<std::int64_t> data_;
};

// Reference products by direct summation. These are the oracles the physical
// simulators are checked against.

inline std::vector<std::int64_t> integer_matvec(const BinaryMatrix& a, const BinaryVector& b) {
  if (a.cols() != b.size()) throw dimension_error("matvec: length mismatch");
  std::vector<std::int64_t> c(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c[i] += a(i, j) * b[j];
  return c;
}

inline IntMatrix integer_product(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw dimension_error("matmul: inner dimensions differ");
  std::vector<std::int64_t> acc(a.rows() * b.cols(), 0);
  std::uint64_t max_abs = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::int64_t s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      acc[i * b.cols() + j] = s;
      max_abs = std::max<std::uint64_t>(max_abs, static_cast<std::uint64_t>(std::llabs(s)));
    }
  IntMatrix c(a.rows(), b.cols(), bits_for(max_abs));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) c.set(i, j, acc[i * b.cols() + j]);
  return c;
}

inline IntMatrix integer_product(const BinaryMatrix& a, const BinaryMatrix& b) {
  return integer_product(IntMatrix::from_binary(a), IntMatrix::from_binary(b));
}

// Plain-text matrix format: first line n, then n lines of n whitespace
// separated entries.

namespace detail {

inline std::vector<std::vector<std::int64_t>> read_square_text(std::istream& in) {
  long long n = 0;
  if (!(in >> n) || n < 1) throw invalid_parameter("matrix file: expected positive dimension on first line");
  std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(n),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(n)));
  for (auto& r : rows)
    for (auto& v : r) {
      long long x = 0;
      if (!(in >> x)) throw invalid_parameter("matrix file: expected " + std::to_string(n * n) + " entries");
      v = x;
    }
  return rows;
}

}  // namespace detail

inline BinaryMatrix read_binary_matrix(std::istream& in) {
  const auto rows = detail::read_square_text(in);
  std::vector<std::vector<int>> bits(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (auto v : rows[i]) {
      if (v != 0 && v != 1) throw invalid_parameter("matrix file: binary matrix entries must be 0 or 1");
      bits[i].push_back(static_cast<int>(v));
    }
  return BinaryMatrix::from_rows(bits);
}

inline IntMatrix read_int_matrix(std::istream& in) { return IntMatrix::from_rows(detail::read_square_text(in)); }

template <typename Matrix>
void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << static_cast<long long>(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace physim
