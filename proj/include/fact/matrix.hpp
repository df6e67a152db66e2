#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fact/surjection.hpp"

namespace fact {

using Rational = mpq_class;

/// Parses "p", "-p" or "p/q" into a canonical rational.
inline Rational parse_rational(const std::string& text) {
  Rational q;
  if (text.empty() || q.set_str(text, 10) != 0) throw DomainError("malformed rational '" + text + "'");
  if (text.find('/') != std::string::npos && q.get_den() == 0)
    throw DomainError("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

/// Always "p/q", including integers ("2/1").
inline std::string format_rational(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Dense row-major matrix of exact rationals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DomainError("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    Rational t;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Rational& aik = a(i, k);
        if (sgn(aik) == 0) continue;
        const bool unit = aik == 1;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          const Rational& bkj = b(k, j);
          if (sgn(bkj) == 0) continue;
          if (unit) {
            c(i, j) += bkj;
          } else {
            t = aik * bkj;
            c(i, j) += t;
          }
        }
      }
    return c;
  }

  Matrix scaled(const Rational& s) const {
    Matrix m(*this);
    for (auto& v : m.data_) v *= s;
    return m;
  }

  /// Exact Gauss-Jordan inverse; nullopt when singular or not square.
  std::optional<Matrix> inverse() const {
    if (rows_ != cols_) return std::nullopt;
    const auto n = rows_;
    Matrix a(*this);
    Matrix inv = identity(n);
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (pivot < n && sgn(a(pivot, col)) == 0) ++pivot;
      if (pivot == n) return std::nullopt;
      if (pivot != col) {
        for (std::size_t j = 0; j < n; ++j) {
          swap(a(pivot, j), a(col, j));
          swap(inv(pivot, j), inv(col, j));
        }
      }
      Rational p = a(col, col);
      if (p != 1) {
        for (std::size_t j = 0; j < n; ++j) {
          a(col, j) /= p;
          inv(col, j) /= p;
        }
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col || sgn(a(r, col)) == 0) continue;
        Rational f = a(r, col);
        for (std::size_t j = 0; j < n; ++j) {
          if (sgn(a(col, j)) != 0) a(r, j) -= f * a(col, j);
          if (sgn(inv(col, j)) != 0) inv(r, j) -= f * inv(col, j);
        }
      }
    }
    return inv;
  }

  bool is_invertible() const { return inverse().has_value(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// Kronecker product; basis order is lexicographic with the left factor most
/// significant.
inline Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (sgn(a(i, j)) == 0) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
          if (sgn(b(r, c)) != 0) k(i * b.rows() + r, j * b.cols() + c) = a(i, j) * b(r, c);
    }
  return k;
}

}  // namespace fact
