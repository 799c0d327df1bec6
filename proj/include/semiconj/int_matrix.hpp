#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "semiconj/errors.hpp"

namespace semiconj {

namespace detail {

using int128 = __int128;

inline std::int64_t narrow_i64(int128 v, const char* ctx) {
  if (v > int128(INT64_MAX) || v < int128(INT64_MIN))
    fail(errc::word_overflow, std::string("integer overflow in ") + ctx);
  return static_cast<std::int64_t>(v);
}

inline int128 mul_checked(int128 a, int128 b, const char* ctx) {
  int128 r;
  if (__builtin_mul_overflow(a, b, &r))
    fail(errc::word_overflow, std::string("integer overflow in ") + ctx);
  return r;
}

inline int128 add_checked(int128 a, int128 b, const char* ctx) {
  int128 r;
  if (__builtin_add_overflow(a, b, &r))
    fail(errc::word_overflow, std::string("integer overflow in ") + ctx);
  return r;
}

inline int128 sub_checked(int128 a, int128 b, const char* ctx) {
  int128 r;
  if (__builtin_sub_overflow(a, b, &r))
    fail(errc::word_overflow, std::string("integer overflow in ") + ctx);
  return r;
}

}  // namespace detail

/// Exact integer n x n matrix: the linear part A of a torus map, or a word
/// product of generator matrices. All products are overflow-checked and
/// raise WORD_OVERFLOW instead of wrapping.
class IntMatrix {
 public:
  explicit IntMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0) {
    if (n < 1) fail(errc::bad_argument, "matrix dimension must be >= 1");
  }

  static IntMatrix identity(int n) {
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    const int n = static_cast<int>(rows.size());
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n)
        fail(errc::bad_argument, "matrix rows must all have length n");
      for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  int n() const { return n_; }

  std::int64_t& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::int64_t operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  bool operator==(const IntMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }
  bool operator!=(const IntMatrix& o) const { return !(*this == o); }

  IntMatrix operator*(const IntMatrix& o) const {
    if (n_ != o.n_) fail(errc::bad_argument, "matrix product dimension mismatch");
    IntMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        detail::int128 acc = 0;
        for (int k = 0; k < n_; ++k)
          acc = detail::add_checked(
              acc, detail::mul_checked((*this)(i, k), o(k, j), "matrix product"),
              "matrix product");
        r(i, j) = detail::narrow_i64(acc, "matrix product");
      }
    return r;
  }

  /// A^k for k >= 0, exact.
  IntMatrix pow(int k) const {
    if (k < 0) fail(errc::bad_argument, "pow exponent must be >= 0");
    IntMatrix r = identity(n_);
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  /// Exact determinant (fraction-free Bareiss elimination).
  std::int64_t determinant() const {
    std::vector<detail::int128> w(a_.begin(), a_.end());
    const int n = n_;
    detail::int128 prev = 1;
    int sign = 1;
    for (int c = 0; c < n; ++c) {
      int piv = -1;
      for (int r = c; r < n; ++r)
        if (w[static_cast<std::size_t>(r) * n + c] != 0) { piv = r; break; }
      if (piv < 0) return 0;
      if (piv != c) {
        for (int j = 0; j < n; ++j)
          std::swap(w[static_cast<std::size_t>(piv) * n + j], w[static_cast<std::size_t>(c) * n + j]);
        sign = -sign;
      }
      for (int r = c + 1; r < n; ++r) {
        for (int j = c + 1; j < n; ++j) {
          detail::int128 t = detail::sub_checked(
              detail::mul_checked(w[static_cast<std::size_t>(c) * n + c],
                                  w[static_cast<std::size_t>(r) * n + j], "determinant"),
              detail::mul_checked(w[static_cast<std::size_t>(r) * n + c],
                                  w[static_cast<std::size_t>(c) * n + j], "determinant"),
              "determinant");
          w[static_cast<std::size_t>(r) * n + j] = t / prev;
        }
        w[static_cast<std::size_t>(r) * n + c] = 0;
      }
      prev = w[static_cast<std::size_t>(c) * n + c];
    }
    return detail::narrow_i64(sign > 0 ? prev : -prev, "determinant");
  }

  /// Exact rank over the rationals.
  int rank() const {
    std::vector<detail::int128> w(a_.begin(), a_.end());
    const int n = n_;
    detail::int128 prev = 1;
    int rk = 0;
    for (int c = 0; c < n && rk < n; ++c) {
      int piv = -1;
      for (int r = rk; r < n; ++r)
        if (w[static_cast<std::size_t>(r) * n + c] != 0) { piv = r; break; }
      if (piv < 0) continue;
      if (piv != rk)
        for (int j = 0; j < n; ++j)
          std::swap(w[static_cast<std::size_t>(piv) * n + j], w[static_cast<std::size_t>(rk) * n + j]);
      for (int r = rk + 1; r < n; ++r) {
        for (int j = c + 1; j < n; ++j) {
          detail::int128 t = detail::sub_checked(
              detail::mul_checked(w[static_cast<std::size_t>(rk) * n + c],
                                  w[static_cast<std::size_t>(r) * n + j], "rank"),
              detail::mul_checked(w[static_cast<std::size_t>(r) * n + c],
                                  w[static_cast<std::size_t>(rk) * n + j], "rank"),
              "rank");
          w[static_cast<std::size_t>(r) * n + j] = t / prev;
        }
        w[static_cast<std::size_t>(r) * n + c] = 0;
      }
      prev = w[static_cast<std::size_t>(rk) * n + c];
      ++rk;
    }
    return rk;
  }

  bool is_unimodular() const {
    const std::int64_t d = determinant();
    return d == 1 || d == -1;
  }

  void require_unimodular() const {
    const std::int64_t d = determinant();
    if (d != 1 && d != -1)
      fail(errc::not_unimodular, "matrix has determinant " + std::to_string(d) +
                                     ", expected +1 or -1: " + to_string());
  }

  /// Exact inverse of a unimodular matrix (adjugate over det = +-1).
  IntMatrix inverse() const {
    const std::int64_t d = determinant();
    if (d != 1 && d != -1)
      fail(errc::not_unimodular, "inverse requires determinant +1 or -1, got " + std::to_string(d));
    IntMatrix inv(n_);
    if (n_ == 1) {
      inv(0, 0) = d;
      return inv;
    }
    IntMatrix minor(n_ - 1);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        for (int r = 0, rr = 0; r < n_; ++r) {
          if (r == i) continue;
          for (int c = 0, cc = 0; c < n_; ++c) {
            if (c == j) continue;
            minor(rr, cc) = (*this)(r, c);
            ++cc;
          }
          ++rr;
        }
        const std::int64_t cof = ((i + j) % 2 == 0 ? 1 : -1) * minor.determinant();
        inv(j, i) = d * cof;  // adj(A)^T / det with det = +-1
      }
    return inv;
  }

  Eigen::MatrixXd to_real() const {
    Eigen::MatrixXd m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = static_cast<double>((*this)(i, j));
    return m;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      double acc = 0;
      for (int j = 0; j < n_; ++j) acc += static_cast<double>((*this)(i, j)) * x[j];
      y[i] = acc;
    }
    return y;
  }

  /// Exact integer matrix-vector product (overflow-checked).
  std::vector<std::int64_t> apply_exact(const std::vector<std::int64_t>& v) const {
    if (static_cast<int>(v.size()) != n_) fail(errc::bad_argument, "vector length mismatch");
    std::vector<std::int64_t> y(n_, 0);
    for (int i = 0; i < n_; ++i) {
      detail::int128 acc = 0;
      for (int j = 0; j < n_; ++j)
        acc = detail::add_checked(acc, detail::mul_checked((*this)(i, j), v[j], "matrix-vector"),
                                  "matrix-vector");
      y[i] = detail::narrow_i64(acc, "matrix-vector");
    }
    return y;
  }

  /// Renders rows separated by ';', entries by ',' ("2,1;1,1").
  std::string to_string() const {
    std::ostringstream os;
    for (int i = 0; i < n_; ++i) {
      if (i) os << ';';
      for (int j = 0; j < n_; ++j) {
        if (j) os << ',';
        os << (*this)(i, j);
      }
    }
    return os.str();
  }

 private:
  int n_;
  std::vector<std::int64_t> a_;
};

/// Parses the row text format "2,1;1,1". Whitespace around entries is ignored.
inline IntMatrix parse_matrix(const std::string& text) {
  std::vector<std::vector<std::int64_t>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    std::vector<std::int64_t> entries;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      try {
        std::size_t pos = 0;
        const long long v = std::stoll(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        entries.push_back(v);
      } catch (const std::exception&) {
        fail(errc::parse_error, "bad matrix entry '" + cell + "' in '" + text + "'");
      }
    }
    if (!entries.empty()) rows.push_back(std::move(entries));
  }
  if (rows.empty()) fail(errc::parse_error, "empty matrix text");
  const int n = static_cast<int>(rows.size());
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != n)
      fail(errc::parse_error, "matrix text is not square: '" + text + "'");
  return IntMatrix::from_rows(rows);
}

}  // namespace semiconj
