#pragma once

#include <Eigen/Dense>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "semiconj/errors.hpp"
#include "semiconj/parallel.hpp"

namespace semiconj {

/// Grid nodes within this relative offset of a sample point are treated as
/// exact hits, so evaluation at node coordinates reproduces stored samples
/// bit-for-bit even when x*res is one ulp off an integer.
inline constexpr double kGridSnap = 1e-12;

/// Hard cap on the domain dimension (keeps evaluation buffers on the stack).
inline constexpr int kMaxDim = 32;

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t k) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(k));
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  put_bytes(os, b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  put_bytes(os, b, 4);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  put_bytes(os, b, 8);
}

inline bool get_bytes(std::istream& is, void* p, std::size_t k) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(k));
  return static_cast<std::size_t>(is.gcount()) == k;
}

inline bool get_u16(std::istream& is, std::uint16_t& v) {
  unsigned char b[2];
  if (!get_bytes(is, b, 2)) return false;
  v = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  return true;
}

inline bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!get_bytes(is, b, 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return true;
}

inline bool get_f64(std::istream& is, double& v) {
  unsigned char b[8];
  if (!get_bytes(is, b, 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  std::memcpy(&v, &bits, 8);
  return true;
}

}  // namespace detail

/// A map T^d -> R^m sampled on a uniform grid (res[a] nodes along axis a,
/// node i at x_a = i/res[a]) and extended to the torus by periodic multilinear
/// interpolation. Samples are stored row-major with axis 0 slowest and the m
/// output components contiguous per node.
class GridFunction {
 public:
  GridFunction(int d, int m, std::vector<int> res)
      : d_(d), m_(m), res_(std::move(res)) {
    if (d_ < 1 || m_ < 1) fail(errc::bad_argument, "grid function needs d,m >= 1");
    if (d_ > kMaxDim) fail(errc::bad_argument, "grid dimension exceeds the supported maximum");
    if (static_cast<int>(res_.size()) != d_)
      fail(errc::bad_argument, "grid resolution list must have one entry per axis");
    std::uint64_t nodes = 1;
    for (int r : res_) {
      if (r < 1) fail(errc::bad_argument, "grid resolution must be >= 1");
      nodes *= static_cast<std::uint64_t>(r);
      if (nodes > (std::uint64_t(1) << 33))
        fail(errc::bad_argument, "grid resolution too large");
    }
    nodes_ = static_cast<std::int64_t>(nodes);
    data_.assign(static_cast<std::size_t>(nodes_) * m_, 0.0);
  }

  static std::vector<int> uniform_res(int d, int r) { return std::vector<int>(static_cast<std::size_t>(d), r); }

  /// Samples fn (mapping R^d point in [0,1)^d to R^m) at every grid node.
  template <class Fn>
  static GridFunction sample(int d, int m, const std::vector<int>& res, Fn&& fn) {
    GridFunction g(d, m, res);
    std::atomic<bool> bad{false};
    parallel_for(g.nodes_, [&](std::int64_t node) {
      std::vector<int> idx(static_cast<std::size_t>(d));
      g.unflatten(node, idx);
      Eigen::VectorXd x(d);
      for (int a = 0; a < d; ++a) x[a] = static_cast<double>(idx[a]) / g.res_[a];
      const Eigen::VectorXd v = fn(x);
      if (v.size() != m || !v.allFinite()) {
        bad.store(true, std::memory_order_relaxed);
        return;
      }
      for (int c = 0; c < m; ++c) g.data_[static_cast<std::size_t>(node) * m + c] = v[c];
    });
    if (bad.load())
      fail(errc::sample_not_finite, "sampled function produced a non-finite or wrong-size value");
    return g;
  }

  int dim() const { return d_; }
  int codim() const { return m_; }
  const std::vector<int>& res() const { return res_; }
  std::int64_t node_count() const { return nodes_; }
  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

  std::int64_t flatten(const std::vector<int>& idx) const {
    std::int64_t f = 0;
    for (int a = 0; a < d_; ++a) f = f * res_[a] + idx[a];
    return f;
  }

  void unflatten(std::int64_t node, std::vector<int>& idx) const {
    for (int a = d_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(node % res_[a]);
      node /= res_[a];
    }
  }

  double node_value(std::int64_t node, int comp) const {
    return data_[static_cast<std::size_t>(node) * m_ + comp];
  }

  void set_node_value(std::int64_t node, int comp, double v) {
    data_[static_cast<std::size_t>(node) * m_ + comp] = v;
  }

  Eigen::VectorXd node_vector(std::int64_t node) const {
    Eigen::VectorXd v(m_);
    for (int c = 0; c < m_; ++c) v[c] = node_value(node, c);
    return v;
  }

  /// Coordinates of a node in [0,1)^d.
  Eigen::VectorXd node_point(std::int64_t node) const {
    std::vector<int> idx(static_cast<std::size_t>(d_));
    unflatten(node, idx);
    Eigen::VectorXd x(d_);
    for (int a = 0; a < d_; ++a) x[a] = static_cast<double>(idx[a]) / res_[a];
    return x;
  }

  /// Periodic multilinear interpolation at any point of R^d (reduced mod 1).
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(m_);
    eval_impl(x, out, nullptr);
    return out;
  }

  /// Interpolated value plus the interpolant's Jacobian (m x d, derivative of
  /// eval with respect to x). The Jacobian is the cell-local one; on cell
  /// faces the lower cell's value is reported.
  Eigen::VectorXd eval_with_jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    Eigen::VectorXd out(m_);
    jac.resize(m_, d_);
    eval_impl(x, out, &jac);
    return out;
  }

  double sup_norm() const {
    double s = 0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
  }

  /// Writes the SCGF binary container (little-endian, bit-exact samples).
  void save(std::ostream& os) const {
    os.write("SCGF", 4);
    detail::put_u16(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(d_));
    detail::put_u32(os, static_cast<std::uint32_t>(m_));
    for (int r : res_) detail::put_u32(os, static_cast<std::uint32_t>(r));
    for (double v : data_) detail::put_f64(os, v);
    if (!os) fail(errc::io_error, "failed writing SCGF stream");
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(errc::io_error, "cannot open '" + path + "' for writing");
    save(os);
  }

  static GridFunction load(std::istream& is) {
    char magic[4];
    if (!detail::get_bytes(is, magic, 4) || std::memcmp(magic, "SCGF", 4) != 0)
      fail(errc::parse_error, "not an SCGF stream (bad magic)");
    std::uint16_t version = 0;
    if (!detail::get_u16(is, version) || version != 1)
      fail(errc::parse_error, "unsupported SCGF version " + std::to_string(version));
    std::uint32_t d = 0, m = 0;
    if (!detail::get_u32(is, d) || !detail::get_u32(is, m) || d == 0 || m == 0 || d > 64)
      fail(errc::parse_error, "corrupt SCGF header");
    std::vector<int> res(d);
    for (std::uint32_t a = 0; a < d; ++a) {
      std::uint32_t r = 0;
      if (!detail::get_u32(is, r) || r == 0 || r > (1u << 24))
        fail(errc::parse_error, "corrupt SCGF resolution");
      res[a] = static_cast<int>(r);
    }
    GridFunction g(static_cast<int>(d), static_cast<int>(m), res);
    for (double& v : g.data_)
      if (!detail::get_f64(is, v)) fail(errc::parse_error, "truncated SCGF sample block");
    return g;
  }

  static GridFunction load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(errc::io_error, "cannot open '" + path + "' for reading");
    return load(is);
  }

 private:
  void eval_impl(const Eigen::VectorXd& x, Eigen::VectorXd& out, Eigen::MatrixXd* jac) const {
    if (x.size() != d_) fail(errc::bad_argument, "evaluation point has wrong dimension");
    out.setZero(m_);
    if (jac) jac->setZero();
    if (nodes_ == 1) {  // constant field
      const double* s = data_.data();
      for (int k = 0; k < m_; ++k) out[k] = s[k];
      return;
    }
    std::array<int, kMaxDim> base;
    std::array<double, kMaxDim> t;
    std::array<int, kMaxDim> idx;
    for (int a = 0; a < d_; ++a) {
      double u = x[a] - std::floor(x[a]);
      if (!(u >= 0.0) || u >= 1.0) u = 0.0;
      const double scaled = u * res_[a];
      int i0 = static_cast<int>(scaled);
      double ta = scaled - i0;
      if (ta < kGridSnap) {
        ta = 0.0;
      } else if (ta > 1.0 - kGridSnap) {
        ta = 0.0;
        ++i0;
      }
      base[static_cast<std::size_t>(a)] = i0 % res_[a];
      t[static_cast<std::size_t>(a)] = ta;
    }
    const int corners = 1 << d_;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      for (int a = 0; a < d_; ++a) {
        const bool hi = (c >> a) & 1;
        const auto ua = static_cast<std::size_t>(a);
        w *= hi ? t[ua] : 1.0 - t[ua];
        idx[ua] = hi ? (base[ua] + 1) % res_[a] : base[ua];
      }
      if (w == 0.0 && !jac) continue;
      std::int64_t node = 0;
      for (int a = 0; a < d_; ++a) node = node * res_[a] + idx[static_cast<std::size_t>(a)];
      const double* s = &data_[static_cast<std::size_t>(node) * m_];
      if (w != 0.0)
        for (int k = 0; k < m_; ++k) out[k] += w * s[k];
      if (jac) {
        for (int a = 0; a < d_; ++a) {
          double dw = (((c >> a) & 1) ? 1.0 : -1.0) * res_[a];
          for (int b = 0; b < d_; ++b) {
            if (b == a) continue;
            dw *= ((c >> b) & 1) ? t[static_cast<std::size_t>(b)] : 1.0 - t[static_cast<std::size_t>(b)];
          }
          if (dw == 0.0) continue;
          for (int k = 0; k < m_; ++k) (*jac)(k, a) += dw * s[k];
        }
      }
    }
  }

  int d_;
  int m_;
  std::vector<int> res_;
  std::int64_t nodes_;
  std::vector<double> data_;
};

/// Upper bound on the sup-metric Lipschitz constant of the interpolant: the
/// partial derivatives of a multilinear cell are convex combinations of the
/// scaled edge differences, so the max row sum over cell edges bounds the
/// Jacobian infinity norm everywhere.
inline double lipschitz_inf_bound(const GridFunction& g) {
  const int d = g.dim();
  const int m = g.codim();
  std::vector<double> per(static_cast<std::size_t>(g.node_count()), 0.0);
  parallel_for(g.node_count(), [&](std::int64_t node) {
    std::vector<int> idx(static_cast<std::size_t>(d));
    g.unflatten(node, idx);
    // Max edge slope along each axis over the cell anchored at this node.
    double row_sum_bound = 0.0;
    for (int k = 0; k < m; ++k) {
      double rs = 0.0;
      for (int a = 0; a < d; ++a) {
        double worst = 0.0;
        const int corners = 1 << d;
        for (int c = 0; c < corners; ++c) {
          if ((c >> a) & 1) continue;  // edges indexed by their low endpoint
          std::vector<int> lo = idx, hi = idx;
          for (int b = 0; b < d; ++b)
            if (b != a && ((c >> b) & 1)) {
              lo[b] = (lo[b] + 1) % g.res()[b];
              hi[b] = (hi[b] + 1) % g.res()[b];
            }
          hi[a] = (hi[a] + 1) % g.res()[a];
          const double diff = std::abs(g.node_value(g.flatten(hi), k) -
                                       g.node_value(g.flatten(lo), k)) *
                              g.res()[a];
          worst = std::max(worst, diff);
        }
        rs += worst;
      }
      row_sum_bound = std::max(row_sum_bound, rs);
    }
    per[static_cast<std::size_t>(node)] = row_sum_bound;
  });
  double s = 0;
  for (double v : per) s = std::max(s, v);
  return s;
}

/// Estimate of the multilinear interpolation error for the smooth function
/// behind the samples: sum over axes of max |second difference| / 8, the
/// standard h^2 f''/8 bound with f'' h^2 read off the grid.
inline double interp_error_estimate(const GridFunction& g) {
  const int d = g.dim();
  const int m = g.codim();
  double total = 0.0;
  for (int a = 0; a < d; ++a) {
    if (g.res()[a] < 3) continue;  // no curvature information
    std::vector<double> per(static_cast<std::size_t>(g.node_count()), 0.0);
    parallel_for(g.node_count(), [&](std::int64_t node) {
      std::vector<int> idx(static_cast<std::size_t>(d));
      g.unflatten(node, idx);
      std::vector<int> prev = idx, next = idx;
      prev[a] = (prev[a] + g.res()[a] - 1) % g.res()[a];
      next[a] = (next[a] + 1) % g.res()[a];
      const std::int64_t np = g.flatten(prev), nn = g.flatten(next);
      double worst = 0.0;
      for (int k = 0; k < m; ++k) {
        const double dd =
            g.node_value(np, k) - 2.0 * g.node_value(node, k) + g.node_value(nn, k);
        worst = std::max(worst, std::abs(dd));
      }
      per[static_cast<std::size_t>(node)] = worst;
    });
    double axis_max = 0.0;
    for (double v : per) axis_max = std::max(axis_max, v);
    total += axis_max / 8.0;
  }
  return total;
}

/// Largest pointwise distance between two grid functions on the finer of the
/// two grids (componentwise sup norm of the difference of interpolants,
/// sampled at the union-refinement nodes).
inline double sup_distance(const GridFunction& f, const GridFunction& g) {
  if (f.dim() != g.dim() || f.codim() != g.codim())
    fail(errc::bad_argument, "sup_distance requires matching dimensions");
  std::vector<int> res(static_cast<std::size_t>(f.dim()));
  for (int a = 0; a < f.dim(); ++a) res[a] = std::max(f.res()[a], g.res()[a]);
  GridFunction probe(f.dim(), 1, res);
  // Deterministic reduction: compute per-node then fold serially.
  std::vector<double> per(static_cast<std::size_t>(probe.node_count()));
  parallel_for(probe.node_count(), [&](std::int64_t node) {
    const Eigen::VectorXd x = probe.node_point(node);
    per[static_cast<std::size_t>(node)] = (f.eval(x) - g.eval(x)).lpNorm<Eigen::Infinity>();
  });
  double s = 0;
  for (double v : per) s = std::max(s, v);
  return s;
}

}  // namespace semiconj
