#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/int_matrix.hpp"

namespace semiconj {

/// Componentwise reduction to [0, 1).
inline Eigen::VectorXd mod1(Eigen::VectorXd v) {
  for (int i = 0; i < v.size(); ++i) {
    double u = v[i] - std::floor(v[i]);
    if (!(u >= 0.0) || u >= 1.0) u = 0.0;
    v[i] = u;
  }
  return v;
}

/// Componentwise reduction to [-1/2, 1/2): the signed distance of each
/// coordinate from the nearest integer.
inline Eigen::VectorXd wrap_torus(Eigen::VectorXd v) {
  for (int i = 0; i < v.size(); ++i) {
    const double w = v[i] - std::nearbyint(v[i]);
    v[i] = (w == 0.5) ? -0.5 : w;
  }
  return v;
}

/// Distance on the torus in the sup metric.
inline double torus_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return wrap_torus(a - b).lpNorm<Eigen::Infinity>();
}

/// A perturbed toral automorphism F(x) = A x + delta(x), where A is a
/// unimodular integer matrix and delta is a Z^n-periodic displacement field
/// held as a grid interpolant. The lift convention is fixed by this formula:
/// F(x + k) = F(x) + A k for integer k.
class TorusMap {
 public:
  TorusMap(IntMatrix A, GridFunction delta) : A_(std::move(A)), delta_(std::move(delta)) {
    A_.require_unimodular();
    if (delta_.dim() != A_.n() || delta_.codim() != A_.n())
      fail(errc::bad_argument, "displacement field dimensions must match the matrix");
  }

  /// A purely linear map (constant-zero displacement on a trivial grid).
  static TorusMap linear(const IntMatrix& A) {
    return TorusMap(A, GridFunction(A.n(), A.n(), GridFunction::uniform_res(A.n(), 1)));
  }

  int n() const { return A_.n(); }
  const IntMatrix& matrix() const { return A_; }
  const GridFunction& delta() const { return delta_; }

  /// Lift value F(x) = A x + delta(x) in R^n.
  Eigen::VectorXd apply_lift(const Eigen::VectorXd& x) const {
    return A_.apply(x) + delta_.eval(x);
  }

  /// The induced torus map, with the image reduced to [0,1)^n.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mod1(apply_lift(x)); }

 private:
  IntMatrix A_;
  GridFunction delta_;
};

/// Solves F(x) = y on the torus to within tol (sup metric).
///
/// Starts with the contraction x <- A^-1 (y - delta(x)), which converges when
/// Lip(delta) * ||A^-1|| < 1. Strongly perturbed maps (conjugated generators
/// in particular) violate that bound, so a stall in the residual hands the
/// point over to a damped Newton iteration on the wrapped residual, using the
/// interpolant's cell Jacobian.
inline Eigen::VectorXd invert_point(const TorusMap& F, const Eigen::VectorXd& y,
                                    double tol = kInvertTol, int max_iter = kInvertMaxIter) {
  const int n = F.n();
  if (y.size() != n) fail(errc::bad_argument, "invert_point target has wrong dimension");
  const Eigen::MatrixXd Ainv = F.matrix().inverse().to_real();
  const Eigen::MatrixXd Ar = F.matrix().to_real();

  Eigen::VectorXd x = mod1(Ainv * y);
  Eigen::VectorXd d = F.delta().eval(x);
  double res = wrap_torus(F.matrix().apply(x) + d - y).lpNorm<Eigen::Infinity>();
  if (res <= tol) return x;

  int iter = 0;
  // Phase 1: fixed point, demanding a 4x residual drop per 8-step window so
  // that slow linear convergence is handed to Newton early. The displacement
  // value at the new iterate doubles as the residual evaluation.
  double window_res = res;
  const int window = 8;
  const int fp_budget = std::min(max_iter, 64);
  while (iter < fp_budget) {
    x = mod1(Ainv * (y - d));
    d = F.delta().eval(x);
    res = wrap_torus(F.matrix().apply(x) + d - y).lpNorm<Eigen::Infinity>();
    ++iter;
    if (res <= tol) return x;
    if (iter % window == 0) {
      if (res > 0.25 * window_res) break;
      window_res = res;
    }
  }

  // Phase 2: damped Newton on g(x) = wrap(F(x) - y).
  while (iter < max_iter) {
    Eigen::MatrixXd jac_delta;
    const Eigen::VectorXd fx = Ar * x + F.delta().eval_with_jacobian(x, jac_delta);
    const Eigen::VectorXd g = wrap_torus(fx - y);
    res = g.lpNorm<Eigen::Infinity>();
    if (res <= tol) return x;
    const Eigen::MatrixXd J = Ar + jac_delta;
    const Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-g);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-6) {
      const Eigen::VectorXd xt = mod1(x + t * dx);
      const double rt = torus_dist(F.apply_lift(xt), y);
      if (rt < (1.0 - 1e-4 * t) * res) {
        x = xt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++iter;
    if (!accepted)
      fail(errc::invert_diverged, "Newton line search stalled at residual " + std::to_string(res));
  }
  fail(errc::invert_diverged,
       "inversion used " + std::to_string(max_iter) + " iterations without reaching tolerance");
}

/// Sufficient condition for F = A x + delta(x) to be invertible (and hence a
/// homeomorphism): the fixed-point inversion contracts in the sup norm when
/// Lip_inf(delta) * |A^-1|_inf < 1. Necessary it is not; invert_point falls
/// back to Newton beyond this bound.
struct HomeoCondition {
  double lip_delta = 0;  // certified sup-norm Lipschitz bound of delta
  double inv_norm = 0;   // |A^-1| in the sup operator norm (max abs row sum)
  bool sufficient = false;
};

inline HomeoCondition homeo_condition(const TorusMap& F) {
  HomeoCondition out;
  out.lip_delta = lipschitz_inf_bound(F.delta());
  out.inv_norm = F.matrix().inverse().to_real().cwiseAbs().rowwise().sum().maxCoeff();
  out.sufficient = out.lip_delta * out.inv_norm < 1.0;
  return out;
}

/// The composite map T1 . T2 resampled as a TorusMap: linear part A1 A2,
/// displacement A1 delta2(x) + delta1(T2 x). Exact at the sampling nodes,
/// interpolated in between. res = 0 takes the finer of the two input grids.
inline TorusMap compose(const TorusMap& T1, const TorusMap& T2, int res = 0) {
  if (T1.n() != T2.n()) fail(errc::bad_argument, "cannot compose maps of different dimensions");
  const int n = T1.n();
  const IntMatrix A = T1.matrix() * T2.matrix();
  int r = res;
  if (r <= 0) {
    r = 1;
    for (int a = 0; a < n; ++a)
      r = std::max({r, T1.delta().res()[static_cast<std::size_t>(a)],
                    T2.delta().res()[static_cast<std::size_t>(a)]});
  }
  if (T1.delta().sup_norm() == 0.0 && T2.delta().sup_norm() == 0.0) return TorusMap::linear(A);
  const Eigen::MatrixXd A1 = T1.matrix().to_real();
  GridFunction delta = GridFunction::sample(
      n, n, GridFunction::uniform_res(n, r), [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd d2 = T2.delta().eval(x);
        const Eigen::VectorXd mid = mod1(T2.matrix().apply(x) + d2);
        return Eigen::VectorXd(A1 * d2 + T1.delta().eval(mid));
      });
  return TorusMap(A, std::move(delta));
}

/// One named generator of the action: a perturbed map together with its
/// linear part.
struct Generator {
  std::string name;
  TorusMap map;
};

/// A finitely generated action on T^n given by perturbed toral automorphisms.
struct ActionSpec {
  int n = 0;
  std::vector<Generator> generators;

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < generators.size(); ++i)
      if (generators[i].name == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(generators.size());
    for (const auto& g : generators) out.push_back(g.name);
    return out;
  }

  std::vector<IntMatrix> matrices() const {
    std::vector<IntMatrix> out;
    out.reserve(generators.size());
    for (const auto& g : generators) out.push_back(g.map.matrix());
    return out;
  }

  void validate() const {
    if (n < 1) fail(errc::bad_argument, "action dimension must be >= 1");
    if (generators.empty()) fail(errc::bad_argument, "action needs at least one generator");
    for (const auto& g : generators) {
      if (g.map.n() != n) fail(errc::bad_argument, "generator '" + g.name + "' has wrong dimension");
      if (g.name.empty()) fail(errc::bad_argument, "generator names must be nonempty");
    }
    for (std::size_t i = 0; i < generators.size(); ++i)
      for (std::size_t j = i + 1; j < generators.size(); ++j)
        if (generators[i].name == generators[j].name)
          fail(errc::bad_argument, "duplicate generator name '" + generators[i].name + "'");
  }
};

}  // namespace semiconj
