#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/int_matrix.hpp"
#include "semiconj/torus_map.hpp"

namespace semiconj {

/// One sinusoidal term of a displacement component:
/// value(x) = amp * sin(2 pi (freq . x + phase)). Integer frequencies keep the
/// field Z^n-periodic.
struct BumpSpec {
  double amp = 0;
  std::vector<int> freq;
  double phase = 0;

  double eval(const Eigen::VectorXd& x) const {
    double arg = phase;
    for (std::size_t i = 0; i < freq.size(); ++i) arg += freq[i] * x[static_cast<int>(i)];
    return amp * std::sin(2.0 * M_PI * arg);
  }
};

/// Samples a displacement field with one bump per output component.
inline GridFunction delta_from_bumps(int n, int res, const std::vector<BumpSpec>& comps) {
  if (static_cast<int>(comps.size()) != n)
    fail(errc::bad_argument, "need exactly one bump term per component");
  for (const auto& b : comps)
    if (static_cast<int>(b.freq.size()) != n)
      fail(errc::bad_argument, "bump frequency vector must have dimension n");
  return GridFunction::sample(n, n, GridFunction::uniform_res(n, res),
                              [&](const Eigen::VectorXd& x) {
                                Eigen::VectorXd v(n);
                                for (int k = 0; k < n; ++k)
                                  v[k] = comps[static_cast<std::size_t>(k)].eval(x);
                                return v;
                              });
}

// --- Linear parts ---------------------------------------------------------

/// The free pair a = [[1,2],[0,1]], b = [[1,0],[2,1]] (both unipotent; only
/// their mixed words expand).
inline std::vector<IntMatrix> sanov_matrices() {
  return {parse_matrix("1,2;0,1"), parse_matrix("1,0;2,1")};
}

/// I + e_i e_j^T, the elementary matrix with a single off-diagonal 1.
inline IntMatrix elementary_matrix(int n, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= n || j >= n)
    fail(errc::bad_argument, "elementary matrix needs distinct indices in range");
  IntMatrix m = IntMatrix::identity(n);
  m(i, j) = 1;
  return m;
}

/// All n(n-1) elementary matrices, ordered by (i, j).
inline std::vector<IntMatrix> elementary_matrices(int n) {
  std::vector<IntMatrix> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out.push_back(elementary_matrix(n, i, j));
  return out;
}

/// Order-four rotation of the plane; every word is orthogonal, so nothing
/// ever expands.
inline IntMatrix rotation_matrix() { return parse_matrix("0,-1;1,0"); }

/// The standard hyperbolic automorphism [[2,1],[1,1]].
inline IntMatrix cat_matrix() { return parse_matrix("2,1;1,1"); }

inline ActionSpec make_linear_action(const std::vector<IntMatrix>& mats,
                                     const std::vector<std::string>& names) {
  if (mats.empty() || mats.size() != names.size())
    fail(errc::bad_argument, "need matching matrices and names");
  ActionSpec action;
  action.n = mats[0].n();
  for (std::size_t i = 0; i < mats.size(); ++i)
    action.generators.push_back({names[i], TorusMap::linear(mats[i])});
  action.validate();
  return action;
}

// --- Worked actions -------------------------------------------------------

/// The free-pair action with small smooth perturbations on both generators.
/// eps = 0 gives the bare linear action on trivial grids.
inline ActionSpec make_sanov(double eps, int res = 0) {
  const int r = res > 0 ? res : default_resolution(2);
  const auto mats = sanov_matrices();
  ActionSpec action;
  action.n = 2;
  if (eps == 0.0) return make_linear_action(mats, {"a", "b"});
  action.generators.push_back(
      {"a", TorusMap(mats[0], delta_from_bumps(2, r,
                                               {BumpSpec{eps, {0, 1}, 0.13},
                                                BumpSpec{0.8 * eps, {1, 0}, 0.37}}))});
  action.generators.push_back(
      {"b", TorusMap(mats[1], delta_from_bumps(2, r,
                                               {BumpSpec{0.9 * eps, {1, 1}, 0.71},
                                                BumpSpec{0.7 * eps, {0, 1}, 0.29}}))});
  action.validate();
  return action;
}

/// Single hyperbolic automorphism with a smooth perturbation.
inline ActionSpec make_cat(double eps, int res = 0) {
  const int r = res > 0 ? res : default_resolution(2);
  ActionSpec action;
  action.n = 2;
  if (eps == 0.0) return make_linear_action({cat_matrix()}, {"c"});
  action.generators.push_back(
      {"c", TorusMap(cat_matrix(), delta_from_bumps(2, r,
                                                    {BumpSpec{eps, {0, 1}, 0.11},
                                                     BumpSpec{0.6 * eps, {1, 1}, 0.53}}))});
  action.validate();
  return action;
}

/// A small homeomorphism h = id + eta of the torus, eta given by one sine
/// bump per component. Certified invertible when the row Lipschitz bound of
/// eta stays below 1, which also makes the inverse fixed-point iteration a
/// contraction in the sup norm.
struct Conjugator {
  int n = 0;
  std::vector<BumpSpec> bumps;

  Conjugator(int dim, std::vector<BumpSpec> comps) : n(dim), bumps(std::move(comps)) {
    if (static_cast<int>(bumps.size()) != n)
      fail(errc::bad_argument, "conjugator needs one bump per component");
    double lip = 0;
    for (const auto& b : bumps) {
      double l1 = 0;
      for (int f : b.freq) l1 += std::abs(f);
      lip = std::max(lip, std::abs(b.amp) * 2.0 * M_PI * l1);
    }
    if (!(lip < 0.95))
      fail(errc::conjugator_not_certified,
           "conjugator displacement has Lipschitz bound " + std::to_string(lip) +
               "; need < 0.95 to invert reliably");
  }

  Eigen::VectorXd eta(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = bumps[static_cast<std::size_t>(k)].eval(x);
    return v;
  }

  /// h^-1(y): solve z = y - eta(z) by the certified contraction.
  Eigen::VectorXd inverse(const Eigen::VectorXd& y) const {
    Eigen::VectorXd z = y;
    for (int it = 0; it < 400; ++it) {
      const Eigen::VectorXd next = y - eta(z);
      const double step = (next - z).lpNorm<Eigen::Infinity>();
      z = next;
      if (step < 1e-15) return z;
    }
    fail(errc::conjugator_not_certified, "conjugator inversion did not converge");
  }
};

namespace detail {

/// Displacement of the conjugated map h^-1 . A . h, sampled on the grid:
/// delta(x) = h^-1(A (x + eta(x))) - A x.
inline GridFunction conjugated_delta(const IntMatrix& A, const Conjugator& h, int res) {
  const Eigen::MatrixXd Ar = A.to_real();
  return GridFunction::sample(h.n, h.n, GridFunction::uniform_res(h.n, res),
                              [&](const Eigen::VectorXd& x) {
                                const Eigen::VectorXd y = Ar * (x + h.eta(x));
                                return Eigen::VectorXd(h.inverse(y) - Ar * x);
                              });
}

}  // namespace detail

/// An action with a known semiconjugacy: every generator is conjugated by the
/// same small homeomorphism h = id + eta, so psi = h intertwines the
/// perturbed action with the linear one exactly. phi_true holds eta sampled
/// on the same grid for comparison against solver output.
struct OracleAction {
  ActionSpec action;
  GridFunction phi_true;
};

/// Conjugates every generator of the linear action by h = id + eta.
inline OracleAction make_conjugated(const std::vector<IntMatrix>& mats,
                                    const std::vector<std::string>& names,
                                    const std::vector<BumpSpec>& hbumps, int res) {
  if (mats.empty() || mats.size() != names.size())
    fail(errc::bad_argument, "need matching matrices and names");
  const int n = mats[0].n();
  const Conjugator h(n, hbumps);
  OracleAction out{ActionSpec{},
                   GridFunction::sample(n, n, GridFunction::uniform_res(n, res),
                                        [&](const Eigen::VectorXd& x) { return h.eta(x); })};
  out.action.n = n;
  for (std::size_t g = 0; g < mats.size(); ++g)
    out.action.generators.push_back(
        {names[g], TorusMap(mats[g], detail::conjugated_delta(mats[g], h, res))});
  out.action.validate();
  return out;
}

/// The worked oracle: the free pair conjugated by
/// h = id + (eps sin 2 pi x2, eps sin 2 pi x1).
inline OracleAction make_conjugated_sanov(double eps, int res = 0) {
  const int r = res > 0 ? res : default_resolution(2);
  return make_conjugated(sanov_matrices(), {"a", "b"},
                         {BumpSpec{eps, {0, 1}, 0.0}, BumpSpec{eps, {1, 0}, 0.0}}, r);
}

/// The obstruction example: generator b is conjugated by h = id + eta while a
/// stays linear. Any candidate psi would have to commute with the parabolic a,
/// which pins its displacement to (f(x2), 0); matching the b-condition then
/// forces eta_1 to be a function of x2 alone. An eta_1 that genuinely depends
/// on x1, as below, therefore rules out every candidate, while each word's
/// series still converges on its own.
inline ActionSpec make_sanov_twist(double eps, int res = 0) {
  const auto mats = sanov_matrices();
  if (eps == 0.0) return make_linear_action(mats, {"a", "b"});
  const int r = res > 0 ? res : default_resolution(2);
  const Conjugator h(2, {BumpSpec{eps, {1, 0}, 0.0}, BumpSpec{0.8 * eps, {1, 1}, 0.25}});
  ActionSpec action;
  action.n = 2;
  action.generators.push_back({"a", TorusMap::linear(mats[0])});
  action.generators.push_back({"b", TorusMap(mats[1], detail::conjugated_delta(mats[1], h, r))});
  action.validate();
  return action;
}

/// All elementary generators of SL_n(Z) with small smooth perturbations.
inline ActionSpec make_elementary(int n, double eps, int res = 0) {
  if (n < 2) fail(errc::bad_argument, "elementary action needs n >= 2");
  const int r = res > 0 ? res : default_resolution(n);
  ActionSpec action;
  action.n = n;
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::string name = "e" + std::to_string(i + 1) + std::to_string(j + 1);
      if (eps == 0.0) {
        action.generators.push_back({name, TorusMap::linear(elementary_matrix(n, i, j))});
      } else {
        std::vector<BumpSpec> comps;
        for (int k = 0; k < n; ++k) {
          std::vector<int> freq(static_cast<std::size_t>(n), 0);
          freq[static_cast<std::size_t>((k + j) % n)] = 1;
          comps.push_back(BumpSpec{eps / (1.0 + k + count % 3), freq, 0.1 * (1 + count + k)});
        }
        action.generators.push_back(
            {name, TorusMap(elementary_matrix(n, i, j), delta_from_bumps(n, r, comps))});
      }
      ++count;
    }
  action.validate();
  return action;
}

/// Finite-order rotation action; nothing expands, so the certificate search
/// can never close.
inline ActionSpec make_rotation() { return make_linear_action({rotation_matrix()}, {"r"}); }

}  // namespace semiconj
