#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/torus_map.hpp"
#include "semiconj/word.hpp"

namespace semiconj {

/// Evaluates the displacement cocycle of a word over the action.
///
/// For a single generator the cocycle is the generator's displacement field;
/// for longer words it obeys alpha(w1 w2, x) = alpha(w1, w2 x) + A_w1 alpha(w2, x),
/// and for an inverse letter alpha(g^-1, p) = -A_g^-1 delta_g(x) with x the
/// preimage of p under F_g. Walking the word right to left shares the orbit
/// points between the cocycle terms and the point images.
class CocycleWalker {
 public:
  CocycleWalker(const ActionSpec& action, Word word, double invert_tol = kInvertTol,
                int invert_max_iter = kInvertMaxIter)
      : action_(&action),
        word_(std::move(word)),
        matrix_(word_matrix(word_, action.matrices())),
        invert_tol_(invert_tol),
        invert_max_iter_(invert_max_iter) {
    for (const Sym& s : word_) {
      if (s.gen < 0 || s.gen >= static_cast<int>(action.generators.size()))
        fail(errc::bad_argument, "word references an unknown generator");
      Step st;
      st.gen = s.gen;
      st.inv = s.inv;
      const IntMatrix& A = action.generators[static_cast<std::size_t>(s.gen)].map.matrix();
      st.lin = s.inv ? A.inverse().to_real() : A.to_real();
      if (s.inv) st.a_inv = A.inverse().to_real();
      steps_.push_back(std::move(st));
    }
  }

  const Word& word() const { return word_; }
  const IntMatrix& matrix() const { return matrix_; }

  /// Returns {alpha(w, x), w·x} in one pass.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> alpha_and_apply(const Eigen::VectorXd& x) const {
    const int n = action_->n;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p = mod1(x);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
      const TorusMap& F = action_->generators[static_cast<std::size_t>(it->gen)].map;
      Eigen::VectorXd a_sym(n);
      if (!it->inv) {
        const Eigen::VectorXd d = F.delta().eval(p);
        a_sym = d;
        p = mod1(F.matrix().apply(p) + d);
      } else {
        const Eigen::VectorXd pre = invert_point(F, p, invert_tol_, invert_max_iter_);
        a_sym = -(it->a_inv * F.delta().eval(pre));
        p = pre;
      }
      acc = a_sym + it->lin * acc;
    }
    return {acc, p};
  }

  Eigen::VectorXd alpha(const Eigen::VectorXd& x) const { return alpha_and_apply(x).first; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return alpha_and_apply(x).second; }

  /// Certified sup bound on |alpha(w, .)|_2: prefix operator norms times the
  /// per-letter displacement bounds.
  double alpha_sup_bound() const {
    const int n = action_->n;
    const double root_n = std::sqrt(static_cast<double>(n));
    double bound = 0.0;
    Eigen::MatrixXd prefix = Eigen::MatrixXd::Identity(n, n);
    for (const Step& st : steps_) {
      const TorusMap& F = action_->generators[static_cast<std::size_t>(st.gen)].map;
      double letter = root_n * F.delta().sup_norm();
      if (st.inv) letter *= operator_norm_2(st.a_inv);
      bound += operator_norm_2(prefix) * letter;
      prefix = prefix * st.lin;
    }
    return bound;
  }

 private:
  struct Step {
    int gen = 0;
    bool inv = false;
    Eigen::MatrixXd lin;    // A_s as a real matrix (A or its exact inverse)
    Eigen::MatrixXd a_inv;  // A^-1 for inverse letters
  };

  static double operator_norm_2(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  }

  const ActionSpec* action_;
  Word word_;
  IntMatrix matrix_;
  double invert_tol_;
  int invert_max_iter_;
  std::vector<Step> steps_;
};

/// Applies a word to a torus point (inverse letters via point inversion).
inline Eigen::VectorXd apply_word_point(const ActionSpec& action, const Word& w,
                                        const Eigen::VectorXd& x) {
  return CocycleWalker(action, w).apply(x);
}

/// A word's displacement cocycle sampled on a grid.
struct CocycleField {
  Word word;
  GridFunction values;
};

inline CocycleField sample_cocycle(const ActionSpec& action, const Word& w, int res) {
  const CocycleWalker walker(action, w);
  CocycleField field{w, GridFunction::sample(action.n, action.n,
                                             GridFunction::uniform_res(action.n, res),
                                             [&](const Eigen::VectorXd& x) {
                                               return walker.alpha(x);
                                             })};
  return field;
}

/// The word's action realized as a single TorusMap: linear part A_w and the
/// word cocycle as displacement. Exact at sampling nodes (up to the inversion
/// tolerance on inverse letters), interpolated in between. res = 0 takes the
/// finest generator grid.
inline TorusMap word_map(const ActionSpec& action, const Word& w, int res = 0) {
  action.validate();
  int r = res;
  if (r <= 0) {
    r = 1;
    for (const auto& g : action.generators)
      for (int v : g.map.delta().res()) r = std::max(r, v);
  }
  const IntMatrix Aw = word_matrix(w, action.matrices());
  bool all_linear = true;
  for (const Sym& s : w)
    all_linear =
        all_linear &&
        action.generators[static_cast<std::size_t>(s.gen)].map.delta().sup_norm() == 0.0;
  if (all_linear) return TorusMap::linear(Aw);
  return TorusMap(Aw, sample_cocycle(action, w, r).values);
}

/// Sup over grid nodes of |alpha(w1 w2, m) - alpha(w1, w2 m) - A_w1 alpha(w2, m)|_inf.
/// Analytically zero; numerically it exercises the shared inversion paths.
inline double cocycle_identity_residual(const ActionSpec& action, const Word& w1, const Word& w2,
                                        int res) {
  const CocycleWalker left(action, word_concat(w1, w2));
  const CocycleWalker outer(action, w1);
  const CocycleWalker inner(action, w2);
  const Eigen::MatrixXd A1 = word_matrix(w1, action.matrices()).to_real();
  GridFunction probe(action.n, 1, GridFunction::uniform_res(action.n, res));
  std::vector<double> per(static_cast<std::size_t>(probe.node_count()));
  parallel_for(probe.node_count(), [&](std::int64_t node) {
    const Eigen::VectorXd m = probe.node_point(node);
    const auto [a2, p2] = inner.alpha_and_apply(m);
    const Eigen::VectorXd lhs = left.alpha(m);
    const Eigen::VectorXd rhs = outer.alpha(p2) + A1 * a2;
    per[static_cast<std::size_t>(node)] = (lhs - rhs).lpNorm<Eigen::Infinity>();
  });
  double worst = 0;
  for (double v : per) worst = std::max(worst, v);
  return worst;
}

}  // namespace semiconj
