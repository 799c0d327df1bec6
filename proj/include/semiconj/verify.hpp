#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "semiconj/cocycle.hpp"
#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/torus_map.hpp"
#include "semiconj/word.hpp"

namespace semiconj {

/// Sup over the grid of the equivariance defect of psi = id + phi2 against
/// generator g, measured on the torus:
///   r(m) = dist_T( delta_g(m) + phi2(F_g m) - A_g phi2(m), 0 ).
/// This is exactly the functional-equation residual of the construction.
inline double equivariance_residual(const ActionSpec& action, const GridFunction& phi2, int gen,
                                    int res = 0) {
  if (gen < 0 || gen >= static_cast<int>(action.generators.size()))
    fail(errc::bad_argument, "generator index out of range");
  const TorusMap& F = action.generators[static_cast<std::size_t>(gen)].map;
  const Eigen::MatrixXd A = F.matrix().to_real();
  GridFunction probe(action.n, 1,
                     res > 0 ? GridFunction::uniform_res(action.n, res) : phi2.res());
  std::vector<double> per(static_cast<std::size_t>(probe.node_count()));
  parallel_for(probe.node_count(), [&](std::int64_t node) {
    const Eigen::VectorXd m = probe.node_point(node);
    const Eigen::VectorXd d = F.delta().eval(m);
    const Eigen::VectorXd fm = mod1(A * m + d);
    const Eigen::VectorXd defect = d + phi2.eval(fm) - A * phi2.eval(m);
    per[static_cast<std::size_t>(node)] = wrap_torus(defect).lpNorm<Eigen::Infinity>();
  });
  double worst = 0;
  for (double v : per) worst = std::max(worst, v);
  return worst;
}

/// Winding matrix of a torus map around the coordinate loops: column a is the
/// accumulated (wrapped) increment of the map along the loop x0 + t e_a. The
/// columns of a continuous torus map are integer vectors; this is its action
/// on H_1(T^n) = Z^n. Segment count adapts until every increment is safely
/// below the wrap ambiguity.
inline IntMatrix induced_h1(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map,
                            int n, int segments = 0) {
  IntMatrix out(n);
  for (int a = 0; a < n; ++a) {
    int m = segments > 0 ? segments : 1024;
    for (;;) {
      Eigen::VectorXd winding = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd prev = map(Eigen::VectorXd::Zero(n));
      bool safe = true;
      for (int j = 1; j <= m; ++j) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        x[a] = static_cast<double>(j) / m;
        const Eigen::VectorXd cur = map(x);
        const Eigen::VectorXd inc = wrap_torus(cur - prev);
        if (inc.lpNorm<Eigen::Infinity>() > 0.25) {
          safe = false;
          break;
        }
        winding += inc;
        prev = cur;
      }
      if (!safe) {
        if (segments > 0 || m >= (1 << 20))
          fail(errc::not_integer, "loop increments too coarse to track the winding");
        m *= 2;
        continue;
      }
      for (int i = 0; i < n; ++i) {
        const double w = winding[i];
        const double r = std::nearbyint(w);
        if (std::abs(w - r) > kH1IntegerTol)
          fail(errc::not_integer,
               "winding " + std::to_string(w) + " is not within tolerance of an integer");
        out(i, a) = static_cast<std::int64_t>(r);
      }
      break;
    }
  }
  return out;
}

inline IntMatrix induced_h1(const TorusMap& F, int segments = 0) {
  return induced_h1([&](const Eigen::VectorXd& x) { return F.apply(x); }, F.n(), segments);
}

/// H_1 action of the candidate semiconjugacy psi = id + phi2.
inline IntMatrix induced_h1(const GridFunction& phi2, int segments = 0) {
  const int n = phi2.dim();
  return induced_h1([&](const Eigen::VectorXd& x) { return mod1(x + phi2.eval(x)); }, n, segments);
}

/// Lift of the word map through the chosen generator lifts: generators act by
/// F(x) = A x + delta(x), inverse letters by the exact inverse lift.
inline Eigen::VectorXd word_lift_apply(const ActionSpec& action, const Word& w,
                                       const Eigen::VectorXd& z) {
  Eigen::VectorXd p = z;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    const TorusMap& F = action.generators[static_cast<std::size_t>(it->gen)].map;
    if (!it->inv) {
      p = F.matrix().apply(p) + F.delta().eval(p);
    } else {
      const Eigen::VectorXd pre = invert_point(F, mod1(p));
      p = F.matrix().inverse().to_real() * p - F.matrix().inverse().to_real() * F.delta().eval(pre);
    }
  }
  return p;
}

/// The lattice defect tau_w(z) = psi~(F~_w(z)) - A_w psi~(z) of the candidate
/// psi = id + phi2, sampled at seeded points. For an actual torus-level
/// equivariance the defect is a constant integer vector; spread across the
/// samples beyond tol raises NOT_CONSTANT, distance from integers beyond tol
/// raises NOT_INTEGER.
struct TauValue {
  Eigen::VectorXd mean;               // sample mean of the defect
  std::vector<std::int64_t> rounded;  // nearest lattice vector
  double spread = 0;                  // max deviation of samples from the mean
  double integer_defect = 0;          // |mean - rounded|_inf
};

inline TauValue compute_tau(const ActionSpec& action, const GridFunction& phi2, const Word& w,
                            int samples = 12, double tol = 1e-3, std::uint64_t seed = kSeed) {
  const int n = action.n;
  const Eigen::MatrixXd Aw = word_matrix(w, action.matrices()).to_real();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Eigen::VectorXd> vals;
  vals.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd z(n);
    if (k == 0)
      z.setZero();
    else
      for (int i = 0; i < n; ++i) z[i] = uni(rng);
    const Eigen::VectorXd fz = word_lift_apply(action, w, z);
    const Eigen::VectorXd lhs = fz + phi2.eval(fz);
    const Eigen::VectorXd rhs = Aw * (z + phi2.eval(z));
    vals.push_back(lhs - rhs);
  }
  TauValue out;
  out.mean = Eigen::VectorXd::Zero(n);
  for (const auto& v : vals) out.mean += v;
  out.mean /= static_cast<double>(samples);
  for (const auto& v : vals)
    out.spread = std::max(out.spread, (v - out.mean).lpNorm<Eigen::Infinity>());
  if (out.spread > tol)
    fail(errc::not_constant,
         "lattice defect varies by " + std::to_string(out.spread) + " across sample points");
  out.rounded.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = std::nearbyint(out.mean[i]);
    out.rounded[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(r);
    out.integer_defect = std::max(out.integer_defect, std::abs(out.mean[i] - r));
  }
  if (out.integer_defect > tol)
    fail(errc::not_integer, "lattice defect " + std::to_string(out.integer_defect) +
                                " away from the integer lattice");
  return out;
}

/// Lattice defects of all reduced words up to max_len.
struct TauTable {
  std::vector<std::string> names;
  std::vector<Word> words;
  std::vector<TauValue> values;

  int find(const Word& w) const {
    for (std::size_t i = 0; i < words.size(); ++i)
      if (words[i] == w) return static_cast<int>(i);
    return -1;
  }
};

inline TauTable tau_table(const ActionSpec& action, const GridFunction& phi2, int max_len,
                          int samples = 12, double tol = 1e-3, std::uint64_t seed = kSeed) {
  TauTable table;
  table.names = action.names();
  for (const Word& w :
       enumerate_reduced_words(static_cast<int>(action.generators.size()), max_len)) {
    table.words.push_back(w);
    table.values.push_back(compute_tau(action, phi2, w, samples, tol, seed));
  }
  return table;
}

/// Pre-rounding defect of the cocycle rule tau(w1 w2) = tau(w1) + A_w1 tau(w2),
/// evaluated on the sample means of a table.
inline double tau_cocycle_defect(const ActionSpec& action, const TauTable& table, const Word& w1,
                                 const Word& w2) {
  const Word w12 = word_concat(w1, w2);
  const int i1 = table.find(w1), i2 = table.find(w2), i12 = table.find(w12);
  if (i1 < 0 || i2 < 0 || i12 < 0)
    fail(errc::bad_argument, "tau table does not cover the requested words");
  const Eigen::MatrixXd A1 = word_matrix(w1, action.matrices()).to_real();
  const Eigen::VectorXd defect = table.values[static_cast<std::size_t>(i12)].mean -
                                 table.values[static_cast<std::size_t>(i1)].mean -
                                 A1 * table.values[static_cast<std::size_t>(i2)].mean;
  return defect.lpNorm<Eigen::Infinity>();
}

/// Sup over the grid of the per-point functional equation of the series
/// construction for one word:
///   r(m) = |phi2(m) - A_w^-1 phi2(F_w m) - A_w^-1 alpha(w, m)|_inf.
/// For an exact solution this is zero; iterating it is what produces the
/// series, so it bounds how far phi2 is from its own next iterate.
inline double functional_equation_residual(const ActionSpec& action, const GridFunction& phi2,
                                           const Word& w, int res = 0) {
  const CocycleWalker walker(action, w);
  const Eigen::MatrixXd Ainv = word_matrix(word_inverse(w), action.matrices()).to_real();
  GridFunction probe(action.n, 1,
                     res > 0 ? GridFunction::uniform_res(action.n, res) : phi2.res());
  std::vector<double> per(static_cast<std::size_t>(probe.node_count()));
  parallel_for(probe.node_count(), [&](std::int64_t node) {
    const Eigen::VectorXd m = probe.node_point(node);
    const auto [al, fm] = walker.alpha_and_apply(m);
    const Eigen::VectorXd defect = phi2.eval(m) - Ainv * (phi2.eval(fm) + al);
    per[static_cast<std::size_t>(node)] = defect.lpNorm<Eigen::Infinity>();
  });
  double worst = 0;
  for (double v : per) worst = std::max(worst, v);
  return worst;
}

enum class OrbitGrowth { bounded, growing, inconclusive };

inline const char* orbit_growth_name(OrbitGrowth g) {
  switch (g) {
    case OrbitGrowth::bounded: return "BOUNDED";
    case OrbitGrowth::growing: return "GROWING";
    case OrbitGrowth::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

/// Result of an exact integer orbit enumeration. The value set stabilizing
/// between two lengths proves the orbit finite (every longer word's value is
/// an extension of a value already seen). A doubling of the max norm between
/// the half length and the full length is reported as growth; 64-bit
/// overflow along the way is growth a fortiori.
struct OrbitGrowthReport {
  OrbitGrowth kind = OrbitGrowth::inconclusive;
  std::vector<double> max_norm_by_length;  // cumulative, index 0 = the start set
  int stabilized_at = -1;                  // word length at which no new values appeared
};

namespace detail {

struct OrbitLetter {
  IntMatrix A;
  std::vector<std::int64_t> tau;  // affine part; all zero for plain orbits
};

/// Closure of the start set under v -> tau_s + A_s v over all letters, in
/// exact integer arithmetic, out to words of length max_len. Stabilization
/// proves the orbit finite; norm doubling over the second half (or 64-bit
/// overflow) is reported as growth.
inline OrbitGrowthReport orbit_growth_core(const std::vector<OrbitLetter>& letters,
                                           std::vector<std::vector<std::int64_t>> frontier,
                                           int max_len) {
  const auto inf_norm = [](const std::vector<std::int64_t>& v) {
    std::int64_t m = 0;
    for (auto x : v) m = std::max(m, std::abs(x));
    return static_cast<double>(m);
  };

  OrbitGrowthReport report;
  std::set<std::vector<std::int64_t>> seen(frontier.begin(), frontier.end());
  double max_norm = 0;
  for (const auto& v : frontier) max_norm = std::max(max_norm, inf_norm(v));
  report.max_norm_by_length.push_back(max_norm);

  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& v : frontier) {
      for (const auto& l : letters) {
        std::vector<std::int64_t> ext;
        try {
          ext = l.A.apply_exact(v);
          for (std::size_t i = 0; i < ext.size(); ++i)
            ext[i] = detail::narrow_i64(detail::add_checked(ext[i], l.tau[i], "orbit growth"),
                                        "orbit growth");
        } catch (const Error& e) {
          if (e.code() == errc::word_overflow) {
            report.kind = OrbitGrowth::growing;
            return report;
          }
          throw;
        }
        if (seen.insert(ext).second) {
          max_norm = std::max(max_norm, inf_norm(ext));
          next.push_back(std::move(ext));
        }
      }
    }
    report.max_norm_by_length.push_back(max_norm);
    if (next.empty()) {
      report.kind = OrbitGrowth::bounded;
      report.stabilized_at = len;
      return report;
    }
    frontier = std::move(next);
  }

  const std::size_t half = report.max_norm_by_length.size() / 2;
  const double early = std::max(report.max_norm_by_length[half], 1.0);
  if (report.max_norm_by_length.back() >= 2.0 * early)
    report.kind = OrbitGrowth::growing;
  else
    report.kind = OrbitGrowth::inconclusive;
  return report;
}

}  // namespace detail

/// Growth of the tau orbit under the cocycle extension maps v -> tau_s + A_s v
/// over all letters s (generators and inverses), run out to words of length
/// max_len. A bounded orbit means tau can be killed by a translation; growth
/// obstructs any torus-level equivariance behind the defects.
inline OrbitGrowthReport tau_orbit_growth(const std::vector<IntMatrix>& gens,
                                          const std::vector<std::vector<std::int64_t>>& tau_gens,
                                          int max_len) {
  if (gens.size() != tau_gens.size() || gens.empty())
    fail(errc::bad_argument, "need one tau per generator");
  const int n = gens[0].n();
  std::vector<detail::OrbitLetter> letters;
  std::vector<std::vector<std::int64_t>> start;
  for (std::size_t g = 0; g < gens.size(); ++g) {
    if (static_cast<int>(tau_gens[g].size()) != n)
      fail(errc::bad_argument, "tau vector has wrong dimension");
    letters.push_back({gens[g], tau_gens[g]});
    // tau(g^-1) = -A^-1 tau(g), exact in integers.
    const IntMatrix inv = gens[g].inverse();
    std::vector<std::int64_t> ti = inv.apply_exact(tau_gens[g]);
    for (auto& v : ti) v = -v;
    letters.push_back({inv, std::move(ti)});
    start.push_back(letters[letters.size() - 2].tau);
    start.push_back(letters.back().tau);
  }
  OrbitGrowthReport report =
      detail::orbit_growth_core(std::move(letters), std::move(start), max_len - 1);
  // The start set already holds the length-1 values; report word lengths.
  if (report.stabilized_at >= 0) ++report.stabilized_at;
  return report;
}

/// Growth of the plain linear orbit {A_w v : |w| <= max_len} of an integer
/// vector under all words in the generators and their inverses.
inline OrbitGrowthReport orbit_growth(const std::vector<std::int64_t>& v,
                                      const std::vector<IntMatrix>& gens, int max_len) {
  if (gens.empty()) fail(errc::bad_argument, "orbit growth needs at least one generator");
  const int n = gens[0].n();
  if (static_cast<int>(v.size()) != n)
    fail(errc::bad_argument, "orbit vector has wrong dimension");
  std::vector<detail::OrbitLetter> letters;
  const std::vector<std::int64_t> zero(static_cast<std::size_t>(n), 0);
  for (const auto& g : gens) {
    letters.push_back({g, zero});
    letters.push_back({g.inverse(), zero});
  }
  return detail::orbit_growth_core(std::move(letters), {v}, max_len);
}

}  // namespace semiconj
