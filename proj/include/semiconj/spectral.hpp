#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/int_matrix.hpp"
#include "semiconj/word.hpp"

namespace semiconj {

/// Invariant splitting R^n = E + F of an integer matrix: E is the span of the
/// generalized eigenspaces with |lambda| > 1 + tol_unit (the expanding part),
/// F the rest. proj_E is the spectral projector onto E along F (oblique, not
/// orthogonal), so it commutes with the matrix.
struct Splitting {
  int n = 0;
  double tol_unit = kTolUnit;
  std::vector<std::complex<double>> eigenvalues;  // all n, defective unit roots snapped to +-1
  int dim_E = 0;
  int dim_F = 0;
  Eigen::MatrixXd basis_E;  // n x dim_E, orthonormal columns spanning E
  Eigen::MatrixXd basis_F;  // n x dim_F, orthonormal columns spanning F
  Eigen::MatrixXd proj_E;   // n x n spectral projector onto E along F
  double min_expansion = 0;     // min |lambda| over E (0 when E is trivial)
  double max_nonexpanding = 0;  // max |lambda| over F (0 when F is trivial)
  bool has_unit = false;        // some eigenvalue modulus within tol_unit of 1

  /// No eigenvalue on (or within tol_unit of) the unit circle.
  bool hyperbolic() const { return !has_unit; }
};

/// One entry of a clustered spectrum report.
struct EigenCluster {
  std::complex<double> value;
  int multiplicity = 0;
};

namespace detail {

/// Algebraic multiplicity of s (+1 or -1) as an eigenvalue, computed exactly
/// as n - rank((A - s I)^n) over the integers. Returns -1 when the exact
/// powers overflow 64-bit arithmetic.
inline int exact_unit_multiplicity(const IntMatrix& A, int s) {
  const int n = A.n();
  IntMatrix shifted = A;
  for (int i = 0; i < n; ++i) shifted(i, i) -= s;
  try {
    return n - shifted.pow(n).rank();
  } catch (const Error& e) {
    if (e.code() == errc::word_overflow) return -1;
    throw;
  }
}

/// Snaps, in place, the `mult` computed eigenvalues closest to s to exactly s.
inline void snap_eigenvalues(std::vector<std::complex<double>>& ev, double s, int mult) {
  for (int k = 0; k < mult; ++k) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
      if (ev[i] == std::complex<double>(s, 0.0)) continue;
      const double d = std::abs(ev[i] - std::complex<double>(s, 0.0));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best >= 0) ev[best] = std::complex<double>(s, 0.0);
  }
}

/// Evaluates prod (A - lambda_i I) over the given eigenvalues as a real
/// matrix, pairing complex conjugates into real quadratic factors. Exact
/// integer factors (A -+ I)^m for snapped +-1 eigenvalues are multiplied
/// first so that defective unit directions are annihilated exactly.
inline Eigen::MatrixXd annihilating_matrix(const IntMatrix& A,
                                           std::vector<std::complex<double>> lambdas) {
  const int n = A.n();
  const Eigen::MatrixXd Ar = A.to_real();
  int m_plus = 0, m_minus = 0;
  std::vector<std::complex<double>> rest;
  for (const auto& l : lambdas) {
    if (l == std::complex<double>(1.0, 0.0))
      ++m_plus;
    else if (l == std::complex<double>(-1.0, 0.0))
      ++m_minus;
    else
      rest.push_back(l);
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  if (m_plus > 0 || m_minus > 0) {
    IntMatrix P = IntMatrix::identity(n);
    IntMatrix Ap = A, Am = A;
    for (int i = 0; i < n; ++i) {
      Ap(i, i) -= 1;
      Am(i, i) += 1;
    }
    for (int k = 0; k < m_plus; ++k) P = P * Ap;
    for (int k = 0; k < m_minus; ++k) P = P * Am;
    M = P.to_real();
  }
  std::vector<bool> used(rest.size(), false);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (std::abs(rest[i].imag()) < 1e-12) {
      M = (Ar - rest[i].real() * Eigen::MatrixXd::Identity(n, n)) * M;
      continue;
    }
    // Find the conjugate partner and fold the pair into a real quadratic.
    int partner = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < rest.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(rest[j] - std::conj(rest[i]));
      if (d < best) {
        best = d;
        partner = static_cast<int>(j);
      }
    }
    if (partner >= 0) used[static_cast<std::size_t>(partner)] = true;
    const double tr = 2.0 * rest[i].real();
    const double det = std::norm(rest[i]);
    M = (Ar * Ar - tr * Ar + det * Eigen::MatrixXd::Identity(n, n)) * M;
  }
  return M;
}

/// Orthonormal basis of the kernel of M of known dimension: the right
/// singular vectors belonging to the `dim` smallest singular values.
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& M, int dim) {
  const int n = static_cast<int>(M.cols());
  if (dim == 0) return Eigen::MatrixXd(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(dim);
}

}  // namespace detail

/// Computes the expanding/non-expanding invariant splitting of A.
///
/// Defective eigenvalues at +-1 (unipotent directions) are what breaks a
/// plain band test: a Jordan block of size m perturbs the computed roots by
/// about eps^(1/m), far outside the tol band. Their multiplicities are
/// therefore first established exactly over the integers and the computed
/// roots snapped onto +-1 before classification.
inline Splitting compute_splitting(const IntMatrix& A, double tol_unit = kTolUnit) {
  const int n = A.n();
  Splitting s;
  s.n = n;
  s.tol_unit = tol_unit;

  Eigen::EigenSolver<Eigen::MatrixXd> es(A.to_real());
  if (es.info() != Eigen::Success) fail(errc::eigen_failed, "eigenvalue iteration did not converge");
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);

  const int m_plus = detail::exact_unit_multiplicity(A, +1);
  const int m_minus = detail::exact_unit_multiplicity(A, -1);
  if (m_plus > 0) detail::snap_eigenvalues(s.eigenvalues, +1.0, m_plus);
  if (m_minus > 0) detail::snap_eigenvalues(s.eigenvalues, -1.0, m_minus);

  std::vector<std::complex<double>> expanding, nonexpanding;
  for (const auto& l : s.eigenvalues) {
    const double mod = std::abs(l);
    if (std::abs(mod - 1.0) <= tol_unit) s.has_unit = true;
    if (mod > 1.0 + tol_unit)
      expanding.push_back(l);
    else
      nonexpanding.push_back(l);
  }
  s.dim_E = static_cast<int>(expanding.size());
  s.dim_F = n - s.dim_E;
  for (const auto& l : expanding)
    s.min_expansion = s.min_expansion == 0 ? std::abs(l) : std::min(s.min_expansion, std::abs(l));
  for (const auto& l : nonexpanding) s.max_nonexpanding = std::max(s.max_nonexpanding, std::abs(l));

  if (s.dim_E == n) {
    s.basis_E = Eigen::MatrixXd::Identity(n, n);
    s.basis_F = Eigen::MatrixXd(n, 0);
    s.proj_E = Eigen::MatrixXd::Identity(n, n);
    return s;
  }
  if (s.dim_E == 0) {
    s.basis_E = Eigen::MatrixXd(n, 0);
    s.basis_F = Eigen::MatrixXd::Identity(n, n);
    s.proj_E = Eigen::MatrixXd::Zero(n, n);
    return s;
  }

  // E = ker q_E(A), F = ker q_F(A), where q_E / q_F collect the expanding /
  // non-expanding roots with multiplicity.
  s.basis_E = detail::kernel_basis(detail::annihilating_matrix(A, expanding), s.dim_E);
  s.basis_F = detail::kernel_basis(detail::annihilating_matrix(A, nonexpanding), s.dim_F);

  Eigen::MatrixXd stack(n, n);
  stack.leftCols(s.dim_E) = s.basis_E;
  stack.rightCols(s.dim_F) = s.basis_F;
  const Eigen::MatrixXd inv = stack.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  s.proj_E = s.basis_E * inv.topRows(s.dim_E);
  return s;
}

/// True when no eigenvalue modulus lies within tol_unit of 1, i.e. the whole
/// space splits into genuinely expanding and contracting directions.
inline bool is_hyperbolic(const IntMatrix& A, double tol_unit = kTolUnit) {
  return compute_splitting(A, tol_unit).hyperbolic();
}

/// Groups the (snapped) eigenvalues into clusters of radius kClusterRadius.
inline std::vector<EigenCluster> cluster_spectrum(const Splitting& s) {
  std::vector<EigenCluster> out;
  std::vector<bool> used(s.eigenvalues.size(), false);
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    if (used[i]) continue;
    EigenCluster c{s.eigenvalues[i], 1};
    used[i] = true;
    for (std::size_t j = i + 1; j < s.eigenvalues.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(s.eigenvalues[j] - c.value) <= kClusterRadius) {
        used[j] = true;
        ++c.multiplicity;
      }
    }
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const EigenCluster& a, const EigenCluster& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return out;
}

/// Restriction of the exact inverse A^-1 to E, expressed in the orthonormal
/// basis basis_E (dim_E x dim_E). Because basis_E is orthonormal, operator
/// 2-norms of powers of this small matrix equal the ambient-metric norms of
/// the restricted inverse powers.
inline Eigen::MatrixXd restricted_inverse(const IntMatrix& A, const Splitting& s) {
  if (s.dim_E == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::MatrixXd rhs = A.inverse().to_real() * s.basis_E;
  if (s.dim_F == 0) return s.basis_E.transpose() * rhs;
  Eigen::MatrixXd stack(s.n, s.n);
  stack.leftCols(s.dim_E) = s.basis_E;
  stack.rightCols(s.dim_F) = s.basis_F;
  const Eigen::MatrixXd coeff = stack.colPivHouseholderQr().solve(rhs);
  return coeff.topRows(s.dim_E);
}

inline double operator_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()[0];
}

/// norms[i] = ||A^-i restricted to E|| for i = 0..count (norms[0] = 1).
inline std::vector<double> restricted_inverse_norms(const Eigen::MatrixXd& m_inv, int count) {
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(count) + 1);
  norms.push_back(m_inv.rows() == 0 ? 0.0 : 1.0);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m_inv.rows(), m_inv.cols());
  for (int i = 1; i <= count; ++i) {
    p = p * m_inv;
    norms.push_back(operator_norm(p));
  }
  return norms;
}

/// Truncation choice for the tail of sum_{i>N} ||A^-i|_E||, certified by a
/// geometric bound through the first contracting power.
struct Truncation {
  int N = 0;        // series is summed for i = 1..N
  double tail = 0;  // certified bound on the dropped tail
  int k = 0;        // power with ||A^-k|_E|| < 1 used for the geometric bound
  double q = 0;     // that norm
};

namespace detail {

/// Certified bound on sum_{i >= start} ||A^-i|_E|| using submultiplicativity
/// through the contracting power k: each residue class contributes at most
/// C_k q^j with j = floor(i/k).
inline double geometric_tail_from(const std::vector<double>& norms, int start, int k, double q) {
  double c = 0;
  for (int b = 0; b < k; ++b) c = std::max(c, norms[static_cast<std::size_t>(b)]);
  const int j0 = start / k;
  return c * k * std::pow(q, j0) / (1.0 - q);
}

}  // namespace detail

/// Smallest N <= max_N whose certified tail bound is at most tol_tail.
/// norms must cover indices 0..max_N.
inline Truncation choose_truncation(const std::vector<double>& norms, double tol_tail,
                                    int max_N = kMaxN) {
  if (norms.size() < 2 || norms[0] == 0.0) return Truncation{0, 0.0, 0, 0.0};  // trivial E
  const int K = std::min<int>(max_N, static_cast<int>(norms.size()) - 1);
  int best_k = 0;
  double best_q = 0;
  double best_beyond = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= K; ++k) {
    const double q = norms[static_cast<std::size_t>(k)];
    if (q >= 1.0) continue;
    const double beyond = detail::geometric_tail_from(norms, K + 1, k, q);
    if (beyond < best_beyond) {
      best_beyond = beyond;
      best_k = k;
      best_q = q;
    }
  }
  if (best_k == 0)
    fail(errc::tail_not_summable,
         "no restricted inverse power is contracting within " + std::to_string(K) + " steps");
  // tail(N) = exact partial sums norms[N+1..K] plus the certified geometric
  // bound beyond K; take the smallest admissible N.
  std::vector<double> tail_at(static_cast<std::size_t>(K) + 1, 0.0);
  double acc = best_beyond;
  for (int N = K; N >= 0; --N) {
    tail_at[static_cast<std::size_t>(N)] = acc;
    acc += norms[static_cast<std::size_t>(N)];  // becomes tail(N-1)
  }
  for (int N = 0; N <= K; ++N) {
    if (tail_at[static_cast<std::size_t>(N)] <= tol_tail)
      return Truncation{N, tail_at[static_cast<std::size_t>(N)], best_k, best_q};
  }
  fail(errc::budget_exceeded,
       "series tail still " + std::to_string(tail_at[static_cast<std::size_t>(K)]) + " after " +
           std::to_string(K) + " terms (tolerance " + std::to_string(tol_tail) + ")");
}

/// Outcome of the word-search certificate for weak hyperbolicity: witness
/// words whose expanding subspaces jointly span R^n.
struct HyperbolicityCertificate {
  bool certified = false;
  int checked_length = 0;          // length at which the span closed, or the cap
  int achieved_rank = 0;           // numerical rank of the stacked bases
  std::vector<Word> witnesses;     // greedy rank-increasing words
  std::vector<IntMatrix> witness_matrices;
};

/// Searches reduced words of length 1..max_len (ordered by length, then
/// lexicographically) and greedily keeps those whose expanding subspace
/// increases the span. Certifies as soon as the span reaches R^n.
inline HyperbolicityCertificate certify_weak_hyperbolicity(const std::vector<IntMatrix>& gens,
                                                           int max_len,
                                                           double tol_unit = kTolUnit) {
  if (gens.empty()) fail(errc::bad_argument, "certificate needs at least one generator");
  const int n = gens[0].n();
  for (const auto& g : gens) g.require_unimodular();
  HyperbolicityCertificate cert;
  cert.checked_length = max_len;
  Eigen::MatrixXd stacked(n, 0);
  for (const Word& w : enumerate_reduced_words(static_cast<int>(gens.size()), max_len)) {
    const IntMatrix m = word_matrix(w, gens);
    const Splitting s = compute_splitting(m, tol_unit);
    if (s.dim_E == 0) continue;
    Eigen::MatrixXd candidate(n, stacked.cols() + s.dim_E);
    candidate.leftCols(stacked.cols()) = stacked;
    candidate.rightCols(s.dim_E) = s.basis_E;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(candidate);
    const int rank = static_cast<int>(
        (svd.singularValues().array() > kRankTol * svd.singularValues()[0]).count());
    if (rank <= cert.achieved_rank) continue;
    stacked = candidate;
    cert.achieved_rank = rank;
    cert.witnesses.push_back(w);
    cert.witness_matrices.push_back(m);
    if (rank == n) {
      cert.certified = true;
      cert.checked_length = static_cast<int>(w.size());
      return cert;
    }
  }
  return cert;
}

}  // namespace semiconj
