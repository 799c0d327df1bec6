#include <cmath>
#include <complex>

#include "helpers.hpp"

using namespace semiconj;

namespace {

// Roots of the characteristic polynomial of [[2,1],[1,1]]: lambda^2 - 3 lambda + 1.
const double kLambdaPlus = (3.0 + std::sqrt(5.0)) / 2.0;
const double kLambdaMinus = (3.0 - std::sqrt(5.0)) / 2.0;

double angle_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return std::abs(std::abs(u.normalized().dot(v.normalized())) - 1.0);
}

}  // namespace

TEST_CASE("eigenvalue classification: identity, unipotent, hyperbolic", "[spectral]") {
  const Splitting id = compute_splitting(IntMatrix::identity(2));
  REQUIRE(id.dim_E == 0);
  REQUIRE(id.has_unit);
  for (const auto& z : id.eigenvalues) REQUIRE(std::abs(z - std::complex<double>(1, 0)) < 1e-12);

  const Splitting uni = compute_splitting(parse_matrix("1,1;0,1"));
  REQUIRE(uni.dim_E == 0);
  REQUIRE(uni.dim_F == 2);
  REQUIRE(uni.has_unit);
  for (const auto& z : uni.eigenvalues) REQUIRE(std::abs(z - std::complex<double>(1, 0)) < 1e-12);

  const Splitting cat = compute_splitting(parse_matrix("2,1;1,1"));
  REQUIRE(cat.dim_E == 1);
  REQUIRE(cat.dim_F == 1);
  REQUIRE_FALSE(cat.has_unit);
  REQUIRE(cat.min_expansion == Catch::Approx(kLambdaPlus).epsilon(1e-12));
  REQUIRE(cat.max_nonexpanding == Catch::Approx(kLambdaMinus).epsilon(1e-12));
}

TEST_CASE("splitting of the hyperbolic pair matches the eigenvector oracle", "[spectral]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const Splitting s = compute_splitting(A);

  // (2 - lambda) x + y = 0 gives eigenvector (1, lambda - 2)
  Eigen::VectorXd e_true(2), f_true(2);
  e_true << 1.0, kLambdaPlus - 2.0;
  f_true << 1.0, kLambdaMinus - 2.0;
  REQUIRE(angle_between(s.basis_E.col(0), e_true) < 1e-10);
  REQUIRE(angle_between(s.basis_F.col(0), f_true) < 1e-10);

  // invariance and projector identities
  const Eigen::MatrixXd Ar = A.to_real();
  REQUIRE(((Eigen::MatrixXd::Identity(2, 2) - s.proj_E) * Ar * s.basis_E).norm() < 1e-9);
  REQUIRE((s.proj_E * Ar * s.basis_F).norm() < 1e-9);
  REQUIRE((s.proj_E * s.proj_E - s.proj_E).norm() < 1e-9);
  REQUIRE((s.proj_E * s.basis_E - s.basis_E).norm() < 1e-9);
  REQUIRE((s.proj_E * s.basis_F).norm() < 1e-9);

  // the inverse matrix swaps E and F (reciprocal eigenvalues)
  const Splitting si = compute_splitting(A.inverse());
  REQUIRE(si.dim_E == s.dim_F);
  REQUIRE(si.dim_F == s.dim_E);
  REQUIRE(si.min_expansion == Catch::Approx(1.0 / kLambdaMinus).epsilon(1e-12));
  REQUIRE(angle_between(si.basis_E.col(0), f_true) < 1e-10);

  const Splitting su = compute_splitting(parse_matrix("1,1;0,1"));
  REQUIRE(su.proj_E.norm() == 0.0);
}

TEST_CASE("restricted inverse norms follow the geometric oracle", "[spectral]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const Splitting s = compute_splitting(A);
  const Eigen::MatrixXd m_inv = restricted_inverse(A, s);
  const auto norms = restricted_inverse_norms(m_inv, 25);

  // dim E = 1: the norms are exactly lambda_plus^-i
  REQUIRE(norms[0] == 1.0);
  for (int i = 1; i <= 25; ++i)
    REQUIRE(norms[static_cast<std::size_t>(i)] ==
            Catch::Approx(std::pow(kLambdaPlus, -i)).epsilon(1e-10));

  // tail after N = 20 is about 0.382^21 / (1 - 0.382) ~ 6e-9 in these units
  const double tail20 = std::pow(1.0 / kLambdaPlus, 21) / (1.0 - 1.0 / kLambdaPlus);
  REQUIRE(tail20 < 1e-8);

  // choose_truncation certifies a tail at most a small factor above the oracle
  const Truncation tr = choose_truncation(norms, 1e-8, 200);
  REQUIRE(tr.tail <= 1e-8);
  const double exact_tail =
      std::pow(1.0 / kLambdaPlus, tr.N + 1) / (1.0 - 1.0 / kLambdaPlus);
  REQUIRE(tr.tail >= exact_tail);  // certified over-estimate
  REQUIRE(tr.N >= 15);
  REQUIRE(tr.N <= 25);
}

TEST_CASE("series term count for sup alpha 0.1 at tol 1e-8 is about 20", "[spectral]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const Splitting s = compute_splitting(A);
  const auto norms = restricted_inverse_norms(restricted_inverse(A, s), 60);

  // oracle: smallest N with 0.1 * sum_{i>N} lambda^-i <= 1e-8
  int n_oracle = 0;
  const double q = 1.0 / kLambdaPlus;
  while (0.1 * std::pow(q, n_oracle + 1) / (1.0 - q) > 1e-8) ++n_oracle;
  REQUIRE(n_oracle >= 16);
  REQUIRE(n_oracle <= 22);

  const Truncation tr = choose_truncation(norms, 1e-8 / 0.1, 200);
  REQUIRE(tr.N >= n_oracle - 1);
  REQUIRE(tr.N <= n_oracle + 3);
}

TEST_CASE("block-diagonal embedding preserves restricted norms", "[spectral]") {
  // two copies of [[2,1],[1,1]] on the diagonal of a 4x4 matrix
  IntMatrix B(4);
  const IntMatrix A = parse_matrix("2,1;1,1");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      B(i, j) = A(i, j);
      B(i + 2, j + 2) = A(i, j);
    }
  const Splitting sb = compute_splitting(B);
  REQUIRE(sb.dim_E == 2);
  REQUIRE(sb.dim_F == 2);

  const auto n2 = restricted_inverse_norms(restricted_inverse(A, compute_splitting(A)), 12);
  const auto n4 = restricted_inverse_norms(restricted_inverse(B, sb), 12);
  for (std::size_t i = 0; i < n2.size(); ++i)
    REQUIRE(n4[i] == Catch::Approx(n2[i]).margin(1e-9));

  // dim E(A) = dim F(A^-1) for hyperbolic matrices
  REQUIRE(compute_splitting(B.inverse()).dim_F == sb.dim_E);
}

TEST_CASE("trivial expanding subspace yields a zero tail", "[spectral]") {
  const Splitting s = compute_splitting(parse_matrix("1,1;0,1"));
  REQUIRE(s.dim_E == 0);
  const Eigen::MatrixXd m_inv = restricted_inverse(parse_matrix("1,1;0,1"), s);
  const auto norms = restricted_inverse_norms(m_inv, 10);
  const Truncation tr = choose_truncation(norms, 1e-8, 50);
  REQUIRE(tr.N == 0);
  REQUIRE(tr.tail == 0.0);
}

TEST_CASE("non-contracting norm sequences are rejected", "[spectral]") {
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0, 1.0};
  REQUIRE_FAILS_WITH(choose_truncation(flat, 1e-8, 4), errc::tail_not_summable);
}

TEST_CASE("is_hyperbolic matches the eigenvalue picture", "[spectral]") {
  REQUIRE(is_hyperbolic(parse_matrix("2,1;1,1")));
  REQUIRE_FALSE(is_hyperbolic(parse_matrix("1,1;0,1")));
  REQUIRE_FALSE(is_hyperbolic(parse_matrix("0,-1;1,0")));
}

TEST_CASE("weak hyperbolicity certificates", "[spectral]") {
  // elementary pair: no generator is hyperbolic, but length-2 words span
  const std::vector<IntMatrix> el{parse_matrix("1,1;0,1"), parse_matrix("1,0;1,1")};
  const HyperbolicityCertificate c2 = certify_weak_hyperbolicity(el, 2);
  REQUIRE(c2.certified);
  REQUIRE(c2.checked_length <= 2);
  REQUIRE(c2.achieved_rank == 2);
  for (const Word& w : c2.witnesses) REQUIRE(w.size() == 2);

  // independent check: the witnesses' expanding bases really span R^2
  Eigen::MatrixXd stacked(2, 0);
  for (const IntMatrix& m : c2.witness_matrices) {
    const Splitting s = compute_splitting(m);
    REQUIRE(s.dim_E > 0);
    Eigen::MatrixXd wider(2, stacked.cols() + s.dim_E);
    wider << stacked, s.basis_E;
    stacked = wider;
  }
  REQUIRE(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(stacked).rank() == 2);

  // monotone: certified at 2 implies certified at 3
  REQUIRE(certify_weak_hyperbolicity(el, 3).certified);

  // rotation: every word has unit-modulus spectrum
  const HyperbolicityCertificate rot =
      certify_weak_hyperbolicity({parse_matrix("0,-1;1,0")}, 6);
  REQUIRE_FALSE(rot.certified);
  REQUIRE(rot.achieved_rank == 0);
  REQUIRE(rot.checked_length == 6);

  // a single hyperbolic generator certifies at length 1 via {a, a^-1}
  const HyperbolicityCertificate cat = certify_weak_hyperbolicity({parse_matrix("2,1;1,1")}, 1);
  REQUIRE(cat.certified);
  REQUIRE(cat.witnesses.size() == 2);
  const std::vector<std::string> names{"a"};
  REQUIRE(word_to_string(cat.witnesses[0], names) == "a");
  REQUIRE(word_to_string(cat.witnesses[1], names) == "a^-1");

  REQUIRE_FAILS_WITH(certify_weak_hyperbolicity(el, 0), errc::bad_argument);
}

TEST_CASE("tail bound over-estimates true decay along random directions", "[spectral]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const Splitting s = compute_splitting(A);
  const Eigen::MatrixXd m_inv = restricted_inverse(A, s);
  const auto norms = restricted_inverse_norms(m_inv, 40);
  const Truncation tr = choose_truncation(norms, 1e-6, 40);

  // beyond N the single powers must stay below the certified tail of the sum
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(1, 1);
  for (int i = 1; i <= tr.N + 10; ++i) {
    p = p * m_inv;
    if (i > tr.N) REQUIRE(p.norm() <= tr.tail);
  }
}
