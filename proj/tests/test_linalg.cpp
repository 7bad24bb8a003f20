#include <doctest.h>

#include "morita/linalg.hpp"

#include <random>

using namespace morita;

TEST_CASE("hs_inner basics") {
  CMatrix id = CMatrix::Identity(2, 2);
  CHECK(std::abs(hs_inner(id, id) - Complex(2, 0)) < 1e-14);
  CMatrix z = CMatrix::Zero(2, 2);
  CHECK(std::abs(hs_inner(z, id)) == 0.0);
  CHECK_THROWS_AS(hs_inner(id, CMatrix::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("hs_inner equals elementwise sum of conjugate products") {
  const CMatrix a = random_matrix(3, 3, 11);
  const CMatrix b = random_matrix(3, 3, 12);
  Complex expect(0, 0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) expect += a(i, j) * std::conj(b(i, j));
  }
  CHECK(std::abs(hs_inner(a, b) - expect) < 1e-12);
  // conjugate symmetry
  CHECK(std::abs(hs_inner(b, a) - std::conj(hs_inner(a, b))) < 1e-12);
}

TEST_CASE("orthonormalize collinear and orthogonal inputs") {
  CMatrix id = CMatrix::Identity(2, 2);
  auto one = orthonormalize({id, 2.0 * id});
  CHECK(one.dim() == 1);

  CMatrix e11 = CMatrix::Zero(2, 2), e22 = CMatrix::Zero(2, 2);
  e11(0, 0) = 1;
  e22(1, 1) = 1;
  auto two = orthonormalize({e11, e22});
  CHECK(two.dim() == 2);

  auto empty = orthonormalize(2, 3, {});
  CHECK(empty.dim() == 0);
}

TEST_CASE("orthonormalize random spans give orthonormal bases") {
  std::vector<CMatrix> span;
  for (int k = 0; k < 5; ++k) span.push_back(random_matrix(2, 3, 100 + k));
  auto sub = orthonormalize(span);
  CHECK(sub.dim() <= 5);
  CHECK(sub.dim() <= 6);
  for (int i = 0; i < sub.dim(); ++i) {
    for (int j = 0; j < sub.dim(); ++j) {
      const double want = i == j ? 1.0 : 0.0;
      CHECK(std::abs(hs_inner(sub.basis[i], sub.basis[j]) - Complex(want, 0)) < 1e-12);
    }
  }
}

TEST_CASE("psd_check") {
  CHECK(psd_check(CMatrix::Identity(3, 3)));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = -1;
  CHECK_FALSE(psd_check(d));
  CHECK_THROWS_AS(psd_check(CMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("psd_check holds for b*b across shapes") {
  std::uint64_t seed = 500;
  for (int rows = 1; rows <= 4; ++rows) {
    for (int cols = 1; cols <= 4; ++cols) {
      for (int t = 0; t < 1000 / 16 + 1; ++t) {
        const CMatrix b = random_matrix(rows, cols, seed++);
        CHECK(psd_check(b.adjoint() * b));
      }
    }
  }
}

TEST_CASE("subspace expansion and containment") {
  CMatrix id = CMatrix::Identity(2, 2);
  auto line = orthonormalize({id});
  double res = 0.0;
  auto coeffs = least_squares_expand(line, 3.0 * id, &res);
  CHECK(res < 1e-12);
  // basis is id/sqrt(2), so the coefficient is 3*sqrt(2)
  CHECK(std::abs(coeffs(0) - Complex(3.0 * std::sqrt(2.0), 0)) < 1e-12);
  CHECK(subspace_contains(line, 3.0 * id));

  CMatrix e11 = CMatrix::Zero(2, 2), e12 = CMatrix::Zero(2, 2);
  e11(0, 0) = 1;
  e12(0, 1) = 1;
  auto l2 = orthonormalize({e11});
  double res2 = 0.0;
  least_squares_expand(l2, e12, &res2);
  CHECK(res2 == doctest::Approx(1.0));
  CHECK_FALSE(subspace_contains(l2, e12));

  auto full = full_matrix_space(2, 2);
  const CMatrix r = random_matrix(2, 2, 7);
  double res3 = 0.0;
  auto c3 = least_squares_expand(full, r, &res3);
  CHECK(res3 < 1e-12);
  CHECK((subspace_element(full, c3) - r).norm() < 1e-12);
  CHECK(subspace_equal(full, full));
}

TEST_CASE("gram_quotient degenerate and unitary cases") {
  auto zero = gram_quotient(GramData{CMatrix::Zero(4, 4), 1e-9});
  CHECK(zero.dim == 0);
  CHECK(zero.coeff_map.rows() == 0);

  auto id = gram_quotient(GramData{CMatrix::Identity(3, 3), 1e-9});
  CHECK(id.dim == 3);
  CHECK((id.coeff_map.adjoint() * id.coeff_map - CMatrix::Identity(3, 3)).norm() < 1e-12);

  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = Complex(0, 1);  // not Hermitian
  CHECK_THROWS_AS(gram_quotient(GramData{bad, 1e-9}), std::invalid_argument);
  CMatrix indef = CMatrix::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(gram_quotient(GramData{indef, 1e-9}), std::invalid_argument);
}

TEST_CASE("gram_quotient of the full 2x2 tensor-generator gram has rank 4") {
  // Brute-force oracle: generators m_i (x) n_j over full 2x2 fibres with a
  // full 2x2 middle; pairings tr((m_i n_j)^* (m_k n_l)).
  const auto full = full_matrix_space(2, 2);
  std::vector<CMatrix> gens;
  for (const auto& m : full.basis) {
    for (const auto& n : full.basis) gens.push_back(m * n);
  }
  REQUIRE(gens.size() == 16);
  CMatrix gram(16, 16);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) gram(a, b) = (gens[a].adjoint() * gens[b]).trace();
  }
  auto q = gram_quotient(GramData{gram, 1e-9});
  CHECK(q.dim == 4);
  // Rank oracle via singular values of the stacked generators.
  CMatrix stacked(4, 16);
  for (int a = 0; a < 16; ++a) {
    stacked.col(a) = Eigen::Map<const CVector>(gens[a].data(), 4);
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
  }
  CHECK(rank == 4);
}

TEST_CASE("gram_quotient coordinates are isometric") {
  // Random PSD gram, then re-pair quotient coordinates.
  const CMatrix a = random_matrix(6, 4, 42);
  const CMatrix gram = a.adjoint() * a;  // 4x4 PSD
  auto q = gram_quotient(GramData{gram, 1e-9});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Complex pairing = (q.coeff_map.col(i).adjoint() * q.coeff_map.col(j))(0, 0);
      CHECK(std::abs(pairing - gram(i, j)) < 1e-9);
    }
  }
  CHECK((q.coeff_map * q.lift - CMatrix::Identity(q.dim, q.dim)).norm() < 1e-10);
}
