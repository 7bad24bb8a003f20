#include <doctest.h>

#include "morita/fell_bundle.hpp"

#include <memory>

using namespace morita;

namespace {

GroupoidPtr pair_gpd(int n) {
  return std::make_shared<FiniteGroupoid>(make_pair_groupoid(n));
}

}  // namespace

TEST_CASE("full matrix bundles over a pair groupoid") {
  auto g = pair_gpd(2);
  DimFunction dims = constant_dims(*g, 1);
  dims.dims[0] = 1;  // unit (0,0)
  dims.dims[3] = 2;  // unit (1,1)
  auto b = make_full_matrix_bundle(g, dims);
  CHECK(verify_fell_bundle(b).passed());
  CHECK(verify_saturated(b).passed());
  // fibre shapes 1x1, 1x2, 2x1, 2x2
  CHECK(b.fibre(0).rows == 1);
  CHECK(b.fibre(1).rows == 1);
  CHECK(b.fibre(1).cols == 2);
  CHECK(b.fibre(2).rows == 2);
  CHECK(b.fibre(2).cols == 1);
  CHECK(b.fibre(3).dim() == 4);
}

TEST_CASE("scalar bundle over any groupoid") {
  auto g = std::make_shared<FiniteGroupoid>(make_group_groupoid(cyclic_group_table(3)));
  auto b = make_full_matrix_bundle(g, constant_dims(*g, 1));
  CHECK(verify_fell_bundle(b).passed());
  CHECK(verify_saturated(b).passed());
}

TEST_CASE("random dims over a cyclic group groupoid") {
  auto g = std::make_shared<FiniteGroupoid>(make_group_groupoid(cyclic_group_table(3)));
  auto b = make_full_matrix_bundle(g, random_dims(*g, 3, 99));
  CHECK(verify_fell_bundle(b).passed());
  CHECK(verify_saturated(b).passed());
}

TEST_CASE("shrunken fibre fails F1 closure with a witness") {
  auto g = pair_gpd(2);
  auto b = make_full_matrix_bundle(g, constant_dims(*g, 2));
  // shrink the fibre over the non-unit arrow (0,1) to a line that is not
  // closed under products with the unit fibres
  MatrixSubspace line;
  line.rows = 2;
  line.cols = 2;
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 0.5;
  line.basis.push_back(m / m.norm());
  b.fibres[1] = line;
  auto rep = verify_fell_bundle(b);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->axiom == "F1");
}

TEST_CASE("zero fibre over a non-unit arrow breaks saturation") {
  auto g = pair_gpd(2);
  auto b = make_full_matrix_bundle(g, constant_dims(*g, 2));
  b.fibres[1] = MatrixSubspace{2, 2, {}};
  // F1/F5 containment still holds for the empty fibre against (0,1) but
  // products B_(0,1) . B_(1,0) must span the full unit fibre: they cannot.
  CHECK_FALSE(verify_saturated(b).passed());
}

TEST_CASE("Pauli projective representation bundle") {
  auto b = make_weyl_bundle(2);
  CHECK(b.gpd->n_arrows == 4);
  CHECK(verify_fell_bundle(b).passed());
  CHECK(verify_saturated(b).passed());
  for (int a = 0; a < 4; ++a) CHECK(b.fibre(a).dim() == 1);

  // The cocycle is nontrivial: U_a U_b = -U_b U_a for the two generators.
  const CMatrix x = b.fibre(1).basis[0];
  const CMatrix z = b.fibre(2).basis[0];
  CHECK(((x * z) + (z * x)).norm() < 1e-12);
}

TEST_CASE("weyl bundle for n=3 passes") {
  auto b = make_weyl_bundle(3);
  CHECK(b.gpd->n_arrows == 9);
  CHECK(verify_fell_bundle(b).passed());
  CHECK(verify_saturated(b).passed());
}

TEST_CASE("non-projective unitary assignment is a construction error") {
  auto g = std::make_shared<FiniteGroupoid>(make_group_groupoid(cyclic_group_table(2)));
  CMatrix id = CMatrix::Identity(2, 2);
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);  // Hadamard; H^2 = I but I*H != scalar * H... use pair (I, H)?
  // U_e = I, U_g = H gives U_g U_g = I = U_e: fine. Break it instead with a
  // genuinely non-projective choice: U_g such that U_g^2 is not a scalar
  // multiple of U_e.
  CMatrix bad(2, 2);
  bad << 1, 0, 0, Complex(std::cos(0.7), std::sin(0.7));
  CHECK_THROWS_AS(make_projective_rep_bundle(g, {id, bad}), std::invalid_argument);
}

TEST_CASE("C*-identity holds on sampled fibre elements") {
  auto g = pair_gpd(3);
  auto b = make_full_matrix_bundle(g, random_dims(*g, 3, 7));
  for (int a = 0; a < g->n_arrows; ++a) {
    const CMatrix m = random_matrix(b.fibre(a).rows, b.fibre(a).cols, 1000 + a);
    const double n = op_norm(m);
    CHECK(std::abs(op_norm(CMatrix(m.adjoint() * m)) - n * n) < 1e-9 * std::max(1.0, n * n));
  }
}
