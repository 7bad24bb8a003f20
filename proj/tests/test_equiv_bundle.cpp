#include <doctest.h>

#include "morita/equiv_bundle.hpp"

#include <memory>

using namespace morita;

namespace {

GroupoidPtr pair_gpd(int n) {
  return std::make_shared<FiniteGroupoid>(make_pair_groupoid(n));
}

struct CanonicalFixture {
  EquivalencePtr base;
  FellBundlePtr left;
  FellBundlePtr right;
  std::shared_ptr<BundleSpace> bundle;
};

CanonicalFixture make_canonical(int a, int b, std::vector<int> dims_a,
                                std::vector<int> dims_b) {
  CanonicalFixture f;
  auto pa = pair_gpd(a);
  auto pb = pair_gpd(b);
  f.base = std::make_shared<GroupoidEquivalence>(pair_groupoid_equivalence(pa, pb, a, b));
  DimFunction da = constant_dims(*pa, 1);
  for (int i = 0; i < a; ++i) da.dims[static_cast<size_t>(i * a + i)] = dims_a[static_cast<size_t>(i)];
  DimFunction db = constant_dims(*pb, 1);
  for (int j = 0; j < b; ++j) db.dims[static_cast<size_t>(j * b + j)] = dims_b[static_cast<size_t>(j)];
  f.left = std::make_shared<FellBundle>(make_full_matrix_bundle(pa, da));
  f.right = std::make_shared<FellBundle>(make_full_matrix_bundle(pb, db));
  f.bundle = std::make_shared<BundleSpace>(
      make_canonical_equivalence_bundle(f.base, f.left, f.right));
  return f;
}

}  // namespace

TEST_CASE("canonical full-matrix bundle passes all levels") {
  auto f = make_canonical(2, 3, {2, 1}, {1, 3, 2});
  CHECK(verify_fell_action(*f.bundle).passed());
  CHECK(verify_hypoequivalence(*f.bundle).passed());
  CHECK(verify_equivalence_bundle(*f.bundle).passed());
}

TEST_CASE("identity bundle of a Fell bundle is an equivalence bundle") {
  auto g = pair_gpd(2);
  auto b = std::make_shared<FellBundle>(make_full_matrix_bundle(g, random_dims(*g, 3, 5)));
  auto m = identity_bundle(b);
  CHECK(verify_equivalence_bundle(m).passed());
}

TEST_CASE("identity bundle of the Pauli bundle is an equivalence bundle") {
  auto b = std::make_shared<FellBundle>(make_weyl_bundle(2));
  auto m = identity_bundle(b);
  CHECK(verify_equivalence_bundle(m).passed());
  CHECK(nontriviality_check(*b, m).passed());
}

TEST_CASE("line bundle equivalence with all dims 1") {
  auto f = make_canonical(2, 2, {1, 1}, {1, 1});
  CHECK(verify_equivalence_bundle(*f.bundle).passed());
}

TEST_CASE("shrunken fibre fails action closure with a witness") {
  auto f = make_canonical(2, 2, {2, 2}, {2, 2});
  std::vector<MatrixSubspace> fibres;
  for (int x = 0; x < f.base->pre.space.n_points; ++x) fibres.push_back(f.bundle->fibre(x));
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 0.25;
  fibres[0] = orthonormalize({m});
  BundleSpace broken(nullptr, f.base, f.left, f.right, std::move(fibres));
  auto rep = verify_fell_action(broken);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->axiom == "FA1.left-closure");
}

TEST_CASE("opposite bundle swaps the sides and involutes fibres") {
  auto f = make_canonical(2, 3, {2, 1}, {1, 2, 3});
  auto op = opposite_bundle(*f.bundle);
  CHECK(op.base_is_equivalence());
  CHECK(verify_equivalence_bundle(op).passed());
  CHECK(op.left_fell().get() == f.right.get());
  CHECK(op.right_fell().get() == f.left.get());

  // Opposite twice is the original, fibre by fibre.
  auto opop = opposite_bundle(op);
  for (int x = 0; x < f.base->pre.space.n_points; ++x) {
    REQUIRE(opop.fibre(x).dim() == f.bundle->fibre(x).dim());
    for (int i = 0; i < opop.fibre(x).dim(); ++i) {
      CHECK((opop.fibre(x).basis[static_cast<size_t>(i)] -
             f.bundle->fibre(x).basis[static_cast<size_t>(i)])
                .norm() < 1e-12);
    }
  }

  // Opposite of the identity bundle is the identity bundle over G^op.
  auto b = std::make_shared<FellBundle>(make_full_matrix_bundle(pair_gpd(2), constant_dims(make_pair_groupoid(2), 2)));
  auto idb = identity_bundle(b);
  auto opid = opposite_bundle(idb);
  CHECK(verify_equivalence_bundle(opid).passed());
}

TEST_CASE("cauchy-schwarz on the canonical bundle") {
  auto f = make_canonical(2, 2, {2, 1}, {2, 2});
  auto rep = cauchy_schwarz_check(*f.bundle, 500, 42);
  CHECK(rep.passed());

  // Equality and zero cases.
  const int x = 0;
  CVector v = random_vector(f.bundle->fibre_dim(x), 9);
  const CMatrix ip = f.bundle->inner_left(x, v, x, v);
  const double n = f.bundle->module_norm(x, v);
  const CMatrix slack = n * n * ip - ip * ip.adjoint();
  CHECK(min_hermitian_eigenvalue(slack) >= -1e-9 * std::max(1.0, n * n));
  CVector zero = CVector::Zero(f.bundle->fibre_dim(x));
  CHECK(f.bundle->inner_left(x, zero, x, v).norm() == 0.0);
}

TEST_CASE("nontriviality detects a dead fibre direction") {
  auto f = make_canonical(2, 2, {2, 2}, {2, 2});
  CHECK(nontriviality_check(*f.left, *f.bundle).passed());

  // Zero out every M-fibre in the r-preimage of one unit.
  std::vector<MatrixSubspace> fibres;
  for (int x = 0; x < f.base->pre.space.n_points; ++x) fibres.push_back(f.bundle->fibre(x));
  for (int x = 0; x < f.base->pre.space.n_points; ++x) {
    if (f.base->pre.space.r[x] == 0) fibres[static_cast<size_t>(x)] = MatrixSubspace{2, 2, {}};
  }
  BundleSpace broken(nullptr, f.base, f.left, f.right, std::move(fibres));
  CHECK_FALSE(nontriviality_check(*f.left, broken).passed());
}

TEST_CASE("imprimitivity norm coincidence on basis elements") {
  auto f = make_canonical(3, 2, {2, 1, 3}, {2, 2});
  const auto& space = f.base->pre.space;
  for (int x = 0; x < space.n_points; ++x) {
    for (int i = 0; i < f.bundle->fibre_dim(x); ++i) {
      CVector e = CVector::Zero(f.bundle->fibre_dim(x));
      e(i) = 1.0;
      const double nl = op_norm(f.bundle->inner_left(x, e, x, e));
      const double nr = op_norm(f.bundle->inner_right(x, e, x, e));
      const double mn = f.bundle->module_norm(x, e);
      CHECK(std::abs(nl - nr) < 1e-9);
      CHECK(std::abs(nl - mn * mn) < 1e-9);
    }
  }
}

TEST_CASE("hypo suite on an equivalence base reports FE2.d empirically") {
  auto f = make_canonical(2, 2, {2, 2}, {1, 2});
  auto rep = verify_hypoequivalence(*f.bundle);
  CHECK(rep.passed());
  bool found = false;
  for (const auto& c : rep.checks) {
    if (c.axiom == "FE2.d.empirical") {
      found = true;
      CHECK(c.kind == CheckKind::Info);
      CHECK(c.pass);
    }
  }
  CHECK(found);
}

TEST_CASE("equivalence suite rejects a pre-equivalence base") {
  auto pa = pair_gpd(2), pb = pair_gpd(2), pc = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 2);
  auto y = pair_groupoid_equivalence(pb, pc, 2, 2);
  auto z = std::make_shared<PreEquivalence>(fibre_product_preequiv(x.pre, y.pre));
  // A bundle over the fibre product (zero-dimensional fibres are enough for
  // the structural check).
  auto bleft = std::make_shared<FellBundle>(make_full_matrix_bundle(pa, constant_dims(*pa, 1)));
  auto bright = std::make_shared<FellBundle>(make_full_matrix_bundle(pc, constant_dims(*pc, 1)));
  std::vector<MatrixSubspace> fibres(static_cast<size_t>(z->space.n_points),
                                     full_matrix_space(1, 1));
  BundleSpace m(z, nullptr, bleft, bright, std::move(fibres));
  auto rep = verify_equivalence_bundle(m);
  CHECK_FALSE(rep.passed());
  CHECK(rep.structural_failure());
}
