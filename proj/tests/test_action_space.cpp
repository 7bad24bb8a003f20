#include <doctest.h>

#include "morita/action_space.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>

using namespace morita;

namespace {

GroupoidPtr pair_gpd(int n) {
  return std::make_shared<FiniteGroupoid>(make_pair_groupoid(n));
}

GroupoidPtr cyclic_gpd(int n) {
  return std::make_shared<FiniteGroupoid>(make_group_groupoid(cyclic_group_table(n)));
}

// Independent orbit oracle for the balanced relation on X * Y:
// (x,y) ~ (x.h, h^{-1}.y), counted by exhaustive scanning over h.
int orbit_count_oracle(const PreEquivalence& x, const PreEquivalence& y) {
  const GroupoidBispace& X = x.space;
  const GroupoidBispace& Y = y.space;
  const FiniteGroupoid& H = *X.right;
  std::vector<std::pair<int, int>> pts;
  for (int a = 0; a < X.n_points; ++a) {
    for (int c = 0; c < Y.n_points; ++c) {
      if (X.s[a] == Y.r[c]) pts.emplace_back(a, c);
    }
  }
  std::map<std::pair<int, int>, int> idx;
  for (size_t i = 0; i < pts.size(); ++i) idx[pts[i]] = static_cast<int>(i);
  std::vector<int> parent(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (size_t i = 0; i < pts.size(); ++i) {
    const auto [a, c] = pts[i];
    for (int h = 0; h < H.n_arrows; ++h) {
      const int ah = X.act_right(a, h);
      const int hinvc = Y.act_left(H.inv[h], c);
      if (ah < 0 || hinvc < 0) continue;
      auto it = idx.find({ah, hinvc});
      if (it != idx.end()) {
        const int ra = find(static_cast<int>(i));
        const int rb = find(it->second);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::set<int> roots;
  for (size_t i = 0; i < pts.size(); ++i) roots.insert(find(static_cast<int>(i)));
  return static_cast<int>(roots.size());
}

}  // namespace

TEST_CASE("identity equivalence passes the full suite") {
  for (const GroupoidPtr& g : {pair_gpd(3), cyclic_gpd(4)}) {
    auto e = identity_equivalence(g);
    CHECK(verify_bispace(e.pre.space, true).passed());
    CHECK(verify_preequivalence(e.pre).passed());
    CHECK(verify_equivalence(e).passed());
  }
}

TEST_CASE("pair groupoid equivalence and its transporters") {
  auto pa = pair_gpd(2), pb = pair_gpd(3);
  auto e = pair_groupoid_equivalence(pa, pb, 2, 3);
  CHECK(verify_equivalence(e).passed());
  // lamL((a,b),(a',b)) = (a,a')
  const int x = 0 * 3 + 1;   // (0,1)
  const int x2 = 1 * 3 + 1;  // (1,1)
  CHECK(e.pre.lamL(x, x2) == 0 * 2 + 1);  // arrow (0,1) of P(2)
}

TEST_CASE("trivial one-point instance has unit transporters") {
  auto e = pair_groupoid_equivalence(pair_gpd(1), pair_gpd(1), 1, 1);
  CHECK(verify_equivalence(e).passed());
  CHECK(e.pre.lamL(0, 0) == 0);
  CHECK(e.pre.lamR(0, 0) == 0);
}

TEST_CASE("unit acting nontrivially fails GA3") {
  auto e = identity_equivalence(cyclic_gpd(4));
  GroupoidBispace broken = e.pre.space;
  // redirect the unit action on point 1 to point 2
  broken.left_slot(0, 1) = 2;
  auto rep = verify_bispace(broken, false);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->axiom == "GA3");
}

TEST_CASE("promotion of a groupoid-like equivalence") {
  auto g = cyclic_gpd(4);
  auto e = identity_equivalence(g);
  // X = G over (G,G): lamL(x,x') = x . x'^{-1}
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      CHECK(e.pre.lamL(a, b) == g->compose(a, g->inv[b]));
    }
  }
  PreEquivalence p = promote_equivalence_to_preequiv(e);
  CHECK(verify_preequivalence(p).passed());

  // Solving for transporters from the bare bispace gives the same tables.
  auto solved = equivalence_from_bispace(e.pre.space);
  CHECK(solved.pre.lam_left == e.pre.lam_left);
  CHECK(solved.pre.lam_right == e.pre.lam_right);
}

TEST_CASE("fibre product of pair equivalences is a pre-equivalence") {
  auto pa = pair_gpd(2), pb = pair_gpd(3), pc = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 3);
  auto y = pair_groupoid_equivalence(pb, pc, 3, 2);
  auto z = fibre_product_preequiv(x.pre, y.pre);
  CHECK(z.space.n_points == 2 * 3 * 2);
  CHECK(verify_preequivalence(z).passed());

  // Not an equivalence: the middle orbit is nontrivial.
  auto cor = check_cor_almost_equivalence(z);
  CHECK(cor.report.passed());
  CHECK_FALSE(cor.left_nondegenerate);
  CHECK_FALSE(cor.right_nondegenerate);
  CHECK_FALSE(cor.is_equivalence);
}

TEST_CASE("fibre product of identity equivalences verifies") {
  auto g = cyclic_gpd(4);
  auto x = identity_equivalence(g);
  auto z = fibre_product_preequiv(x.pre, x.pre);
  CHECK(z.space.n_points == 16);  // all pairs composable in a group
  CHECK(verify_preequivalence(z).passed());
}

TEST_CASE("middle groupoid mismatch is a composition error") {
  auto x = pair_groupoid_equivalence(pair_gpd(2), pair_gpd(3), 2, 3);
  auto y = pair_groupoid_equivalence(pair_gpd(2), pair_gpd(2), 2, 2);
  CHECK_THROWS_AS(fibre_product_preequiv(x.pre, y.pre), std::invalid_argument);
}

TEST_CASE("lam entry replaced by its inverse fails PE3.b") {
  auto e = identity_equivalence(cyclic_gpd(4));
  PreEquivalence p = e.pre;
  REQUIRE(p.lamL(1, 0) == 1);
  p.lamL_slot(1, 0) = 3;  // the inverse of 1 in Z/4
  auto rep = verify_preequivalence(p);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.first_failure() != nullptr);
  CHECK(rep.first_failure()->axiom == "PE3.b");
}

TEST_CASE("quotient of a fibre product counts balanced classes") {
  auto pa = pair_gpd(3), pb = pair_gpd(2), pc = pair_gpd(4);
  auto x = pair_groupoid_equivalence(pa, pb, 3, 2);
  auto y = pair_groupoid_equivalence(pb, pc, 2, 4);
  auto z = fibre_product_preequiv(x.pre, y.pre);
  auto q = quotient_preequivalence(z);
  CHECK(q.equivalence.pre.space.n_points == 3 * 4);
  CHECK(q.equivalence.pre.space.n_points == orbit_count_oracle(x.pre, y.pre));
  CHECK(verify_equivalence(q.equivalence).passed());

  // Transporters of the quotient equal lam values of representatives.
  for (int c = 0; c < q.equivalence.pre.space.n_points; ++c) {
    for (int d = 0; d < q.equivalence.pre.space.n_points; ++d) {
      if (q.equivalence.pre.lamL(c, d) < 0) continue;
      CHECK(q.equivalence.pre.lamL(c, d) == z.lamL(q.class_rep[c], q.class_rep[d]));
    }
  }
}

TEST_CASE("quotient of an equivalence has a bijective projection") {
  auto e = pair_groupoid_equivalence(pair_gpd(2), pair_gpd(3), 2, 3);
  auto q = quotient_preequivalence(e.pre);
  CHECK(q.equivalence.pre.space.n_points == e.pre.space.n_points);
  // Quotient idempotence.
  auto q2 = quotient_preequivalence(promote_equivalence_to_preequiv(q.equivalence));
  CHECK(q2.equivalence.pre.space.n_points == q.equivalence.pre.space.n_points);
}

TEST_CASE("balanced products compose pair equivalences") {
  auto pa = pair_gpd(2), pb = pair_gpd(3), pc = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 3);
  auto y = pair_groupoid_equivalence(pb, pc, 3, 2);
  auto xy = balanced_product(x, y);
  CHECK(xy.pre.space.n_points == 4);
  CHECK(verify_equivalence(xy).passed());

  // Unit law: composing with the identity equivalence gives back the size.
  auto idb = identity_equivalence(pb);
  auto xid = balanced_product(x, idb);
  CHECK(xid.pre.space.n_points == x.pre.space.n_points);
  CHECK(verify_equivalence(xid).passed());

  // One-point chain collapses to one class.
  auto p1 = pair_gpd(1);
  auto one = balanced_product(pair_groupoid_equivalence(p1, p1, 1, 1),
                              pair_groupoid_equivalence(p1, p1, 1, 1));
  CHECK(one.pre.space.n_points == 1);
}

TEST_CASE("balanced product is associative up to canonical class bijection") {
  auto pa = pair_gpd(2), pb = pair_gpd(2), pc = pair_gpd(3), pd = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 2);
  auto y = pair_groupoid_equivalence(pb, pc, 2, 3);
  auto z = pair_groupoid_equivalence(pc, pd, 3, 2);

  auto xy = balanced_product(x, y);
  auto left = balanced_product(xy, z);
  auto yz = balanced_product(y, z);
  auto right = balanced_product(x, yz);
  REQUIRE(left.pre.space.n_points == right.pre.space.n_points);

  // Build the class maps for all admissible triples and compare the induced
  // partitions and momenta.
  const auto& X = x.pre.space;
  const auto& Y = y.pre.space;
  const auto& Z = z.pre.space;
  auto fpxy = fibre_product_preequiv(x.pre, y.pre);
  auto qxy = quotient_preequivalence(fpxy);
  auto fpyz = fibre_product_preequiv(y.pre, z.pre);
  auto qyz = quotient_preequivalence(fpyz);
  auto fp_l = fibre_product_preequiv(promote_equivalence_to_preequiv(xy), z.pre);
  auto q_l = quotient_preequivalence(fp_l);
  auto fp_r = fibre_product_preequiv(x.pre, promote_equivalence_to_preequiv(yz));
  auto q_r = quotient_preequivalence(fp_r);

  // Enumerate fibre-product points the same way the library does.
  auto fp_index = [](const PreEquivalence& a, const PreEquivalence& b, int pa_, int pb_) {
    int idx = 0;
    for (int i = 0; i < a.space.n_points; ++i) {
      for (int j = 0; j < b.space.n_points; ++j) {
        if (a.space.s[i] != b.space.r[j]) continue;
        if (i == pa_ && j == pb_) return idx;
        ++idx;
      }
    }
    return -1;
  };

  std::map<std::pair<int, int>, int> seen;  // (class_left, class_right) pairing
  for (int xi = 0; xi < X.n_points; ++xi) {
    for (int yi = 0; yi < Y.n_points; ++yi) {
      if (X.s[xi] != Y.r[yi]) continue;
      for (int zi = 0; zi < Z.n_points; ++zi) {
        if (Y.s[yi] != Z.r[zi]) continue;
        const int pxy = fp_index(x.pre, y.pre, xi, yi);
        const int cxy = qxy.projection[pxy];
        const int pl = fp_index(promote_equivalence_to_preequiv(xy), z.pre, cxy, zi);
        const int cl = q_l.projection[pl];
        const int pyz = fp_index(y.pre, z.pre, yi, zi);
        const int cyz = qyz.projection[pyz];
        const int pr = fp_index(x.pre, promote_equivalence_to_preequiv(yz), xi, cyz);
        const int cr = q_r.projection[pr];
        auto it = seen.find({cl, cr});
        if (it == seen.end()) {
          seen[{cl, cr}] = 1;
        }
        // momenta agree under the correspondence
        CHECK(q_l.equivalence.pre.space.r[cl] == q_r.equivalence.pre.space.r[cr]);
        CHECK(q_l.equivalence.pre.space.s[cl] == q_r.equivalence.pre.space.s[cr]);
      }
    }
  }
  // The pairing is a bijection of classes.
  std::set<int> lefts, rights;
  for (const auto& [k, v] : seen) {
    lefts.insert(k.first);
    rights.insert(k.second);
  }
  CHECK(static_cast<int>(seen.size()) == left.pre.space.n_points);
  CHECK(static_cast<int>(lefts.size()) == left.pre.space.n_points);
  CHECK(static_cast<int>(rights.size()) == right.pre.space.n_points);
}

TEST_CASE("cor almost-equivalence conditions agree on equivalences and quotients") {
  auto pa = pair_gpd(2), pb = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 2);
  auto cor1 = check_cor_almost_equivalence(x.pre);
  CHECK(cor1.report.passed());
  CHECK(cor1.left_nondegenerate);
  CHECK(cor1.right_nondegenerate);
  CHECK(cor1.is_equivalence);

  auto y = pair_groupoid_equivalence(pb, pa, 2, 2);
  auto fp = fibre_product_preequiv(x.pre, y.pre);
  auto cor2 = check_cor_almost_equivalence(fp);
  CHECK(cor2.report.passed());
  CHECK_FALSE(cor2.is_equivalence);

  auto q = quotient_preequivalence(fp);
  auto cor3 = check_cor_almost_equivalence(promote_equivalence_to_preequiv(q.equivalence));
  CHECK(cor3.report.passed());
  CHECK(cor3.is_equivalence);
}

TEST_CASE("PE3.e cocycle holds exactly on generated pre-equivalences") {
  auto pa = pair_gpd(2), pb = pair_gpd(2);
  auto x = pair_groupoid_equivalence(pa, pb, 2, 2);
  auto y = identity_equivalence(pb);
  auto z = fibre_product_preequiv(x.pre, y.pre);
  const auto& G = *z.space.left;
  for (int a = 0; a < z.space.n_points; ++a) {
    for (int b = 0; b < z.space.n_points; ++b) {
      if (z.lamL(a, b) < 0) continue;
      for (int c = 0; c < z.space.n_points; ++c) {
        if (z.lamL(b, c) < 0) continue;
        CHECK(G.compose(z.lamL(a, b), z.lamL(b, c)) == z.lamL(a, c));
      }
    }
  }
}
