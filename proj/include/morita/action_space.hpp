// Finite groupoid bi-spaces, pre-equivalences with their transporter-like
// tables, equivalences, fibre products, kernel quotients, and balanced
// products. Admissibility conventions:
//   lam_left  on pairs with s_X(x) = s_X(x'), values in the left groupoid,
//   lam_right on pairs with r_X(x) = r_X(x'), values in the right groupoid.
#pragma once

#include "morita/groupoid.hpp"
#include "morita/report.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace morita {

struct GroupoidBispace {
  GroupoidPtr left;   // G
  GroupoidPtr right;  // H
  int n_points = 0;
  std::vector<int> r;  // point -> unit of G
  std::vector<int> s;  // point -> unit of H
  // Dense partial action tables with -1 for "undefined".
  std::vector<int> left_act_table;   // g * n_points + x, defined iff s_G(g)=r(x)
  std::vector<int> right_act_table;  // x * |H| + h,      defined iff s(x)=r_H(h)

  int act_left(int g, int x) const {
    return left_act_table[static_cast<size_t>(g) * n_points + x];
  }
  int act_right(int x, int h) const {
    return right_act_table[static_cast<size_t>(x) * right->n_arrows + h];
  }
  int& left_slot(int g, int x) {
    return left_act_table[static_cast<size_t>(g) * n_points + x];
  }
  int& right_slot(int x, int h) {
    return right_act_table[static_cast<size_t>(x) * right->n_arrows + h];
  }
  void allocate_tables() {
    left_act_table.assign(static_cast<size_t>(left->n_arrows) * n_points, -1);
    right_act_table.assign(static_cast<size_t>(n_points) * right->n_arrows, -1);
  }
};

struct PreEquivalence {
  GroupoidBispace space;
  std::vector<int> lam_left;   // n_points^2, -1 off the s-compatible pairs
  std::vector<int> lam_right;  // n_points^2, -1 off the r-compatible pairs

  int lamL(int x, int y) const {
    return lam_left[static_cast<size_t>(x) * space.n_points + y];
  }
  int lamR(int x, int y) const {
    return lam_right[static_cast<size_t>(x) * space.n_points + y];
  }
  int& lamL_slot(int x, int y) {
    return lam_left[static_cast<size_t>(x) * space.n_points + y];
  }
  int& lamR_slot(int x, int y) {
    return lam_right[static_cast<size_t>(x) * space.n_points + y];
  }
  void allocate_tables() {
    lam_left.assign(static_cast<size_t>(space.n_points) * space.n_points, -1);
    lam_right.assign(static_cast<size_t>(space.n_points) * space.n_points, -1);
  }
};

// A pre-equivalence whose transporter tables are the genuine unique
// transporters; construct via equivalence_from_bispace or
// quotient_preequivalence so the invariant actually holds.
struct GroupoidEquivalence {
  PreEquivalence pre;
};

using PreEquivalencePtr = std::shared_ptr<const PreEquivalence>;
using EquivalencePtr = std::shared_ptr<const GroupoidEquivalence>;

// GA1-GA3 on both sides, surjective momentum maps, commuting actions;
// with principal also GA4 freeness (GA5 properness is vacuous for finite
// spaces and recorded as such).
Report verify_bispace(const GroupoidBispace& b, bool principal);

// Bispace checks plus PE3 surjectivity and PE3.a-f with the derived
// diagonal laws.
Report verify_preequivalence(const PreEquivalence& p);

// Full GE suite: pre-equivalence axioms, nondegeneracy, principality,
// bijections X/H -> G^(0) and G\X -> H^(0), transporter uniqueness.
Report verify_equivalence(const GroupoidEquivalence& e);

// Solves the unique-transporter conditions on a bispace; throws
// std::invalid_argument when no (or no unique) transporter exists.
GroupoidEquivalence equivalence_from_bispace(const GroupoidBispace& b);

// An equivalence is a pre-equivalence with the transporters as lam tables.
PreEquivalence promote_equivalence_to_preequiv(const GroupoidEquivalence& e);

// Z = X *_{s,r} Y with points (x,y), lexicographic in (x,y).
PreEquivalence fibre_product_preequiv(const PreEquivalence& x,
                                      const PreEquivalence& y);

struct QuotientPreEquivalence {
  GroupoidEquivalence equivalence;
  std::vector<int> projection;  // point of the input -> class index
  std::vector<int> class_rep;   // class -> minimal input point
};

// Quotient by x ~ x' iff lamL(x,x') is a unit. Class ids follow the order
// of their minimal representatives.
QuotientPreEquivalence quotient_preequivalence(const PreEquivalence& p);

GroupoidEquivalence balanced_product(const GroupoidEquivalence& x,
                                     const GroupoidEquivalence& y);

// Evaluates the three equivalent nondegeneracy conditions independently and
// asserts their logical agreement on the instance.
struct AlmostEquivalenceCheck {
  bool left_nondegenerate = false;
  bool right_nondegenerate = false;
  bool is_equivalence = false;
  Report report;
};
AlmostEquivalenceCheck check_cor_almost_equivalence(const PreEquivalence& p);

// X = G acting on itself by translation.
GroupoidEquivalence identity_equivalence(const GroupoidPtr& g);

// X = A x B between pair groupoids P(A) and P(B).
GroupoidEquivalence pair_groupoid_equivalence(const GroupoidPtr& pa,
                                              const GroupoidPtr& pb, int a,
                                              int b);

}  // namespace morita
