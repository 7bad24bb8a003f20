// Finite groupoids as explicit arrow sets with a dense partial composition
// table. Arrows are integer ids 0..n-1; units are arrows u with
// src(u) = rng(u) = u.
#pragma once

#include "morita/report.hpp"

#include <memory>
#include <vector>

namespace morita {

struct FiniteGroupoid {
  int n_arrows = 0;
  std::vector<int> src;    // arrow -> unit arrow id
  std::vector<int> rng;    // arrow -> unit arrow id
  std::vector<int> inv;    // arrow -> arrow
  std::vector<int> comp;   // n*n table, comp[g*n+h] = gh, -1 undefined
  std::vector<int> units;  // sorted
  std::vector<char> is_unit;

  bool valid_arrow(int g) const { return g >= 0 && g < n_arrows; }
  bool composable(int g, int h) const { return src[g] == rng[h]; }
  int compose(int g, int h) const { return comp[static_cast<size_t>(g) * n_arrows + h]; }
  int& compose_slot(int g, int h) { return comp[static_cast<size_t>(g) * n_arrows + h]; }
  int n_units() const { return static_cast<int>(units.size()); }

  // Recomputes units/is_unit from src/rng; call after filling tables.
  void index_units();
};

using GroupoidPtr = std::shared_ptr<const FiniteGroupoid>;

Report verify_groupoid(const FiniteGroupoid& g);

// Pair groupoid on n points: arrows (a,b) with id a*n+b, (a,b)(b,c) = (a,c).
FiniteGroupoid make_pair_groupoid(int n);

// One-object groupoid from a group multiplication table; throws on a table
// that is not a group.
FiniteGroupoid make_group_groupoid(const std::vector<std::vector<int>>& mult);

// Transformation groupoid G |x S for a group acting on a finite set:
// arrows (g, s) with src s, rng g.s, (g, h.s)(h, s) = (gh, s).
// action[g][s] must be a bijection for each g and a homomorphism in g.
FiniteGroupoid make_transformation_groupoid(
    const std::vector<std::vector<int>>& mult,
    const std::vector<std::vector<int>>& action);

FiniteGroupoid disjoint_union(const FiniteGroupoid& a, const FiniteGroupoid& b);

std::vector<std::vector<int>> cyclic_group_table(int n);
std::vector<std::vector<int>> klein_four_table();

}  // namespace morita
