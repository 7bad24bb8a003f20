#include "morita/groupoid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace morita {

namespace {

std::string arrow_tuple(std::initializer_list<int> ids) {
  std::string out = "(";
  bool first = true;
  for (int id : ids) {
    if (!first) out += ",";
    out += std::to_string(id);
    first = false;
  }
  return out + ")";
}

}  // namespace

void FiniteGroupoid::index_units() {
  units.clear();
  is_unit.assign(static_cast<size_t>(n_arrows), 0);
  for (int g = 0; g < n_arrows; ++g) {
    if (src[g] == g && rng[g] == g) {
      units.push_back(g);
      is_unit[g] = 1;
    }
  }
}

Report verify_groupoid(const FiniteGroupoid& g) {
  Report rep;
  rep.subject = "groupoid";
  const int n = g.n_arrows;

  auto& structure = rep.add("G.structure", CheckKind::Structural);
  if (static_cast<int>(g.src.size()) != n || static_cast<int>(g.rng.size()) != n ||
      static_cast<int>(g.inv.size()) != n ||
      static_cast<int>(g.comp.size()) != static_cast<size_t>(n) * n) {
    fail_check(structure, "table sizes inconsistent with arrow count");
    return rep;
  }
  for (int a = 0; a < n; ++a) {
    if (!g.valid_arrow(g.src[a]) || !g.valid_arrow(g.rng[a]) || !g.valid_arrow(g.inv[a])) {
      fail_check(structure, "arrow " + std::to_string(a) + " references an invalid id");
      return rep;
    }
  }

  auto& units_law = rep.add("G.units");
  for (int u : g.units) {
    if (g.src[u] != u || g.rng[u] != u) {
      fail_check(units_law, "listed unit " + std::to_string(u) + " has src/rng != itself");
    }
  }
  for (int a = 0; a < n; ++a) {
    const bool self = (g.src[a] == a && g.rng[a] == a);
    if (self != static_cast<bool>(g.is_unit[a])) {
      fail_check(units_law, "unit set disagrees with {a : src(a)=rng(a)=a} at " + std::to_string(a));
    }
  }
  for (int a = 0; a < n; ++a) {
    if (!g.is_unit[g.src[a]]) {
      fail_check(units_law, "src of " + std::to_string(a) + " is not a unit");
    }
    if (!g.is_unit[g.rng[a]]) {
      fail_check(units_law, "rng of " + std::to_string(a) + " is not a unit");
    }
  }

  auto& domain = rep.add("G.comp-domain");
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int ab = g.compose(a, b);
      const bool defined = (ab >= 0);
      if (defined != g.composable(a, b)) {
        fail_check(domain, "comp defined iff src=rng fails at " + arrow_tuple({a, b}));
      } else if (defined && !g.valid_arrow(ab)) {
        fail_check(domain, "comp value out of range at " + arrow_tuple({a, b}));
      }
    }
  }
  if (!domain.pass) return rep;

  auto& range_law = rep.add("G.comp-range-source");
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int ab = g.compose(a, b);
      if (ab < 0) continue;
      if (g.rng[ab] != g.rng[a] || g.src[ab] != g.src[b]) {
        fail_check(range_law, "rng/src of product wrong at " + arrow_tuple({a, b}));
      }
    }
  }

  auto& assoc = rep.add("G.associativity");
  for (int a = 0; a < n && assoc.pass; ++a) {
    for (int b = 0; b < n && assoc.pass; ++b) {
      const int ab = g.compose(a, b);
      if (ab < 0) continue;
      for (int c = 0; c < n; ++c) {
        const int bc = g.compose(b, c);
        if (bc < 0) continue;
        if (g.compose(ab, c) != g.compose(a, bc)) {
          fail_check(assoc, "witness " + arrow_tuple({a, b, c}));
          break;
        }
      }
    }
  }

  auto& neutral = rep.add("G.unit-neutrality");
  for (int a = 0; a < n; ++a) {
    if (g.compose(g.rng[a], a) != a || g.compose(a, g.src[a]) != a) {
      fail_check(neutral, "unit does not act neutrally on " + std::to_string(a));
    }
  }

  auto& inverses = rep.add("G.inverses");
  for (int a = 0; a < n; ++a) {
    const int ia = g.inv[a];
    if (g.src[ia] != g.rng[a] || g.rng[ia] != g.src[a] ||
        g.compose(ia, a) != g.src[a] || g.compose(a, ia) != g.rng[a]) {
      fail_check(inverses, "inverse law fails at " + std::to_string(a));
    }
    if (g.inv[ia] != a) {
      fail_check(inverses, "inv is not an involution at " + std::to_string(a));
    }
  }

  return rep;
}

FiniteGroupoid make_pair_groupoid(int n) {
  if (n <= 0) throw std::invalid_argument("make_pair_groupoid: n must be positive");
  FiniteGroupoid g;
  g.n_arrows = n * n;
  g.src.resize(static_cast<size_t>(g.n_arrows));
  g.rng.resize(static_cast<size_t>(g.n_arrows));
  g.inv.resize(static_cast<size_t>(g.n_arrows));
  g.comp.assign(static_cast<size_t>(g.n_arrows) * g.n_arrows, -1);
  auto id = [n](int a, int b) { return a * n + b; };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      g.src[id(a, b)] = id(b, b);
      g.rng[id(a, b)] = id(a, a);
      g.inv[id(a, b)] = id(b, a);
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        g.compose_slot(id(a, b), id(b, c)) = id(a, c);
      }
    }
  }
  g.index_units();
  return g;
}

namespace {

void check_group_table(const std::vector<std::vector<int>>& mult, int* identity_out) {
  const int n = static_cast<int>(mult.size());
  if (n == 0) throw std::invalid_argument("group table: empty");
  for (const auto& row : mult) {
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("group table: not square");
    }
    for (int v : row) {
      if (v < 0 || v >= n) throw std::invalid_argument("group table: entry out of range");
    }
  }
  int identity = -1;
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int a = 0; a < n; ++a) {
      if (mult[static_cast<size_t>(e)][static_cast<size_t>(a)] != a ||
          mult[static_cast<size_t>(a)][static_cast<size_t>(e)] != a) {
        ok = false;
        break;
      }
    }
    if (ok) {
      identity = e;
      break;
    }
  }
  if (identity < 0) throw std::invalid_argument("group table: no identity element");
  for (int a = 0; a < n; ++a) {
    bool has_inverse = false;
    for (int b = 0; b < n; ++b) {
      if (mult[static_cast<size_t>(a)][static_cast<size_t>(b)] == identity &&
          mult[static_cast<size_t>(b)][static_cast<size_t>(a)] == identity) {
        has_inverse = true;
        break;
      }
    }
    if (!has_inverse) throw std::invalid_argument("group table: missing inverse");
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        const int ab_c = mult[static_cast<size_t>(mult[static_cast<size_t>(a)][static_cast<size_t>(b)])][static_cast<size_t>(c)];
        const int a_bc = mult[static_cast<size_t>(a)][static_cast<size_t>(mult[static_cast<size_t>(b)][static_cast<size_t>(c)])];
        if (ab_c != a_bc) throw std::invalid_argument("group table: not associative");
      }
    }
  }
  if (identity_out != nullptr) *identity_out = identity;
}

int group_inverse(const std::vector<std::vector<int>>& mult, int identity, int a) {
  const int n = static_cast<int>(mult.size());
  for (int b = 0; b < n; ++b) {
    if (mult[static_cast<size_t>(a)][static_cast<size_t>(b)] == identity) return b;
  }
  return -1;
}

}  // namespace

FiniteGroupoid make_group_groupoid(const std::vector<std::vector<int>>& mult) {
  int identity = -1;
  check_group_table(mult, &identity);
  const int n = static_cast<int>(mult.size());

  // Relabel so the identity gets id 0 and is its own src/rng.
  std::vector<int> to_new(static_cast<size_t>(n)), to_old(static_cast<size_t>(n));
  to_new[static_cast<size_t>(identity)] = 0;
  to_old[0] = identity;
  int next = 1;
  for (int a = 0; a < n; ++a) {
    if (a == identity) continue;
    to_new[static_cast<size_t>(a)] = next;
    to_old[static_cast<size_t>(next)] = a;
    ++next;
  }

  FiniteGroupoid g;
  g.n_arrows = n;
  g.src.assign(static_cast<size_t>(n), 0);
  g.rng.assign(static_cast<size_t>(n), 0);
  g.inv.resize(static_cast<size_t>(n));
  g.comp.assign(static_cast<size_t>(n) * n, -1);
  for (int a = 0; a < n; ++a) {
    g.inv[a] = to_new[static_cast<size_t>(group_inverse(mult, identity, to_old[static_cast<size_t>(a)]))];
    for (int b = 0; b < n; ++b) {
      g.compose_slot(a, b) =
          to_new[static_cast<size_t>(mult[static_cast<size_t>(to_old[static_cast<size_t>(a)])]
                                         [static_cast<size_t>(to_old[static_cast<size_t>(b)])])];
    }
  }
  g.index_units();
  return g;
}

FiniteGroupoid make_transformation_groupoid(
    const std::vector<std::vector<int>>& mult,
    const std::vector<std::vector<int>>& action) {
  int identity = -1;
  check_group_table(mult, &identity);
  const int order = static_cast<int>(mult.size());
  if (static_cast<int>(action.size()) != order) {
    throw std::invalid_argument("transformation groupoid: action rows != group order");
  }
  const int n_points = action.empty() ? 0 : static_cast<int>(action[0].size());
  if (n_points <= 0) throw std::invalid_argument("transformation groupoid: empty point set");
  for (const auto& row : action) {
    if (static_cast<int>(row.size()) != n_points) {
      throw std::invalid_argument("transformation groupoid: ragged action table");
    }
    std::vector<char> seen(static_cast<size_t>(n_points), 0);
    for (int v : row) {
      if (v < 0 || v >= n_points || seen[static_cast<size_t>(v)]) {
        throw std::invalid_argument("transformation groupoid: action is not by bijections");
      }
      seen[static_cast<size_t>(v)] = 1;
    }
  }
  for (int s = 0; s < n_points; ++s) {
    if (action[static_cast<size_t>(identity)][static_cast<size_t>(s)] != s) {
      throw std::invalid_argument("transformation groupoid: identity must act trivially");
    }
  }
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      const int ab = mult[static_cast<size_t>(a)][static_cast<size_t>(b)];
      for (int s = 0; s < n_points; ++s) {
        if (action[static_cast<size_t>(a)][static_cast<size_t>(action[static_cast<size_t>(b)][static_cast<size_t>(s)])] !=
            action[static_cast<size_t>(ab)][static_cast<size_t>(s)]) {
          throw std::invalid_argument("transformation groupoid: action is not a homomorphism");
        }
      }
    }
  }

  FiniteGroupoid g;
  g.n_arrows = order * n_points;
  g.src.resize(static_cast<size_t>(g.n_arrows));
  g.rng.resize(static_cast<size_t>(g.n_arrows));
  g.inv.resize(static_cast<size_t>(g.n_arrows));
  g.comp.assign(static_cast<size_t>(g.n_arrows) * g.n_arrows, -1);
  auto id = [n_points](int grp, int s) { return grp * n_points + s; };
  auto act = [&action](int grp, int s) {
    return action[static_cast<size_t>(grp)][static_cast<size_t>(s)];
  };
  for (int a = 0; a < order; ++a) {
    for (int s = 0; s < n_points; ++s) {
      g.src[id(a, s)] = id(identity, s);
      g.rng[id(a, s)] = id(identity, act(a, s));
      g.inv[id(a, s)] = id(group_inverse(mult, identity, a), act(a, s));
    }
  }
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      const int ab = mult[static_cast<size_t>(a)][static_cast<size_t>(b)];
      for (int s = 0; s < n_points; ++s) {
        // (a, b.s) . (b, s) = (ab, s)
        g.compose_slot(id(a, act(b, s)), id(b, s)) = id(ab, s);
      }
    }
  }
  g.index_units();
  return g;
}

FiniteGroupoid disjoint_union(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  FiniteGroupoid g;
  const int na = a.n_arrows;
  g.n_arrows = na + b.n_arrows;
  g.src.resize(static_cast<size_t>(g.n_arrows));
  g.rng.resize(static_cast<size_t>(g.n_arrows));
  g.inv.resize(static_cast<size_t>(g.n_arrows));
  g.comp.assign(static_cast<size_t>(g.n_arrows) * g.n_arrows, -1);
  for (int x = 0; x < na; ++x) {
    g.src[x] = a.src[x];
    g.rng[x] = a.rng[x];
    g.inv[x] = a.inv[x];
    for (int y = 0; y < na; ++y) g.compose_slot(x, y) = a.compose(x, y);
  }
  for (int x = 0; x < b.n_arrows; ++x) {
    g.src[na + x] = na + b.src[x];
    g.rng[na + x] = na + b.rng[x];
    g.inv[na + x] = na + b.inv[x];
    for (int y = 0; y < b.n_arrows; ++y) {
      const int xy = b.compose(x, y);
      g.compose_slot(na + x, na + y) = xy < 0 ? -1 : na + xy;
    }
  }
  g.index_units();
  return g;
}

std::vector<std::vector<int>> cyclic_group_table(int n) {
  if (n <= 0) throw std::invalid_argument("cyclic_group_table: n must be positive");
  std::vector<std::vector<int>> t(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) t[static_cast<size_t>(a)][static_cast<size_t>(b)] = (a + b) % n;
  }
  return t;
}

std::vector<std::vector<int>> klein_four_table() {
  // Z/2 x Z/2 with elements encoded as bit pairs.
  std::vector<std::vector<int>> t(4, std::vector<int>(4));
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) t[static_cast<size_t>(a)][static_cast<size_t>(b)] = a ^ b;
  }
  return t;
}

}  // namespace morita
