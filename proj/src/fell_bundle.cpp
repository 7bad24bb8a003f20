#include "morita/fell_bundle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace morita {

namespace {

std::string tup(std::initializer_list<int> ids) {
  std::string out = "(";
  bool first = true;
  for (int id : ids) {
    if (!first) out += ",";
    out += std::to_string(id);
    first = false;
  }
  return out + ")";
}

CMatrix random_fibre_element(const MatrixSubspace& f, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  CMatrix out = CMatrix::Zero(f.rows, f.cols);
  for (const CMatrix& b : f.basis) {
    out += Complex(dist(rng), dist(rng)) * b;
  }
  return out;
}

}  // namespace

Report verify_fell_bundle(const FellBundle& b, double tol, std::uint64_t seed) {
  Report rep;
  rep.subject = "fell_bundle";
  const FiniteGroupoid& G = *b.gpd;

  auto& structure = rep.add("F.shapes", CheckKind::Structural);
  if (static_cast<int>(b.fibres.size()) != G.n_arrows ||
      static_cast<int>(b.dims.dims.size()) != G.n_arrows) {
    fail_check(structure, "fibre or dim table size mismatch");
    return rep;
  }
  for (int u : G.units) {
    if (b.dims.at_unit(u) < 1) {
      fail_check(structure, "dimension at unit " + std::to_string(u) + " must be >= 1");
    }
  }
  for (int g = 0; g < G.n_arrows; ++g) {
    const MatrixSubspace& f = b.fibre(g);
    if (f.rows != b.fibre_rows(g) || f.cols != b.fibre_cols(g)) {
      fail_check(structure, "fibre over " + std::to_string(g) + " has wrong shape");
    }
  }
  if (!structure.pass) return rep;

  auto& onb = rep.add("F.orthonormal-basis", CheckKind::Structural);
  for (int g = 0; g < G.n_arrows; ++g) {
    const MatrixSubspace& f = b.fibre(g);
    for (int i = 0; i < f.dim(); ++i) {
      for (int j = 0; j < f.dim(); ++j) {
        const Complex ip = hs_inner(f.basis[static_cast<size_t>(i)], f.basis[static_cast<size_t>(j)]);
        const double want = (i == j) ? 1.0 : 0.0;
        track_residual(onb, std::abs(ip - Complex(want, 0)), 1e-10,
                       "fibre " + std::to_string(g) + " basis pair " + tup({i, j}));
      }
    }
  }

  auto& f1 = rep.add("F1");
  for (int g = 0; g < G.n_arrows && f1.pass; ++g) {
    for (int h = 0; h < G.n_arrows && f1.pass; ++h) {
      const int gh = G.compose(g, h);
      if (gh < 0) continue;
      const MatrixSubspace& target = b.fibre(gh);
      for (int i = 0; i < b.fibre(g).dim() && f1.pass; ++i) {
        for (int j = 0; j < b.fibre(h).dim(); ++j) {
          const CMatrix prod = b.fibre(g).basis[static_cast<size_t>(i)] *
                               b.fibre(h).basis[static_cast<size_t>(j)];
          if (!subspace_contains(target, prod, tol)) {
            double res = 0.0;
            least_squares_expand(target, prod, &res);
            fail_check(f1, "product of basis " + tup({g, i, h, j}) + " escapes fibre " + std::to_string(gh), res);
            break;
          }
        }
      }
    }
  }

  auto& f5 = rep.add("F5");
  for (int g = 0; g < G.n_arrows; ++g) {
    const MatrixSubspace& target = b.fibre(G.inv[g]);
    for (int i = 0; i < b.fibre(g).dim(); ++i) {
      const CMatrix adj = b.fibre(g).basis[static_cast<size_t>(i)].adjoint();
      if (!subspace_contains(target, adj, tol)) {
        fail_check(f5, "adjoint of basis " + tup({g, i}) + " escapes fibre " + std::to_string(G.inv[g]));
      }
    }
  }

  // Unit fibres are *-closed and multiplicatively closed, i.e. honest
  // finite-dimensional C*-subalgebras.
  auto& unital = rep.add("F.unit-fibres");
  for (int u : G.units) {
    const MatrixSubspace& f = b.fibre(u);
    for (int i = 0; i < f.dim(); ++i) {
      if (!subspace_contains(f, f.basis[static_cast<size_t>(i)].adjoint(), tol)) {
        fail_check(unital, "unit fibre " + std::to_string(u) + " not *-closed at basis " + std::to_string(i));
      }
      for (int j = 0; j < f.dim(); ++j) {
        if (!subspace_contains(f, f.basis[static_cast<size_t>(i)] * f.basis[static_cast<size_t>(j)], tol)) {
          fail_check(unital, "unit fibre " + std::to_string(u) + " not multiplicatively closed at " + tup({i, j}));
        }
      }
    }
  }

  // Model-automatic laws, sampled as sanity checks.
  std::mt19937_64 rng(seed);
  auto& f4 = rep.add("F4.sampled");
  auto& f7 = rep.add("F7.sampled");
  auto& f9 = rep.add("F9.sampled");
  auto& f10 = rep.add("F10.sampled");
  for (int g = 0; g < G.n_arrows; ++g) {
    if (b.fibre(g).dim() == 0) continue;
    const CMatrix x = random_fibre_element(b.fibre(g), rng);
    const double nx = op_norm(x);
    track_residual(f9, std::abs(op_norm(CMatrix(x.adjoint() * x)) - nx * nx),
                   tol * std::max(1.0, nx * nx), "arrow " + std::to_string(g));
    if (!psd_check(x.adjoint() * x, tol)) {
      fail_check(f10, "x*x not PSD at arrow " + std::to_string(g));
    }
    for (int h = 0; h < G.n_arrows; ++h) {
      if (G.compose(g, h) < 0 || b.fibre(h).dim() == 0) continue;
      const CMatrix y = random_fibre_element(b.fibre(h), rng);
      const CMatrix xy = x * y;
      if (op_norm(xy) > nx * op_norm(y) + tol * std::max(1.0, nx * op_norm(y))) {
        fail_check(f4, "submultiplicativity fails at " + tup({g, h}));
      }
      track_residual(f7, (xy.adjoint() - y.adjoint() * x.adjoint()).norm(), tol,
                     "anti-multiplicativity at " + tup({g, h}));
    }
  }
  auto& automatic = rep.add("F2-F3,F6,F8", CheckKind::Info);
  automatic.note = "bilinearity, associativity, conjugate-linearity, involutivity hold identically for matrix multiplication and conjugate transpose";

  return rep;
}

Report verify_saturated(const FellBundle& b, double tol) {
  Report rep;
  rep.subject = "fell_bundle.saturated";
  const FiniteGroupoid& G = *b.gpd;
  auto& sat = rep.add("F1.saturated");
  for (int g = 0; g < G.n_arrows; ++g) {
    for (int h = 0; h < G.n_arrows; ++h) {
      const int gh = G.compose(g, h);
      if (gh < 0) continue;
      std::vector<CMatrix> products;
      products.reserve(static_cast<size_t>(b.fibre(g).dim()) * b.fibre(h).dim());
      for (const CMatrix& x : b.fibre(g).basis) {
        for (const CMatrix& y : b.fibre(h).basis) {
          products.push_back(x * y);
        }
      }
      MatrixSubspace span = orthonormalize(b.fibre(gh).rows, b.fibre(gh).cols, products, tol);
      if (!subspace_equal(span, b.fibre(gh), tol)) {
        fail_check(sat, "span(B_g.B_h) != B_gh at " + tup({g, h}) +
                            " (dims " + std::to_string(span.dim()) + " vs " +
                            std::to_string(b.fibre(gh).dim()) + ")");
      }
    }
  }
  return rep;
}

FellBundle make_full_matrix_bundle(const GroupoidPtr& g, DimFunction dims) {
  FellBundle b;
  b.gpd = g;
  b.dims = std::move(dims);
  if (static_cast<int>(b.dims.dims.size()) != g->n_arrows) {
    throw std::invalid_argument("make_full_matrix_bundle: dims table size mismatch");
  }
  b.fibres.reserve(static_cast<size_t>(g->n_arrows));
  for (int a = 0; a < g->n_arrows; ++a) {
    b.fibres.push_back(full_matrix_space(b.fibre_rows(a), b.fibre_cols(a)));
  }
  return b;
}

FellBundle make_projective_rep_bundle(const GroupoidPtr& g,
                                      const std::vector<CMatrix>& unitaries,
                                      double tol) {
  const FiniteGroupoid& G = *g;
  if (G.n_units() != 1) {
    throw std::invalid_argument("make_projective_rep_bundle: groupoid must have one unit");
  }
  if (static_cast<int>(unitaries.size()) != G.n_arrows) {
    throw std::invalid_argument("make_projective_rep_bundle: one unitary per arrow required");
  }
  const Eigen::Index d = unitaries.front().rows();
  for (int a = 0; a < G.n_arrows; ++a) {
    const CMatrix& u = unitaries[static_cast<size_t>(a)];
    if (u.rows() != d || u.cols() != d) {
      throw std::invalid_argument("make_projective_rep_bundle: unitaries must share one square shape");
    }
    if ((u.adjoint() * u - CMatrix::Identity(d, d)).norm() > tol * static_cast<double>(d)) {
      throw std::invalid_argument("make_projective_rep_bundle: matrix " + std::to_string(a) + " is not unitary");
    }
  }
  for (int a = 0; a < G.n_arrows; ++a) {
    for (int c = 0; c < G.n_arrows; ++c) {
      const int ac = G.compose(a, c);
      const CMatrix prod = unitaries[static_cast<size_t>(a)] * unitaries[static_cast<size_t>(c)];
      const Complex lambda = hs_inner(prod, unitaries[static_cast<size_t>(ac)]) / static_cast<double>(d);
      if ((prod - lambda * unitaries[static_cast<size_t>(ac)]).norm() > tol * std::sqrt(static_cast<double>(d)) ||
          std::abs(std::abs(lambda) - 1.0) > tol) {
        throw std::invalid_argument("make_projective_rep_bundle: U_g U_h is not a unimodular multiple of U_gh at " + tup({a, c}));
      }
    }
  }

  FellBundle b;
  b.gpd = g;
  b.dims.dims.assign(static_cast<size_t>(G.n_arrows), static_cast<int>(d));
  b.fibres.resize(static_cast<size_t>(G.n_arrows));
  const double scale = std::sqrt(static_cast<double>(d));
  for (int a = 0; a < G.n_arrows; ++a) {
    MatrixSubspace f;
    f.rows = d;
    f.cols = d;
    f.basis.push_back(unitaries[static_cast<size_t>(a)] / scale);
    b.fibres[static_cast<size_t>(a)] = std::move(f);
  }
  return b;
}

GroupoidPtr weyl_group_groupoid(int n) {
  // Z/n x Z/n with (a,b) encoded as a*n+b.
  const int order = n * n;
  std::vector<std::vector<int>> t(static_cast<size_t>(order), std::vector<int>(static_cast<size_t>(order)));
  for (int a = 0; a < order; ++a) {
    for (int c = 0; c < order; ++c) {
      const int s1 = ((a / n + c / n) % n) * n + (a % n + c % n) % n;
      t[static_cast<size_t>(a)][static_cast<size_t>(c)] = s1;
    }
  }
  return std::make_shared<FiniteGroupoid>(make_group_groupoid(t));
}

FellBundle make_weyl_bundle(int n) {
  if (n < 2) throw std::invalid_argument("make_weyl_bundle: n must be >= 2");
  GroupoidPtr g = weyl_group_groupoid(n);
  // Shift X and clock Z in M_n; U_(a,b) = X^a Z^b.
  CMatrix shift = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) shift((i + 1) % n, i) = 1.0;
  CMatrix clock = CMatrix::Zero(n, n);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    clock(i, i) = std::polar(1.0, two_pi * static_cast<double>(i) / n);
  }
  // make_group_groupoid relabels so the identity is arrow 0; rebuild the
  // element order it used: identity (0,0) already has index 0.
  std::vector<CMatrix> unitaries(static_cast<size_t>(n) * n);
  CMatrix xa = CMatrix::Identity(n, n);
  for (int a = 0; a < n; ++a) {
    CMatrix u = xa;
    for (int c = 0; c < n; ++c) {
      unitaries[static_cast<size_t>(a * n + c)] = u;
      u = u * clock;
    }
    xa = shift * xa;
  }
  return make_projective_rep_bundle(g, unitaries);
}

DimFunction constant_dims(const FiniteGroupoid& g, int d) {
  DimFunction out;
  out.dims.assign(static_cast<size_t>(g.n_arrows), d);
  return out;
}

DimFunction random_dims(const FiniteGroupoid& g, int max_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(1, max_dim);
  DimFunction out;
  out.dims.assign(static_cast<size_t>(g.n_arrows), 1);
  for (int u : g.units) out.dims[static_cast<size_t>(u)] = dist(rng);
  return out;
}

}  // namespace morita
