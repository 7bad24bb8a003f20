#include "morita/equiv_bundle.hpp"

#include <algorithm>
#include <array>
#include <map>
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

}  // namespace

CVector BimoduleBundle::act_left(const CMatrix& b, int g, int x, const CVector& v,
                                 double* residual) const {
  return act_left_matrix(b, g, x, residual) * v;
}

CVector BimoduleBundle::act_right(int x, const CVector& v, const CMatrix& c, int h,
                                  double* residual) const {
  return act_right_matrix(x, c, h, residual) * v;
}

CMatrix BimoduleBundle::inner_left(int x1, const CVector& v1, int x2,
                                   const CVector& v2) const {
  const std::vector<CMatrix> t = inner_left_table(x1, x2);
  const int d1 = fibre_dim(x1);
  const int d2 = fibre_dim(x2);
  // ip_left values live in B-fibres of shape dims(r(x1)) x dims(r(x2)).
  CMatrix out = CMatrix::Zero(left_fell()->dims.at_unit(base().space.r[x1]),
                              left_fell()->dims.at_unit(base().space.r[x2]));
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      out += v1(i) * std::conj(v2(j)) * t[static_cast<size_t>(i) * d2 + j];
    }
  }
  return out;
}

CMatrix BimoduleBundle::inner_right(int x1, const CVector& v1, int x2,
                                    const CVector& v2) const {
  const std::vector<CMatrix> t = inner_right_table(x1, x2);
  const int d1 = fibre_dim(x1);
  const int d2 = fibre_dim(x2);
  CMatrix out = CMatrix::Zero(right_fell()->dims.at_unit(base().space.s[x1]),
                              right_fell()->dims.at_unit(base().space.s[x2]));
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      out += std::conj(v1(i)) * v2(j) * t[static_cast<size_t>(i) * d2 + j];
    }
  }
  return out;
}

double BimoduleBundle::module_norm(int x, const CVector& v) const {
  if (fibre_dim(x) == 0) return 0.0;
  return std::sqrt(std::max(0.0, op_norm(inner_left(x, v, x, v))));
}

BundleSpace::BundleSpace(PreEquivalencePtr base, EquivalencePtr base_eq,
                         FellBundlePtr left, FellBundlePtr right,
                         std::vector<MatrixSubspace> fibres)
    : base_(std::move(base)),
      base_eq_(std::move(base_eq)),
      left_(std::move(left)),
      right_(std::move(right)),
      fibres_(std::move(fibres)) {
  if (base_eq_ != nullptr && base_ == nullptr) {
    base_ = PreEquivalencePtr(base_eq_, &base_eq_->pre);
  }
  if (base_ == nullptr) throw std::invalid_argument("BundleSpace: null base");
  const GroupoidBispace& X = base_->space;
  if (left_->gpd.get() != X.left.get() || right_->gpd.get() != X.right.get()) {
    throw std::invalid_argument("BundleSpace: Fell bundles do not sit over the base groupoids");
  }
  if (static_cast<int>(fibres_.size()) != X.n_points) {
    throw std::invalid_argument("BundleSpace: one fibre per point required");
  }
  for (int x = 0; x < X.n_points; ++x) {
    const MatrixSubspace& f = fibres_[static_cast<size_t>(x)];
    if (f.rows != left_->dims.at_unit(X.r[x]) || f.cols != right_->dims.at_unit(X.s[x])) {
      throw std::invalid_argument("BundleSpace: fibre over point " + std::to_string(x) + " has wrong shape");
    }
  }
}

CMatrix BundleSpace::act_left_matrix(const CMatrix& b, int g, int x,
                                     double* residual) const {
  const GroupoidBispace& X = base_->space;
  const int gx = X.act_left(g, x);
  if (gx < 0) throw std::invalid_argument("act_left: s_G(g) != r(x)");
  const MatrixSubspace& src = fibres_[static_cast<size_t>(x)];
  const MatrixSubspace& dst = fibres_[static_cast<size_t>(gx)];
  CMatrix out(dst.dim(), src.dim());
  double worst = 0.0;
  for (int i = 0; i < src.dim(); ++i) {
    double res = 0.0;
    out.col(i) = least_squares_expand(dst, b * src.basis[static_cast<size_t>(i)], &res);
    worst = std::max(worst, res);
  }
  if (residual != nullptr) *residual = worst;
  return out;
}

CMatrix BundleSpace::act_right_matrix(int x, const CMatrix& c, int h,
                                      double* residual) const {
  const GroupoidBispace& X = base_->space;
  const int xh = X.act_right(x, h);
  if (xh < 0) throw std::invalid_argument("act_right: s(x) != r_H(h)");
  const MatrixSubspace& src = fibres_[static_cast<size_t>(x)];
  const MatrixSubspace& dst = fibres_[static_cast<size_t>(xh)];
  CMatrix out(dst.dim(), src.dim());
  double worst = 0.0;
  for (int i = 0; i < src.dim(); ++i) {
    double res = 0.0;
    out.col(i) = least_squares_expand(dst, src.basis[static_cast<size_t>(i)] * c, &res);
    worst = std::max(worst, res);
  }
  if (residual != nullptr) *residual = worst;
  return out;
}

std::vector<CMatrix> BundleSpace::inner_left_table(int x1, int x2) const {
  const MatrixSubspace& f1 = fibres_[static_cast<size_t>(x1)];
  const MatrixSubspace& f2 = fibres_[static_cast<size_t>(x2)];
  std::vector<CMatrix> out;
  out.reserve(static_cast<size_t>(f1.dim()) * f2.dim());
  for (int i = 0; i < f1.dim(); ++i) {
    for (int j = 0; j < f2.dim(); ++j) {
      out.push_back(f1.basis[static_cast<size_t>(i)] *
                    f2.basis[static_cast<size_t>(j)].adjoint());
    }
  }
  return out;
}

std::vector<CMatrix> BundleSpace::inner_right_table(int x1, int x2) const {
  const MatrixSubspace& f1 = fibres_[static_cast<size_t>(x1)];
  const MatrixSubspace& f2 = fibres_[static_cast<size_t>(x2)];
  std::vector<CMatrix> out;
  out.reserve(static_cast<size_t>(f1.dim()) * f2.dim());
  for (int i = 0; i < f1.dim(); ++i) {
    for (int j = 0; j < f2.dim(); ++j) {
      out.push_back(f1.basis[static_cast<size_t>(i)].adjoint() *
                    f2.basis[static_cast<size_t>(j)]);
    }
  }
  return out;
}

CMatrix BundleSpace::realize(int x, const CVector& coords) const {
  return subspace_element(fibres_[static_cast<size_t>(x)], coords);
}

namespace {

enum class FeLevel { Action, Hypo, Equivalence };

// Shared sweep state: the bundle, tolerances, and memoized act matrices and
// inner product tables.
class FeContext {
 public:
  FeContext(const BimoduleBundle& m, const FeOptions& opt)
      : m_(m),
        opt_(opt),
        base_(m.base()),
        X_(base_.space),
        B_(*m.left_fell()),
        C_(*m.right_fell()) {}

  const BimoduleBundle& m_;
  const FeOptions& opt_;
  const PreEquivalence& base_;
  const GroupoidBispace& X_;
  const FellBundle& B_;
  const FellBundle& C_;

  const std::vector<CMatrix>& ipl(int x1, int x2) {
    auto it = ipl_.find({x1, x2});
    if (it == ipl_.end()) {
      it = ipl_.emplace(std::make_pair(x1, x2), m_.inner_left_table(x1, x2)).first;
    }
    return it->second;
  }
  const std::vector<CMatrix>& ipr(int x1, int x2) {
    auto it = ipr_.find({x1, x2});
    if (it == ipr_.end()) {
      it = ipr_.emplace(std::make_pair(x1, x2), m_.inner_right_table(x1, x2)).first;
    }
    return it->second;
  }
  // Left action matrix of basis element k of the B-fibre over g.
  const CMatrix& lact(int g, int x, int k, double* residual = nullptr) {
    auto it = lact_.find({g, x, k});
    if (it == lact_.end()) {
      double res = 0.0;
      CMatrix mat = m_.act_left_matrix(B_.fibre(g).basis[static_cast<size_t>(k)], g, x, &res);
      it = lact_.emplace(std::array<int, 3>{g, x, k}, std::make_pair(std::move(mat), res)).first;
    }
    if (residual != nullptr) *residual = it->second.second;
    return it->second.first;
  }
  const CMatrix& ract(int x, int h, int k, double* residual = nullptr) {
    auto it = ract_.find({x, h, k});
    if (it == ract_.end()) {
      double res = 0.0;
      CMatrix mat = m_.act_right_matrix(x, C_.fibre(h).basis[static_cast<size_t>(k)], h, &res);
      it = ract_.emplace(std::array<int, 3>{x, h, k}, std::make_pair(std::move(mat), res)).first;
    }
    if (residual != nullptr) *residual = it->second.second;
    return it->second.first;
  }

  int dim(int x) const { return m_.fibre_dim(x); }

 private:
  std::map<std::pair<int, int>, std::vector<CMatrix>> ipl_, ipr_;
  std::map<std::array<int, 3>, std::pair<CMatrix, double>> lact_, ract_;
};

void check_actions(FeContext& ctx, Report& rep) {
  const GroupoidBispace& X = ctx.X_;
  const FiniteGroupoid& G = *X.left;
  const FiniteGroupoid& H = *X.right;
  const double tol = ctx.opt_.tol;

  auto& fa1l = rep.add("FA1.left-closure");
  for (int g = 0; g < G.n_arrows; ++g) {
    for (int x = 0; x < X.n_points; ++x) {
      if (X.act_left(g, x) < 0) continue;
      for (int k = 0; k < ctx.B_.fibre(g).dim(); ++k) {
        double res = 0.0;
        ctx.lact(g, x, k, &res);
        track_residual(fa1l, res, tol, "B-basis " + tup({g, k}) + " on fibre " + std::to_string(x));
      }
    }
  }
  auto& fa1r = rep.add("FA1.right-closure");
  for (int x = 0; x < X.n_points; ++x) {
    for (int h = 0; h < H.n_arrows; ++h) {
      if (X.act_right(x, h) < 0) continue;
      for (int k = 0; k < ctx.C_.fibre(h).dim(); ++k) {
        double res = 0.0;
        ctx.ract(x, h, k, &res);
        track_residual(fa1r, res, tol, "fibre " + std::to_string(x) + " by C-basis " + tup({h, k}));
      }
    }
  }

  auto& fa2 = rep.add("FA2");
  for (int g2 = 0; g2 < G.n_arrows; ++g2) {
    for (int g1 = 0; g1 < G.n_arrows; ++g1) {
      const int g21 = G.compose(g2, g1);
      if (g21 < 0) continue;
      for (int x = 0; x < X.n_points; ++x) {
        if (X.act_left(g1, x) < 0) continue;
        const int g1x = X.act_left(g1, x);
        for (int k2 = 0; k2 < ctx.B_.fibre(g2).dim(); ++k2) {
          for (int k1 = 0; k1 < ctx.B_.fibre(g1).dim(); ++k1) {
            const CMatrix prod = ctx.B_.fibre(g2).basis[static_cast<size_t>(k2)] *
                                 ctx.B_.fibre(g1).basis[static_cast<size_t>(k1)];
            const CMatrix lhs = ctx.m_.act_left_matrix(prod, g21, x, nullptr);
            const CMatrix rhs = ctx.lact(g2, g1x, k2) * ctx.lact(g1, x, k1);
            track_residual(fa2, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                           "left assoc at " + tup({g2, k2, g1, k1, x}));
          }
        }
      }
    }
  }
  for (int x = 0; x < X.n_points; ++x) {
    for (int h1 = 0; h1 < H.n_arrows; ++h1) {
      const int xh1 = X.act_right(x, h1);
      if (xh1 < 0) continue;
      for (int h2 = 0; h2 < H.n_arrows; ++h2) {
        const int h12 = H.compose(h1, h2);
        if (h12 < 0) continue;
        for (int k1 = 0; k1 < ctx.C_.fibre(h1).dim(); ++k1) {
          for (int k2 = 0; k2 < ctx.C_.fibre(h2).dim(); ++k2) {
            const CMatrix prod = ctx.C_.fibre(h1).basis[static_cast<size_t>(k1)] *
                                 ctx.C_.fibre(h2).basis[static_cast<size_t>(k2)];
            const CMatrix lhs = ctx.m_.act_right_matrix(x, prod, h12, nullptr);
            const CMatrix rhs = ctx.ract(xh1, h2, k2) * ctx.ract(x, h1, k1);
            track_residual(fa2, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                           "right assoc at " + tup({x, h1, k1, h2, k2}));
          }
        }
      }
    }
  }

  auto& fa3 = rep.add("FA3.sampled");
  {
    std::mt19937_64 rng(ctx.opt_.seed);
    std::vector<std::pair<int, int>> left_adm;
    for (int g = 0; g < G.n_arrows; ++g) {
      for (int x = 0; x < X.n_points; ++x) {
        if (X.act_left(g, x) >= 0 && ctx.B_.fibre(g).dim() > 0 && ctx.dim(x) > 0) {
          left_adm.emplace_back(g, x);
        }
      }
    }
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int t = 0; t < ctx.opt_.samples && !left_adm.empty(); ++t) {
      const auto [g, x] = left_adm[rng() % left_adm.size()];
      CMatrix b = CMatrix::Zero(ctx.B_.fibre(g).rows, ctx.B_.fibre(g).cols);
      for (const CMatrix& e : ctx.B_.fibre(g).basis) b += Complex(dist(rng), dist(rng)) * e;
      CVector v(ctx.dim(x));
      for (int i = 0; i < v.size(); ++i) v(i) = Complex(dist(rng), dist(rng));
      const CVector bv = ctx.m_.act_left(b, g, x, v);
      const double lhs = ctx.m_.module_norm(X.act_left(g, x), bv);
      const double rhs = op_norm(b) * ctx.m_.module_norm(x, v);
      track_residual(fa3, std::max(0.0, lhs - rhs), tol * std::max(1.0, rhs),
                     "norm bound at " + tup({g, x}));
    }
  }

  auto& fe1 = rep.add("FE1.commute");
  for (int g = 0; g < G.n_arrows; ++g) {
    for (int x = 0; x < X.n_points; ++x) {
      const int gx = X.act_left(g, x);
      if (gx < 0) continue;
      for (int h = 0; h < H.n_arrows; ++h) {
        const int xh = X.act_right(x, h);
        if (xh < 0) continue;
        for (int kb = 0; kb < ctx.B_.fibre(g).dim(); ++kb) {
          for (int kc = 0; kc < ctx.C_.fibre(h).dim(); ++kc) {
            const CMatrix lhs = ctx.ract(gx, h, kc) * ctx.lact(g, x, kb);
            const CMatrix rhs = ctx.lact(g, xh, kb) * ctx.ract(x, h, kc);
            track_residual(fe1, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                           "commutation at " + tup({g, kb, x, h, kc}));
          }
        }
      }
    }
  }
}

void check_inner_products(FeContext& ctx, Report& rep, bool equivalence_level) {
  const GroupoidBispace& X = ctx.X_;
  const FiniteGroupoid& G = *X.left;
  const FiniteGroupoid& H = *X.right;
  const PreEquivalence& P = ctx.base_;
  const double tol = ctx.opt_.tol;
  const int n = X.n_points;

  const std::string a_label = equivalence_level ? "FE2.a" : "FE2.a0";
  auto& fe2a = rep.add(a_label);
  for (int x1 = 0; x1 < n; ++x1) {
    for (int x2 = 0; x2 < n; ++x2) {
      if (P.lamL(x1, x2) >= 0) {
        const auto& t = ctx.ipl(x1, x2);
        const MatrixSubspace& target = ctx.B_.fibre(P.lamL(x1, x2));
        for (int i = 0; i < ctx.dim(x1); ++i) {
          for (int j = 0; j < ctx.dim(x2); ++j) {
            const CMatrix& val = t[static_cast<size_t>(i) * ctx.dim(x2) + j];
            double res = 0.0;
            least_squares_expand(target, val, &res);
            track_residual(fe2a, res, tol * std::max(1.0, val.norm()),
                           "ip_left" + tup({x1, i, x2, j}) + " escapes B-fibre " +
                               std::to_string(P.lamL(x1, x2)));
          }
        }
      }
      if (P.lamR(x1, x2) >= 0) {
        const auto& t = ctx.ipr(x1, x2);
        const MatrixSubspace& target = ctx.C_.fibre(P.lamR(x1, x2));
        for (int i = 0; i < ctx.dim(x1); ++i) {
          for (int j = 0; j < ctx.dim(x2); ++j) {
            const CMatrix& val = t[static_cast<size_t>(i) * ctx.dim(x2) + j];
            double res = 0.0;
            least_squares_expand(target, val, &res);
            track_residual(fe2a, res, tol * std::max(1.0, val.norm()),
                           "ip_right" + tup({x1, i, x2, j}) + " escapes C-fibre " +
                               std::to_string(P.lamR(x1, x2)));
          }
        }
      }
    }
  }

  auto& fe2b = rep.add("FE2.b");
  for (int x1 = 0; x1 < n; ++x1) {
    for (int x2 = 0; x2 < n; ++x2) {
      if (P.lamL(x1, x2) >= 0) {
        const auto& t12 = ctx.ipl(x1, x2);
        const auto& t21 = ctx.ipl(x2, x1);
        for (int i = 0; i < ctx.dim(x1); ++i) {
          for (int j = 0; j < ctx.dim(x2); ++j) {
            const CMatrix lhs = t12[static_cast<size_t>(i) * ctx.dim(x2) + j].adjoint();
            const CMatrix& rhs = t21[static_cast<size_t>(j) * ctx.dim(x1) + i];
            track_residual(fe2b, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                           "ip_left adjoint symmetry at " + tup({x1, i, x2, j}));
          }
        }
      }
      if (P.lamR(x1, x2) >= 0) {
        const auto& t12 = ctx.ipr(x1, x2);
        const auto& t21 = ctx.ipr(x2, x1);
        for (int i = 0; i < ctx.dim(x1); ++i) {
          for (int j = 0; j < ctx.dim(x2); ++j) {
            const CMatrix lhs = t12[static_cast<size_t>(i) * ctx.dim(x2) + j].adjoint();
            const CMatrix& rhs = t21[static_cast<size_t>(j) * ctx.dim(x1) + i];
            track_residual(fe2b, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                           "ip_right adjoint symmetry at " + tup({x1, i, x2, j}));
          }
        }
      }
    }
  }

  auto& fe2c = rep.add("FE2.c");
  for (int g = 0; g < G.n_arrows; ++g) {
    for (int x1 = 0; x1 < n; ++x1) {
      const int gx1 = X.act_left(g, x1);
      if (gx1 < 0) continue;
      for (int x2 = 0; x2 < n; ++x2) {
        if (P.lamL(x1, x2) < 0) continue;
        const auto& t_moved = ctx.ipl(gx1, x2);
        const auto& t = ctx.ipl(x1, x2);
        const Eigen::Index vrows = ctx.B_.dims.at_unit(X.r[gx1]);
        const Eigen::Index vcols = ctx.B_.dims.at_unit(X.r[x2]);
        for (int kb = 0; kb < ctx.B_.fibre(g).dim(); ++kb) {
          const CMatrix& act = ctx.lact(g, x1, kb);
          const CMatrix& bhat = ctx.B_.fibre(g).basis[static_cast<size_t>(kb)];
          for (int i = 0; i < ctx.dim(x1); ++i) {
            for (int j = 0; j < ctx.dim(x2); ++j) {
              CMatrix lhs = CMatrix::Zero(vrows, vcols);
              for (int u = 0; u < ctx.dim(gx1); ++u) {
                lhs += act(u, i) * t_moved[static_cast<size_t>(u) * ctx.dim(x2) + j];
              }
              const CMatrix rhs = bhat * t[static_cast<size_t>(i) * ctx.dim(x2) + j];
              track_residual(fe2c, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                             "B-linearity at " + tup({g, kb, x1, i, x2, j}));
            }
          }
        }
      }
    }
  }
  for (int x2 = 0; x2 < n; ++x2) {
    for (int h = 0; h < H.n_arrows; ++h) {
      const int x2h = X.act_right(x2, h);
      if (x2h < 0) continue;
      for (int x1 = 0; x1 < n; ++x1) {
        if (P.lamR(x1, x2) < 0) continue;
        const auto& t_moved = ctx.ipr(x1, x2h);
        const auto& t = ctx.ipr(x1, x2);
        const Eigen::Index vrows = ctx.C_.dims.at_unit(X.s[x1]);
        const Eigen::Index vcols = ctx.C_.dims.at_unit(X.s[x2h]);
        for (int kc = 0; kc < ctx.C_.fibre(h).dim(); ++kc) {
          const CMatrix& act = ctx.ract(x2, h, kc);
          const CMatrix& chat = ctx.C_.fibre(h).basis[static_cast<size_t>(kc)];
          for (int i = 0; i < ctx.dim(x1); ++i) {
            for (int j = 0; j < ctx.dim(x2); ++j) {
              CMatrix lhs = CMatrix::Zero(vrows, vcols);
              for (int u = 0; u < ctx.dim(x2h); ++u) {
                lhs += act(u, j) * t_moved[static_cast<size_t>(i) * ctx.dim(x2h) + u];
              }
              const CMatrix rhs = t[static_cast<size_t>(i) * ctx.dim(x2) + j] * chat;
              track_residual(fe2c, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                             "C-linearity at " + tup({x1, i, x2, j, h, kc}));
            }
          }
        }
      }
    }
  }

  auto& fe2d0 = rep.add("FE2.d0");
  // <m1.c, m2>_B = <m1, m2.c*>_B over (x1, h, x2) with s(x1)=r_H(h),
  // s(x2)=s_H(h).
  for (int x1 = 0; x1 < n; ++x1) {
    for (int h = 0; h < H.n_arrows; ++h) {
      const int x1h = X.act_right(x1, h);
      if (x1h < 0) continue;
      const int hinv = H.inv[h];
      for (int x2 = 0; x2 < n; ++x2) {
        if (X.s[x2] != H.src[h]) continue;
        const int x2hinv = X.act_right(x2, hinv);
        const auto& t_lhs = ctx.ipl(x1h, x2);
        const auto& t_rhs = ctx.ipl(x1, x2hinv);
        for (int kc = 0; kc < ctx.C_.fibre(h).dim(); ++kc) {
          const CMatrix& r1 = ctx.ract(x1, h, kc);
          const CMatrix cstar = ctx.C_.fibre(h).basis[static_cast<size_t>(kc)].adjoint();
          const CMatrix r2 = ctx.m_.act_right_matrix(x2, cstar, hinv, nullptr);
          for (int i = 0; i < ctx.dim(x1); ++i) {
            for (int j = 0; j < ctx.dim(x2); ++j) {
              CMatrix lhs = CMatrix::Zero(ctx.B_.dims.at_unit(X.r[x1h]),
                                          ctx.B_.dims.at_unit(X.r[x2]));
              for (int u = 0; u < ctx.dim(x1h); ++u) {
                lhs += r1(u, i) * t_lhs[static_cast<size_t>(u) * ctx.dim(x2) + j];
              }
              CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
              for (int u = 0; u < ctx.dim(x2hinv); ++u) {
                rhs += std::conj(r2(u, j)) * t_rhs[static_cast<size_t>(i) * ctx.dim(x2hinv) + u];
              }
              track_residual(fe2d0, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                             "right adjointability at " + tup({x1, i, h, kc, x2, j}));
            }
          }
        }
      }
    }
  }
  // <b.m1, m2>_C = <m1, b*.m2>_C over (g, x1, x2) with r(x1)=s_G(g),
  // r(x2)=r_G(g).
  for (int g = 0; g < G.n_arrows; ++g) {
    const int ginv = G.inv[g];
    for (int x1 = 0; x1 < n; ++x1) {
      const int gx1 = X.act_left(g, x1);
      if (gx1 < 0) continue;
      for (int x2 = 0; x2 < n; ++x2) {
        if (X.r[x2] != G.rng[g]) continue;
        const int ginvx2 = X.act_left(ginv, x2);
        const auto& t_lhs = ctx.ipr(gx1, x2);
        const auto& t_rhs = ctx.ipr(x1, ginvx2);
        for (int kb = 0; kb < ctx.B_.fibre(g).dim(); ++kb) {
          const CMatrix& l1 = ctx.lact(g, x1, kb);
          const CMatrix bstar = ctx.B_.fibre(g).basis[static_cast<size_t>(kb)].adjoint();
          const CMatrix l2 = ctx.m_.act_left_matrix(bstar, ginv, x2, nullptr);
          for (int i = 0; i < ctx.dim(x1); ++i) {
            for (int j = 0; j < ctx.dim(x2); ++j) {
              CMatrix lhs = CMatrix::Zero(ctx.C_.dims.at_unit(X.s[gx1]),
                                          ctx.C_.dims.at_unit(X.s[x2]));
              for (int u = 0; u < ctx.dim(gx1); ++u) {
                lhs += std::conj(l1(u, i)) * t_lhs[static_cast<size_t>(u) * ctx.dim(x2) + j];
              }
              CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
              for (int u = 0; u < ctx.dim(ginvx2); ++u) {
                rhs += l2(u, j) * t_rhs[static_cast<size_t>(i) * ctx.dim(ginvx2) + u];
              }
              track_residual(fe2d0, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                             "left adjointability at " + tup({g, kb, x1, i, x2, j}));
            }
          }
        }
      }
    }
  }

  auto& fe2e = rep.add("FE2.e");
  // <m1,m2>_B <m3,m4>_B = <m1.<m2,m3>_C, m4>_B on s-compatible tuples with
  // q(m2) = q(m3).
  for (int x2 = 0; x2 < n; ++x2) {
    const int unit_s = X.s[x2];
    for (int x1 = 0; x1 < n; ++x1) {
      if (X.s[x1] != unit_s) continue;
      for (int x4 = 0; x4 < n; ++x4) {
        if (X.s[x4] != unit_s) continue;
        const auto& t12 = ctx.ipl(x1, x2);
        const auto& t24 = ctx.ipl(x2, x4);
        const auto& t14 = ctx.ipl(x1, x4);
        const auto& r22 = ctx.ipr(x2, x2);
        for (int j = 0; j < ctx.dim(x2); ++j) {
          for (int k = 0; k < ctx.dim(x2); ++k) {
            const CMatrix& d = r22[static_cast<size_t>(j) * ctx.dim(x2) + k];
            const CMatrix rm = ctx.m_.act_right_matrix(x1, d, unit_s, nullptr);
            for (int i = 0; i < ctx.dim(x1); ++i) {
              for (int l = 0; l < ctx.dim(x4); ++l) {
                const CMatrix lhs = t12[static_cast<size_t>(i) * ctx.dim(x2) + j] *
                                    t24[static_cast<size_t>(k) * ctx.dim(x4) + l];
                CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
                for (int u = 0; u < ctx.dim(x1); ++u) {
                  rhs += rm(u, i) * t14[static_cast<size_t>(u) * ctx.dim(x4) + l];
                }
                track_residual(fe2e, (lhs - rhs).norm(), tol * std::max(1.0, lhs.norm()),
                               "left FE2.e at " + tup({x1, i, x2, j, k, x4, l}));
              }
            }
          }
        }
      }
    }
  }
  // Mirrored identity for the right inner product on r-compatible tuples.
  for (int x2 = 0; x2 < n; ++x2) {
    const int unit_r = X.r[x2];
    for (int x1 = 0; x1 < n; ++x1) {
      if (X.r[x1] != unit_r) continue;
      for (int x4 = 0; x4 < n; ++x4) {
        if (X.r[x4] != unit_r) continue;
        const auto& t12 = ctx.ipr(x1, x2);
        const auto& t24 = ctx.ipr(x2, x4);
        const auto& t14 = ctx.ipr(x1, x4);
        const auto& l22 = ctx.ipl(x2, x2);
        for (int j = 0; j < ctx.dim(x2); ++j) {
          for (int k = 0; k < ctx.dim(x2); ++k) {
            const CMatrix& b = l22[static_cast<size_t>(j) * ctx.dim(x2) + k];
            const CMatrix lm = ctx.m_.act_left_matrix(b, unit_r, x4, nullptr);
            for (int i = 0; i < ctx.dim(x1); ++i) {
              for (int l = 0; l < ctx.dim(x4); ++l) {
                const CMatrix lhs = t12[static_cast<size_t>(i) * ctx.dim(x2) + j] *
                                    t24[static_cast<size_t>(k) * ctx.dim(x4) + l];
                CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
                for (int u = 0; u < ctx.dim(x4); ++u) {
                  rhs += lm(u, l) * t14[static_cast<size_t>(i) * ctx.dim(x4) + u];
                }
                track_residual(fe2e, (lhs - rhs).norm(), tol * std::max(1.0, lhs.norm()),
                               "right FE2.e at " + tup({x1, i, x2, j, k, x4, l}));
              }
            }
          }
        }
      }
    }
  }
}

void check_imprimitivity(FeContext& ctx, Report& rep) {
  const GroupoidBispace& X = ctx.X_;
  const double tol = ctx.opt_.tol;
  const int n = X.n_points;

  auto& psd = rep.add("FE3.positivity");
  auto& norms = rep.add("FE3.norm-coincidence");
  for (int x = 0; x < n; ++x) {
    const auto& tl = ctx.ipl(x, x);
    const auto& tr = ctx.ipr(x, x);
    for (int i = 0; i < ctx.dim(x); ++i) {
      const CMatrix& left_ip = tl[static_cast<size_t>(i) * ctx.dim(x) + i];
      const CMatrix& right_ip = tr[static_cast<size_t>(i) * ctx.dim(x) + i];
      if (!psd_check(left_ip, tol)) {
        fail_check(psd, "ip_left(e,e) not PSD at " + tup({x, i}),
                   std::max(0.0, -min_hermitian_eigenvalue(left_ip)));
      }
      if (!psd_check(right_ip, tol)) {
        fail_check(psd, "ip_right(e,e) not PSD at " + tup({x, i}),
                   std::max(0.0, -min_hermitian_eigenvalue(right_ip)));
      }
      const double nl = op_norm(left_ip);
      const double nr = op_norm(right_ip);
      track_residual(norms, std::abs(nl - nr), tol * std::max(1.0, nl),
                     "norm coincidence at " + tup({x, i}));
    }
  }

  auto& full_l = rep.add("FE3.fullness-left");
  auto& full_r = rep.add("FE3.fullness-right");
  for (int x = 0; x < n; ++x) {
    const MatrixSubspace& bu = ctx.B_.fibre(X.r[x]);
    const MatrixSubspace& cu = ctx.C_.fibre(X.s[x]);
    if (ctx.dim(x) == 0) {
      if (bu.dim() > 0) {
        fail_check(full_l, "zero fibre over point " + std::to_string(x) +
                               " cannot be full (structural)");
      }
      if (cu.dim() > 0) {
        fail_check(full_r, "zero fibre over point " + std::to_string(x) +
                               " cannot be full (structural)");
      }
      continue;
    }
    MatrixSubspace span_l = orthonormalize(bu.rows, bu.cols, ctx.ipl(x, x), tol);
    if (!subspace_equal(span_l, bu, tol)) {
      fail_check(full_l, "span ip_left(M_x,M_x) != B(r(x)) at point " + std::to_string(x) +
                             " (dims " + std::to_string(span_l.dim()) + " vs " +
                             std::to_string(bu.dim()) + ")");
    }
    MatrixSubspace span_r = orthonormalize(cu.rows, cu.cols, ctx.ipr(x, x), tol);
    if (!subspace_equal(span_r, cu, tol)) {
      fail_check(full_r, "span ip_right(M_x,M_x) != C(s(x)) at point " + std::to_string(x) +
                             " (dims " + std::to_string(span_r.dim()) + " vs " +
                             std::to_string(cu.dim()) + ")");
    }
  }

  // Unit-level compatibility <m1,m2>_B . m3 = m1 . <m2,m3>_C inside one
  // fibre; part of the fibrewise imprimitivity-bimodule structure.
  auto& compat = rep.add("FE3.compatibility");
  for (int x = 0; x < n; ++x) {
    const int ur = X.r[x];
    const int us = X.s[x];
    const auto& tl = ctx.ipl(x, x);
    const auto& tr = ctx.ipr(x, x);
    const int d = ctx.dim(x);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const CMatrix lm = ctx.m_.act_left_matrix(tl[static_cast<size_t>(i) * d + j], ur, x, nullptr);
        for (int k = 0; k < d; ++k) {
          const CMatrix rm = ctx.m_.act_right_matrix(x, tr[static_cast<size_t>(j) * d + k], us, nullptr);
          const CVector lhs = lm.col(k);
          const CVector rhs = rm.col(i);
          track_residual(compat, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                         "fibre compatibility at " + tup({x, i, j, k}));
        }
      }
    }
  }
}

void check_equivalence_extras(FeContext& ctx, Report& rep, bool as_info) {
  const GroupoidBispace& X = ctx.X_;
  const FiniteGroupoid& G = *X.left;
  const FiniteGroupoid& H = *X.right;
  const PreEquivalence& P = ctx.base_;
  const double tol = ctx.opt_.tol;
  const int n = X.n_points;

  auto& fe2d = rep.add(as_info ? "FE2.d.empirical" : "FE2.d",
                       as_info ? CheckKind::Info : CheckKind::Axiom);
  for (int x1 = 0; x1 < n; ++x1) {
    for (int x2 = 0; x2 < n; ++x2) {
      const int g = P.lamL(x1, x2);
      if (g < 0) continue;
      for (int x3 = 0; x3 < n; ++x3) {
        const int h = P.lamR(x2, x3);
        if (h < 0) continue;
        const int gx3 = X.act_left(g, x3);
        const int x1h = X.act_right(x1, h);
        if (gx3 < 0 || x1h < 0 || gx3 != x1h) {
          fail_check(fe2d, "target fibres of FE2.d disagree at " + tup({x1, x2, x3}));
          continue;
        }
        const auto& t12 = ctx.ipl(x1, x2);
        const auto& t23 = ctx.ipr(x2, x3);
        for (int i = 0; i < ctx.dim(x1); ++i) {
          for (int j = 0; j < ctx.dim(x2); ++j) {
            const CMatrix lm = ctx.m_.act_left_matrix(
                t12[static_cast<size_t>(i) * ctx.dim(x2) + j], g, x3, nullptr);
            for (int k = 0; k < ctx.dim(x3); ++k) {
              const CMatrix rm = ctx.m_.act_right_matrix(
                  x1, t23[static_cast<size_t>(j) * ctx.dim(x3) + k], h, nullptr);
              const CVector lhs = lm.col(k);
              const CVector rhs = rm.col(i);
              track_residual(fe2d, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                             "FE2.d at " + tup({x1, i, x2, j, x3, k}));
            }
          }
        }
      }
    }
  }
  if (as_info) {
    fe2d.note = fe2d.pass ? "FE2.d holds empirically on this instance"
                          : "FE2.d fails on this instance";
    return;
  }

  // Nondegeneracy: the stacked action of each Fell fibre is injective.
  auto& nondeg = rep.add("FE.nondegenerate");
  for (int g = 0; g < G.n_arrows; ++g) {
    const int dg = ctx.B_.fibre(g).dim();
    if (dg == 0) continue;
    Eigen::Index total = 0;
    for (int x = 0; x < n; ++x) {
      if (X.act_left(g, x) >= 0) {
        total += static_cast<Eigen::Index>(ctx.dim(X.act_left(g, x))) * ctx.dim(x);
      }
    }
    CMatrix stacked = CMatrix::Zero(std::max<Eigen::Index>(total, 1), dg);
    for (int k = 0; k < dg; ++k) {
      Eigen::Index at = 0;
      for (int x = 0; x < n; ++x) {
        if (X.act_left(g, x) < 0) continue;
        const CMatrix& a = ctx.lact(g, x, k);
        stacked.block(at, k, a.size(), 1) = Eigen::Map<const CVector>(a.data(), a.size());
        at += a.size();
      }
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    const auto& sv = svd.singularValues();
    const int rank = sv.size() == 0 ? 0
                                    : static_cast<int>((sv.array() > tol * std::max(1.0, sv(0))).count());
    if (rank != dg) {
      fail_check(nondeg, "left action of B-fibre " + std::to_string(g) +
                             " has rank " + std::to_string(rank) + " < " + std::to_string(dg));
    }
  }
  for (int h = 0; h < H.n_arrows; ++h) {
    const int dh = ctx.C_.fibre(h).dim();
    if (dh == 0) continue;
    Eigen::Index total = 0;
    for (int x = 0; x < n; ++x) {
      if (X.act_right(x, h) >= 0) {
        total += static_cast<Eigen::Index>(ctx.dim(X.act_right(x, h))) * ctx.dim(x);
      }
    }
    CMatrix stacked = CMatrix::Zero(std::max<Eigen::Index>(total, 1), dh);
    for (int k = 0; k < dh; ++k) {
      Eigen::Index at = 0;
      for (int x = 0; x < n; ++x) {
        if (X.act_right(x, h) < 0) continue;
        const CMatrix& a = ctx.ract(x, h, k);
        stacked.block(at, k, a.size(), 1) = Eigen::Map<const CVector>(a.data(), a.size());
        at += a.size();
      }
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    const auto& sv = svd.singularValues();
    const int rank = sv.size() == 0 ? 0
                                    : static_cast<int>((sv.array() > tol * std::max(1.0, sv(0))).count());
    if (rank != dh) {
      fail_check(nondeg, "right action of C-fibre " + std::to_string(h) +
                             " has rank " + std::to_string(rank) + " < " + std::to_string(dh));
    }
  }

  // Density: span(B_g . M_x) = M_{g.x} and span(M_x . C_h) = M_{x.h}.
  auto& density = rep.add("FE.density");
  for (int g = 0; g < G.n_arrows; ++g) {
    for (int x = 0; x < n; ++x) {
      const int gx = X.act_left(g, x);
      if (gx < 0) continue;
      const int dg = ctx.B_.fibre(g).dim();
      CMatrix stacked = CMatrix::Zero(std::max(ctx.dim(gx), 1),
                                      std::max(dg * ctx.dim(x), 1));
      for (int k = 0; k < dg; ++k) {
        stacked.block(0, k * ctx.dim(x), ctx.dim(gx), ctx.dim(x)) = ctx.lact(g, x, k);
      }
      Eigen::JacobiSVD<CMatrix> svd(stacked);
      const auto& sv = svd.singularValues();
      const int rank = sv.size() == 0 ? 0
                                      : static_cast<int>((sv.array() > tol * std::max(1.0, sv(0))).count());
      if (rank != ctx.dim(gx)) {
        fail_check(density, "span(B_g.M_x) has dim " + std::to_string(rank) + " < " +
                                std::to_string(ctx.dim(gx)) + " at " + tup({g, x}));
      }
    }
  }
  for (int h = 0; h < H.n_arrows; ++h) {
    for (int x = 0; x < n; ++x) {
      const int xh = X.act_right(x, h);
      if (xh < 0) continue;
      const int dh = ctx.C_.fibre(h).dim();
      CMatrix stacked = CMatrix::Zero(std::max(ctx.dim(xh), 1),
                                      std::max(dh * ctx.dim(x), 1));
      for (int k = 0; k < dh; ++k) {
        stacked.block(0, k * ctx.dim(x), ctx.dim(xh), ctx.dim(x)) = ctx.ract(x, h, k);
      }
      Eigen::JacobiSVD<CMatrix> svd(stacked);
      const auto& sv = svd.singularValues();
      const int rank = sv.size() == 0 ? 0
                                      : static_cast<int>((sv.array() > tol * std::max(1.0, sv(0))).count());
      if (rank != ctx.dim(xh)) {
        fail_check(density, "span(M_x.C_h) has dim " + std::to_string(rank) + " < " +
                                std::to_string(ctx.dim(xh)) + " at " + tup({x, h}));
      }
    }
  }
}

}  // namespace

Report verify_fell_action(const BimoduleBundle& m, const FeOptions& opt) {
  Report rep;
  rep.subject = "fell_action";
  FeContext ctx(m, opt);
  check_actions(ctx, rep);
  return rep;
}

Report verify_hypoequivalence(const BimoduleBundle& m, const FeOptions& opt) {
  Report rep;
  rep.subject = "hypoequivalence";
  FeContext ctx(m, opt);
  check_actions(ctx, rep);
  check_inner_products(ctx, rep, /*equivalence_level=*/false);
  check_imprimitivity(ctx, rep);
  if (m.base_is_equivalence()) {
    // The paper asserts FE2.d => FE2.d0 over equivalences; the converse is
    // only tested empirically and reported, never assumed.
    check_equivalence_extras(ctx, rep, /*as_info=*/true);
  }
  return rep;
}

Report verify_equivalence_bundle(const BimoduleBundle& m, const FeOptions& opt) {
  Report rep;
  rep.subject = "equivalence_bundle";
  auto& pre = rep.add("FE.base-is-equivalence", CheckKind::Structural);
  if (!m.base_is_equivalence()) {
    fail_check(pre, "base is a pre-equivalence, not a groupoid equivalence");
    return rep;
  }
  FeContext ctx(m, opt);
  check_actions(ctx, rep);
  check_inner_products(ctx, rep, /*equivalence_level=*/true);
  check_imprimitivity(ctx, rep);
  check_equivalence_extras(ctx, rep, /*as_info=*/false);
  auto& adj = rep.add("FE.adjointable", CheckKind::Info);
  adj.note = "FE2.d0 was verified directly above; with FE2.d it holds as the paper's adjointability corollary";
  return rep;
}

BundleSpace make_canonical_equivalence_bundle(const EquivalencePtr& base,
                                              const FellBundlePtr& left,
                                              const FellBundlePtr& right) {
  const GroupoidBispace& X = base->pre.space;
  std::vector<MatrixSubspace> fibres;
  fibres.reserve(static_cast<size_t>(X.n_points));
  for (int x = 0; x < X.n_points; ++x) {
    fibres.push_back(full_matrix_space(left->dims.at_unit(X.r[x]),
                                       right->dims.at_unit(X.s[x])));
  }
  return BundleSpace(nullptr, base, left, right, std::move(fibres));
}

BundleSpace identity_bundle(const FellBundlePtr& b) {
  auto base = std::make_shared<GroupoidEquivalence>(identity_equivalence(b->gpd));
  return BundleSpace(nullptr, base, b, b, b->fibres);
}

BundleSpace opposite_bundle(const BundleSpace& m) {
  const PreEquivalence& p = m.base();
  const GroupoidBispace& X = p.space;
  const FiniteGroupoid& G = *X.left;
  const FiniteGroupoid& H = *X.right;

  PreEquivalence op;
  op.space.left = X.right;
  op.space.right = X.left;
  op.space.n_points = X.n_points;
  op.space.r = X.s;
  op.space.s = X.r;
  op.space.allocate_tables();
  for (int h = 0; h < H.n_arrows; ++h) {
    for (int x = 0; x < X.n_points; ++x) {
      const int xh = X.act_right(x, H.inv[h]);
      if (xh >= 0) op.space.left_slot(h, x) = xh;
    }
  }
  for (int x = 0; x < X.n_points; ++x) {
    for (int g = 0; g < G.n_arrows; ++g) {
      const int gx = X.act_left(G.inv[g], x);
      if (gx >= 0) op.space.right_slot(x, g) = gx;
    }
  }
  op.lam_left = p.lam_right;
  op.lam_right = p.lam_left;

  std::vector<MatrixSubspace> fibres;
  fibres.reserve(static_cast<size_t>(X.n_points));
  for (int x = 0; x < X.n_points; ++x) {
    MatrixSubspace f;
    f.rows = m.fibre(x).cols;
    f.cols = m.fibre(x).rows;
    for (const CMatrix& e : m.fibre(x).basis) f.basis.push_back(e.adjoint());
    fibres.push_back(std::move(f));
  }

  EquivalencePtr op_eq;
  PreEquivalencePtr op_pre;
  if (m.base_is_equivalence()) {
    op_eq = std::make_shared<GroupoidEquivalence>(GroupoidEquivalence{std::move(op)});
  } else {
    op_pre = std::make_shared<PreEquivalence>(std::move(op));
  }
  return BundleSpace(op_pre, op_eq, m.right_fell(), m.left_fell(), std::move(fibres));
}

Report cauchy_schwarz_check(const BimoduleBundle& m, int samples,
                            std::uint64_t seed, double tol) {
  Report rep;
  rep.subject = "cauchy_schwarz";
  const PreEquivalence& p = m.base();
  const int n = p.space.n_points;

  std::vector<std::pair<int, int>> s_pairs, r_pairs;
  for (int x1 = 0; x1 < n; ++x1) {
    for (int x2 = 0; x2 < n; ++x2) {
      if (m.fibre_dim(x1) == 0 || m.fibre_dim(x2) == 0) continue;
      if (p.lamL(x1, x2) >= 0) s_pairs.emplace_back(x1, x2);
      if (p.lamR(x1, x2) >= 0) r_pairs.emplace_back(x1, x2);
    }
  }

  auto& left_law = rep.add("CS.left");
  auto& right_law = rep.add("CS.right");
  auto& norm_law = rep.add("CS.norm");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto rand_coords = [&](int x) {
    CVector v(m.fibre_dim(x));
    for (int i = 0; i < v.size(); ++i) v(i) = Complex(dist(rng), dist(rng));
    return v;
  };

  for (int t = 0; t < samples && !s_pairs.empty(); ++t) {
    const auto [x1, x2] = s_pairs[rng() % s_pairs.size()];
    const CVector v1 = rand_coords(x1);
    const CVector v2 = rand_coords(x2);
    const CMatrix ip12 = m.inner_left(x1, v1, x2, v2);
    const CMatrix ip11 = m.inner_left(x1, v1, x1, v1);
    const double norm2 = m.module_norm(x2, v2);
    const CMatrix slack = norm2 * norm2 * ip11 - ip12 * ip12.adjoint();
    const double mineig = min_hermitian_eigenvalue(slack);
    track_residual(left_law, std::max(0.0, -mineig), tol * std::max(1.0, norm2 * norm2),
                   "left CS at pair " + tup({x1, x2}));
    const double bound = m.module_norm(x1, v1) * norm2;
    track_residual(norm_law, std::max(0.0, op_norm(ip12) - bound),
                   tol * std::max(1.0, bound), "norm corollary at pair " + tup({x1, x2}));
  }
  for (int t = 0; t < samples && !r_pairs.empty(); ++t) {
    const auto [x1, x2] = r_pairs[rng() % r_pairs.size()];
    const CVector v1 = rand_coords(x1);
    const CVector v2 = rand_coords(x2);
    const CMatrix ip12 = m.inner_right(x1, v1, x2, v2);
    const CMatrix ip22 = m.inner_right(x2, v2, x2, v2);
    const double norm1 = m.module_norm(x1, v1);
    const CMatrix slack = norm1 * norm1 * ip22 - ip12.adjoint() * ip12;
    const double mineig = min_hermitian_eigenvalue(slack);
    track_residual(right_law, std::max(0.0, -mineig), tol * std::max(1.0, norm1 * norm1),
                   "right CS at pair " + tup({x1, x2}));
  }
  return rep;
}

Report nontriviality_check(const FellBundle& b, const BimoduleBundle& m,
                           double tol) {
  Report rep;
  rep.subject = "nontriviality";
  const PreEquivalence& p = m.base();
  const GroupoidBispace& X = p.space;
  auto& law = rep.add("nontrivial-action");
  if (b.gpd.get() != X.left.get()) {
    auto& st = rep.add("structure", CheckKind::Structural);
    fail_check(st, "bundle is not the left Fell bundle of the bimodule base");
    return rep;
  }
  for (int g = 0; g < b.gpd->n_arrows; ++g) {
    for (int k = 0; k < b.fibre(g).dim(); ++k) {
      bool moved = false;
      for (int x = 0; x < X.n_points && !moved; ++x) {
        if (X.act_left(g, x) < 0) continue;
        const CMatrix& act = m.act_left_matrix(b.fibre(g).basis[static_cast<size_t>(k)], g, x, nullptr);
        for (int i = 0; i < m.fibre_dim(x); ++i) {
          CVector e = CVector::Zero(m.fibre_dim(x));
          e(i) = 1.0;
          if (m.module_norm(X.act_left(g, x), act * e) > tol) {
            moved = true;
            break;
          }
        }
      }
      if (!moved) {
        fail_check(law, "B-basis " + tup({g, k}) + " annihilates every compatible fibre");
      }
    }
  }
  return rep;
}

}  // namespace morita
