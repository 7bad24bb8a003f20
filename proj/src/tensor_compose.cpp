#include "morita/tensor_compose.hpp"

#include <Eigen/SVD>

#include <array>
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

int svd_rank(const CMatrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  return static_cast<int>((sv.array() > tol * std::max(1.0, sv(0))).count());
}

CMatrix pseudo_inverse(const CMatrix& a, double tol) {
  if (a.size() == 0) return CMatrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  CVector inv_sv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    inv_sv(i) = sv(i) > cutoff ? Complex(1.0 / sv(i), 0.0) : Complex(0.0, 0.0);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace

TensorBundle::TensorBundle(BimodulePtr m, BimodulePtr n, double tol, int jobs)
    : m_(std::move(m)), n_(std::move(n)), tol_(tol) {
  if (m_->right_fell().get() != n_->left_fell().get()) {
    throw std::invalid_argument("TensorBundle: middle Fell bundle mismatch");
  }
  base_ = std::make_shared<PreEquivalence>(
      fibre_product_preequiv(m_->base(), n_->base()));

  const GroupoidBispace& X = m_->base().space;
  const GroupoidBispace& Y = n_->base().space;
  zindex_.assign(static_cast<size_t>(X.n_points) * Y.n_points, -1);
  for (int x = 0; x < X.n_points; ++x) {
    for (int y = 0; y < Y.n_points; ++y) {
      if (X.s[x] == Y.r[y]) {
        zindex_[static_cast<size_t>(x) * Y.n_points + y] = static_cast<int>(px_.size());
        px_.push_back(x);
        py_.push_back(y);
      }
    }
  }
  if (static_cast<int>(px_.size()) != base_->space.n_points) {
    throw std::logic_error("TensorBundle: point indexing out of sync with fibre product");
  }

  fibres_.resize(px_.size());
  parallel_for(static_cast<int>(px_.size()), jobs,
               [this](int z) { fibres_[static_cast<size_t>(z)] = build_fibre(z); });
}

int TensorBundle::point_of(int x, int y) const {
  return zindex_[static_cast<size_t>(x) * n_->base().space.n_points + y];
}

int TensorBundle::t_map(int z) const {
  return m_->base().space.s[px_[static_cast<size_t>(z)]];
}

TensorFibre TensorBundle::build_fibre(int z) const {
  TensorFibre f;
  f.z = z;
  f.x = px_[static_cast<size_t>(z)];
  f.y = py_[static_cast<size_t>(z)];
  const int dm = m_->fibre_dim(f.x);
  const int dn = n_->fibre_dim(f.y);
  f.n_gen = dm * dn;

  const std::vector<CMatrix>& right_tab = gen_ipr(z, z);
  const std::vector<CMatrix>& left_tab = gen_ipl(z, z);
  f.gram = CMatrix::Zero(f.n_gen, f.n_gen);
  CMatrix gram_left = CMatrix::Zero(f.n_gen, f.n_gen);
  for (int a = 0; a < f.n_gen; ++a) {
    for (int b = 0; b < f.n_gen; ++b) {
      f.gram(a, b) = right_tab[static_cast<size_t>(a) * f.n_gen + b].trace();
      gram_left(a, b) = left_tab[static_cast<size_t>(b) * f.n_gen + a].trace();
    }
  }
  // The two scalarizations agree by trace cyclicity; the right one is
  // canonical, the left one is the cross-check.
  f.gram_cross_residual = f.n_gen == 0 ? 0.0 : (f.gram - gram_left).cwiseAbs().maxCoeff();
  f.q = gram_quotient(GramData{f.gram, tol_});
  return f;
}

const std::vector<CMatrix>& TensorBundle::gen_ipl(int z1, int z2) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = gen_ipl_cache_.find({z1, z2});
    if (it != gen_ipl_cache_.end()) return it->second;
  }
  const int x1 = px_[static_cast<size_t>(z1)], y1 = py_[static_cast<size_t>(z1)];
  const int x2 = px_[static_cast<size_t>(z2)], y2 = py_[static_cast<size_t>(z2)];
  const GroupoidBispace& X = m_->base().space;
  const int dm1 = m_->fibre_dim(x1), dn1 = n_->fibre_dim(y1);
  const int dm2 = m_->fibre_dim(x2), dn2 = n_->fibre_dim(y2);
  const int nge1 = dm1 * dn1, nge2 = dm2 * dn2;

  // <m (x) n, m' (x) n'>_B = <m, m' . <n', n>_C>_B
  const int hl = n_->base().lamL(y2, y1);
  if (hl < 0) throw std::invalid_argument("gen_ipl: points are not s-compatible");
  const int x2h = X.act_right(x2, hl);
  const std::vector<CMatrix> tab_c = n_->inner_left_table(y2, y1);
  const std::vector<CMatrix> tab_m = m_->inner_left_table(x1, x2h);
  const int dm2h = m_->fibre_dim(x2h);
  const Eigen::Index rows = left_fell()->dims.at_unit(X.r[x1]);
  const Eigen::Index cols = left_fell()->dims.at_unit(X.r[x2]);

  std::vector<CMatrix> out(static_cast<size_t>(nge1) * nge2,
                           CMatrix::Zero(rows, cols));
  for (int l = 0; l < dn2; ++l) {
    for (int j = 0; j < dn1; ++j) {
      const CMatrix& c = tab_c[static_cast<size_t>(l) * dn1 + j];
      const CMatrix v = m_->act_right_matrix(x2, c, hl, nullptr);
      for (int i = 0; i < dm1; ++i) {
        for (int k = 0; k < dm2; ++k) {
          CMatrix val = CMatrix::Zero(rows, cols);
          for (int u = 0; u < dm2h; ++u) {
            val += std::conj(v(u, k)) * tab_m[static_cast<size_t>(i) * dm2h + u];
          }
          out[static_cast<size_t>(i * dn1 + j) * nge2 + (k * dn2 + l)] = std::move(val);
        }
      }
    }
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return gen_ipl_cache_.emplace(std::make_pair(z1, z2), std::move(out)).first->second;
}

const std::vector<CMatrix>& TensorBundle::gen_ipr(int z1, int z2) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = gen_ipr_cache_.find({z1, z2});
    if (it != gen_ipr_cache_.end()) return it->second;
  }
  const int x1 = px_[static_cast<size_t>(z1)], y1 = py_[static_cast<size_t>(z1)];
  const int x2 = px_[static_cast<size_t>(z2)], y2 = py_[static_cast<size_t>(z2)];
  const GroupoidBispace& Y = n_->base().space;
  const int dm1 = m_->fibre_dim(x1), dn1 = n_->fibre_dim(y1);
  const int dm2 = m_->fibre_dim(x2), dn2 = n_->fibre_dim(y2);
  const int nge1 = dm1 * dn1, nge2 = dm2 * dn2;

  // <m (x) n, m' (x) n'>_D = <<m', m>_C . n, n'>_D
  const int hr = m_->base().lamR(x2, x1);
  if (hr < 0) throw std::invalid_argument("gen_ipr: points are not r-compatible");
  const int hy1 = Y.act_left(hr, y1);
  const std::vector<CMatrix> tab_c = m_->inner_right_table(x2, x1);
  const std::vector<CMatrix> tab_n = n_->inner_right_table(hy1, y2);
  const int dnh = n_->fibre_dim(hy1);
  const Eigen::Index rows = right_fell()->dims.at_unit(Y.s[y1]);
  const Eigen::Index cols = right_fell()->dims.at_unit(Y.s[y2]);

  std::vector<CMatrix> out(static_cast<size_t>(nge1) * nge2,
                           CMatrix::Zero(rows, cols));
  for (int k = 0; k < dm2; ++k) {
    for (int i = 0; i < dm1; ++i) {
      const CMatrix& c = tab_c[static_cast<size_t>(k) * dm1 + i];
      const CMatrix w = n_->act_left_matrix(c, hr, y1, nullptr);
      for (int j = 0; j < dn1; ++j) {
        for (int l = 0; l < dn2; ++l) {
          CMatrix val = CMatrix::Zero(rows, cols);
          for (int u = 0; u < dnh; ++u) {
            val += std::conj(w(u, j)) * tab_n[static_cast<size_t>(u) * dn2 + l];
          }
          out[static_cast<size_t>(i * dn1 + j) * nge2 + (k * dn2 + l)] = std::move(val);
        }
      }
    }
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return gen_ipr_cache_.emplace(std::make_pair(z1, z2), std::move(out)).first->second;
}

CVector TensorBundle::elementary(int z, const CVector& mcoords,
                                 const CVector& ncoords) const {
  const TensorFibre& f = fibres_[static_cast<size_t>(z)];
  const int dn = n_->fibre_dim(f.y);
  CVector w = CVector::Zero(f.n_gen);
  for (int i = 0; i < mcoords.size(); ++i) {
    for (int j = 0; j < dn; ++j) {
      w(i * dn + j) = mcoords(i) * ncoords(j);
    }
  }
  return f.q.coeff_map * w;
}

CMatrix TensorBundle::act_left_matrix(const CMatrix& b, int g, int z,
                                      double* residual) const {
  const TensorFibre& src = fibres_[static_cast<size_t>(z)];
  const GroupoidBispace& X = m_->base().space;
  const int gx = X.act_left(g, src.x);
  if (gx < 0) throw std::invalid_argument("TensorBundle::act_left: not admissible");
  const int zd = point_of(gx, src.y);
  const TensorFibre& dst = fibres_[static_cast<size_t>(zd)];
  double res = 0.0;
  const CMatrix a = m_->act_left_matrix(b, g, src.x, &res);
  if (residual != nullptr) *residual = res;

  const int dn = n_->fibre_dim(src.y);
  const int dmd = m_->fibre_dim(gx);
  CMatrix gen_map = CMatrix::Zero(dst.dim(), src.n_gen);
  for (int i = 0; i < m_->fibre_dim(src.x); ++i) {
    for (int u = 0; u < dmd; ++u) {
      if (a(u, i) == Complex(0, 0)) continue;
      for (int j = 0; j < dn; ++j) {
        gen_map.col(i * dn + j) += a(u, i) * dst.q.coeff_map.col(u * dn + j);
      }
    }
  }
  return gen_map * src.q.lift;
}

CMatrix TensorBundle::act_right_matrix(int z, const CMatrix& d, int k,
                                       double* residual) const {
  const TensorFibre& src = fibres_[static_cast<size_t>(z)];
  const GroupoidBispace& Y = n_->base().space;
  const int yk = Y.act_right(src.y, k);
  if (yk < 0) throw std::invalid_argument("TensorBundle::act_right: not admissible");
  const int zd = point_of(src.x, yk);
  const TensorFibre& dst = fibres_[static_cast<size_t>(zd)];
  double res = 0.0;
  const CMatrix a = n_->act_right_matrix(src.y, d, k, &res);
  if (residual != nullptr) *residual = res;

  const int dn = n_->fibre_dim(src.y);
  const int dnd = n_->fibre_dim(yk);
  CMatrix gen_map = CMatrix::Zero(dst.dim(), src.n_gen);
  for (int j = 0; j < dn; ++j) {
    for (int u = 0; u < dnd; ++u) {
      if (a(u, j) == Complex(0, 0)) continue;
      for (int i = 0; i < m_->fibre_dim(src.x); ++i) {
        gen_map.col(i * dn + j) += a(u, j) * dst.q.coeff_map.col(i * dnd + u);
      }
    }
  }
  return gen_map * src.q.lift;
}

std::vector<CMatrix> TensorBundle::inner_left_table(int z1, int z2) const {
  const TensorFibre& f1 = fibres_[static_cast<size_t>(z1)];
  const TensorFibre& f2 = fibres_[static_cast<size_t>(z2)];
  const std::vector<CMatrix>& gen = gen_ipl(z1, z2);
  const Eigen::Index rows = gen.empty() ? left_fell()->dims.at_unit(base().space.r[z1]) : gen.front().rows();
  const Eigen::Index cols = gen.empty() ? left_fell()->dims.at_unit(base().space.r[z2]) : gen.front().cols();
  std::vector<CMatrix> out(static_cast<size_t>(f1.dim()) * f2.dim(),
                           CMatrix::Zero(rows, cols));
  if (f1.dim() == 0 || f2.dim() == 0) return out;
  CMatrix s(f1.n_gen, f2.n_gen);
  for (Eigen::Index p = 0; p < rows; ++p) {
    for (Eigen::Index qq = 0; qq < cols; ++qq) {
      for (int a = 0; a < f1.n_gen; ++a) {
        for (int b = 0; b < f2.n_gen; ++b) {
          s(a, b) = gen[static_cast<size_t>(a) * f2.n_gen + b](p, qq);
        }
      }
      const CMatrix t = f1.q.lift.transpose() * s * f2.q.lift.conjugate();
      for (int i = 0; i < f1.dim(); ++i) {
        for (int j = 0; j < f2.dim(); ++j) {
          out[static_cast<size_t>(i) * f2.dim() + j](p, qq) = t(i, j);
        }
      }
    }
  }
  return out;
}

std::vector<CMatrix> TensorBundle::inner_right_table(int z1, int z2) const {
  const TensorFibre& f1 = fibres_[static_cast<size_t>(z1)];
  const TensorFibre& f2 = fibres_[static_cast<size_t>(z2)];
  const std::vector<CMatrix>& gen = gen_ipr(z1, z2);
  const Eigen::Index rows = gen.empty() ? right_fell()->dims.at_unit(base().space.s[z1]) : gen.front().rows();
  const Eigen::Index cols = gen.empty() ? right_fell()->dims.at_unit(base().space.s[z2]) : gen.front().cols();
  std::vector<CMatrix> out(static_cast<size_t>(f1.dim()) * f2.dim(),
                           CMatrix::Zero(rows, cols));
  if (f1.dim() == 0 || f2.dim() == 0) return out;
  CMatrix s(f1.n_gen, f2.n_gen);
  for (Eigen::Index p = 0; p < rows; ++p) {
    for (Eigen::Index qq = 0; qq < cols; ++qq) {
      for (int a = 0; a < f1.n_gen; ++a) {
        for (int b = 0; b < f2.n_gen; ++b) {
          s(a, b) = gen[static_cast<size_t>(a) * f2.n_gen + b](p, qq);
        }
      }
      const CMatrix t = f1.q.lift.adjoint() * s * f2.q.lift;
      for (int i = 0; i < f1.dim(); ++i) {
        for (int j = 0; j < f2.dim(); ++j) {
          out[static_cast<size_t>(i) * f2.dim() + j](p, qq) = t(i, j);
        }
      }
    }
  }
  return out;
}

CMatrix TensorBundle::realize(int z, const CVector& coords) const {
  const TensorFibre& f = fibres_[static_cast<size_t>(z)];
  const int dm = m_->fibre_dim(f.x);
  const int dn = n_->fibre_dim(f.y);
  std::vector<CMatrix> rm, rn;
  rm.reserve(static_cast<size_t>(dm));
  rn.reserve(static_cast<size_t>(dn));
  for (int i = 0; i < dm; ++i) {
    CVector e = CVector::Zero(dm);
    e(i) = 1.0;
    rm.push_back(m_->realize(f.x, e));
  }
  for (int j = 0; j < dn; ++j) {
    CVector e = CVector::Zero(dn);
    e(j) = 1.0;
    rn.push_back(n_->realize(f.y, e));
  }
  const CVector w = f.q.lift * coords;
  const Eigen::Index rows = left_fell()->dims.at_unit(base().space.r[z]);
  const Eigen::Index cols = right_fell()->dims.at_unit(base().space.s[z]);
  CMatrix out = CMatrix::Zero(rows, cols);
  for (int i = 0; i < dm; ++i) {
    for (int j = 0; j < dn; ++j) {
      out += w(i * dn + j) * (rm[static_cast<size_t>(i)] * rn[static_cast<size_t>(j)]);
    }
  }
  return out;
}

PsiMap build_psi(const TensorBundle& k, int h, int z_src, double tol) {
  const BimoduleBundle& M = k.left_factor();
  const BimoduleBundle& N = k.right_factor();
  const GroupoidBispace& X = M.base().space;
  const GroupoidBispace& Y = N.base().space;
  const FiniteGroupoid& H = *X.right;
  const FellBundle& C = *k.middle_fell();

  PsiMap out;
  out.h = h;
  out.z_src = z_src;
  if (H.src[h] != k.t_map(z_src)) {
    throw std::invalid_argument("build_psi: s_H(h) != t(z)");
  }
  const int xs = k.point_x(z_src);
  const int ys = k.point_y(z_src);
  const int xd = X.act_right(xs, H.inv[h]);
  const int yd = Y.act_left(h, ys);
  out.z_dst = k.point_of(xd, yd);

  const TensorFibre& src = k.tensor_fibre(z_src);
  const TensorFibre& dst = k.tensor_fibre(out.z_dst);
  const int dmd = M.fibre_dim(xd);
  const int dc = C.fibre(h).dim();
  const int dns = N.fibre_dim(ys);
  const int dnd = N.fibre_dim(yd);
  const int n_triple = dmd * dc * dns;

  CMatrix phi1 = CMatrix::Zero(src.dim(), std::max(n_triple, 0));
  CMatrix phi2 = CMatrix::Zero(dst.dim(), std::max(n_triple, 0));
  for (int kc = 0; kc < dc; ++kc) {
    const CMatrix& c = C.fibre(h).basis[static_cast<size_t>(kc)];
    const CMatrix v = M.act_right_matrix(xd, c, h, nullptr);    // M(x_d) -> M(x_s)
    const CMatrix w = N.act_left_matrix(c, h, ys, nullptr);     // N(y_s) -> N(y_d)
    for (int i = 0; i < dmd; ++i) {
      // (m_i . c) (x) n_j in the source fibre
      for (int j = 0; j < dns; ++j) {
        const int col = (i * dc + kc) * dns + j;
        CVector nc = CVector::Zero(dns);
        nc(j) = 1.0;
        phi1.col(col) = k.elementary(z_src, v.col(i), nc);
        // m_i (x) (c . n_j) in the destination fibre
        CVector mc = CVector::Zero(dmd);
        mc(i) = 1.0;
        phi2.col(col) = k.elementary(out.z_dst, mc, w.col(j));
      }
    }
  }

  const int rank1 = svd_rank(phi1, tol);
  const int rank2 = svd_rank(phi2, tol);
  out.null_dim_src = n_triple - rank1;
  out.null_dim_dst = n_triple - rank2;
  out.rank_match = (rank1 == src.dim() && rank2 == dst.dim() && src.dim() == dst.dim());

  out.matrix = phi2 * pseudo_inverse(phi1, tol);
  const double scale1 = std::max(1.0, phi1.norm());
  const double scale2 = std::max(1.0, phi2.norm());
  const double fwd = (out.matrix * phi1 - phi2).norm() / scale2;
  const CMatrix back = phi1 * pseudo_inverse(phi2, tol);
  const double bwd = (back * phi2 - phi1).norm() / scale1;
  out.well_def_residual = std::max(fwd, bwd);
  if (out.matrix.rows() == out.matrix.cols() && out.matrix.rows() > 0) {
    out.unitary_residual = (out.matrix.adjoint() * out.matrix -
                            CMatrix::Identity(out.matrix.cols(), out.matrix.cols()))
                               .norm();
  } else if (out.matrix.size() != 0) {
    out.unitary_residual = 1.0;  // non-square: dimension mismatch
  }
  return out;
}

const PsiMap& PsiFamily::at(int h, int z_src) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find({h, z_src});
  if (it == cache_.end()) {
    it = cache_.emplace(std::make_pair(h, z_src), build_psi(*k_, h, z_src, tol_)).first;
  }
  return it->second;
}

std::vector<std::pair<int, int>> PsiFamily::admissible() const {
  std::vector<std::pair<int, int>> out;
  const FiniteGroupoid& H = *k_->left_factor().base().space.right;
  for (int h = 0; h < H.n_arrows; ++h) {
    for (int z = 0; z < k_->n_points(); ++z) {
      if (H.src[h] == k_->t_map(z)) out.emplace_back(h, z);
    }
  }
  return out;
}

int PsiFamily::dst_point(int h, int z_src) const {
  const GroupoidBispace& X = k_->left_factor().base().space;
  const GroupoidBispace& Y = k_->right_factor().base().space;
  const FiniteGroupoid& H = *X.right;
  const int xd = X.act_right(k_->point_x(z_src), H.inv[h]);
  const int yd = Y.act_left(h, k_->point_y(z_src));
  return k_->point_of(xd, yd);
}

Report verify_hypoequiv_K(const TensorBundle& k, const FeOptions& opt) {
  Report rep = verify_hypoequivalence(k, opt);
  rep.subject = "tensor_bundle";

  auto& cross = rep.add("K.gram-cross-check");
  for (int z = 0; z < k.n_points(); ++z) {
    track_residual(cross, k.tensor_fibre(z).gram_cross_residual, opt.tol,
                   "left/right scalarized Grams differ at fibre " + std::to_string(z));
  }

  auto& balance = rep.add("K.balancing");
  const FellBundle& C = *k.middle_fell();
  const BimoduleBundle& M = k.left_factor();
  const BimoduleBundle& N = k.right_factor();
  for (int z = 0; z < k.n_points(); ++z) {
    const int x = k.point_x(z);
    const int y = k.point_y(z);
    const int u = k.t_map(z);
    const int dm = M.fibre_dim(x);
    const int dn = N.fibre_dim(y);
    for (int kc = 0; kc < C.fibre(u).dim(); ++kc) {
      const CMatrix& c = C.fibre(u).basis[static_cast<size_t>(kc)];
      const CMatrix v = M.act_right_matrix(x, c, u, nullptr);
      const CMatrix w = N.act_left_matrix(c, u, y, nullptr);
      for (int i = 0; i < dm; ++i) {
        CVector ei = CVector::Zero(dm);
        ei(i) = 1.0;
        for (int j = 0; j < dn; ++j) {
          CVector ej = CVector::Zero(dn);
          ej(j) = 1.0;
          const CVector lhs = k.elementary(z, v.col(i), ej);
          const CVector rhs = k.elementary(z, ei, w.col(j));
          track_residual(balance, (lhs - rhs).norm(), opt.tol * std::max(1.0, rhs.norm()),
                         "balancing at " + tup({z, kc, i, j}));
        }
      }
    }
  }
  return rep;
}

Report cauchy_schwarz_K(const TensorBundle& k, int samples, std::uint64_t seed,
                        double tol) {
  Report rep = cauchy_schwarz_check(k, samples, seed, tol);
  rep.subject = "cauchy_schwarz_K";
  return rep;
}

Report verify_psi_properties(const PsiFamily& psi, const FeOptions& opt) {
  Report rep;
  rep.subject = "psi_family";
  const TensorBundle& k = psi.bundle();
  const GroupoidBispace& X = k.left_factor().base().space;
  const FiniteGroupoid& H = *X.right;
  const FiniteGroupoid& G = *X.left;
  const FiniteGroupoid& Kgpd = *k.right_factor().base().space.right;
  const FellBundle& B = *k.left_fell();
  const FellBundle& D = *k.right_fell();
  const double tol = opt.tol;

  const auto adm = psi.admissible();

  auto& well = rep.add("Psi.well-defined");
  auto& unitary = rep.add("Psi.unitary");
  for (const auto& [h, z] : adm) {
    const PsiMap& p = psi.at(h, z);
    if (!p.rank_match) {
      fail_check(well, "rank/dimension mismatch at (h,z)=" + tup({h, z}) +
                           " null dims " + std::to_string(p.null_dim_src) + "," +
                           std::to_string(p.null_dim_dst));
    }
    track_residual(well, p.well_def_residual, tol, "kernel mismatch at (h,z)=" + tup({h, z}));
    track_residual(unitary, p.unitary_residual, tol, "Psi not unitary at (h,z)=" + tup({h, z}));
  }

  auto& psi3 = rep.add("Psi3.units");
  for (const auto& [h, z] : adm) {
    if (!H.is_unit[h]) continue;
    const PsiMap& p = psi.at(h, z);
    const int d = k.fibre_dim(z);
    track_residual(psi3, (p.matrix - CMatrix::Identity(d, d)).norm(), tol,
                   "Psi at unit " + std::to_string(h) + " is not the identity on fibre " +
                       std::to_string(z));
  }

  auto& psi4 = rep.add("Psi4.inverse");
  for (const auto& [h, z] : adm) {
    const PsiMap& p = psi.at(h, z);
    const PsiMap& q = psi.at(H.inv[h], p.z_dst);
    const int d = k.fibre_dim(z);
    track_residual(psi4, (q.matrix * p.matrix - CMatrix::Identity(d, d)).norm(), tol,
                   "Psi_{h^{-1}} Psi_h != id at (h,z)=" + tup({h, z}));
  }

  auto& psi2 = rep.add("Psi2.cocycle");
  for (int h2 = 0; h2 < H.n_arrows; ++h2) {
    for (int h1 = 0; h1 < H.n_arrows; ++h1) {
      const int h21 = H.compose(h2, h1);
      if (h21 < 0) continue;
      for (int z = 0; z < k.n_points(); ++z) {
        if (k.t_map(z) != H.src[h1]) continue;
        const PsiMap& p1 = psi.at(h1, z);
        const PsiMap& p2 = psi.at(h2, p1.z_dst);
        const PsiMap& p21 = psi.at(h21, z);
        track_residual(psi2, (p2.matrix * p1.matrix - p21.matrix).norm(),
                       tol * std::max(1.0, p21.matrix.norm()),
                       "cocycle fails at " + tup({h2, h1, z}));
      }
    }
  }

  auto& psi5 = rep.add("Psi5.biequivariance");
  // Left equivariance: Psi_h(b . xi) = b . Psi_h(xi); mirrored on the right.
  for (const auto& [h, z] : adm) {
    const PsiMap& p = psi.at(h, z);
    const int rz = k.base().space.r[z];
    for (int g = 0; g < G.n_arrows; ++g) {
      if (G.src[g] != rz) continue;
      const int gz = k.base().space.act_left(g, z);
      const int gzd = k.base().space.act_left(g, p.z_dst);
      const PsiMap& pg = psi.at(h, gz);
      for (int kb = 0; kb < B.fibre(g).dim(); ++kb) {
        const CMatrix& bmat = B.fibre(g).basis[static_cast<size_t>(kb)];
        const CMatrix lhs = pg.matrix * k.act_left_matrix(bmat, g, z, nullptr);
        const CMatrix rhs = k.act_left_matrix(bmat, g, p.z_dst, nullptr) * p.matrix;
        if (pg.z_dst != gzd) {
          fail_check(psi5, "Psi destination does not commute with the left action at " + tup({h, z, g}));
          continue;
        }
        track_residual(psi5, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                       "left bi-equivariance at " + tup({h, z, g, kb}));
      }
    }
    // Right equivariance: Psi_h(xi . d) = Psi_h(xi) . d.
    const int sz = k.base().space.s[z];
    for (int kk = 0; kk < Kgpd.n_arrows; ++kk) {
      if (Kgpd.rng[kk] != sz) continue;
      const int zk = k.base().space.act_right(z, kk);
      const int zdk = k.base().space.act_right(p.z_dst, kk);
      const PsiMap& pk = psi.at(h, zk);
      for (int kd = 0; kd < D.fibre(kk).dim(); ++kd) {
        const CMatrix& dmat = D.fibre(kk).basis[static_cast<size_t>(kd)];
        const CMatrix lhs = pk.matrix * k.act_right_matrix(z, dmat, kk, nullptr);
        const CMatrix rhs = k.act_right_matrix(p.z_dst, dmat, kk, nullptr) * p.matrix;
        if (pk.z_dst != zdk) {
          fail_check(psi5, "Psi destination does not commute with the right action at " + tup({h, z, kk}));
          continue;
        }
        track_residual(psi5, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                       "right bi-equivariance at " + tup({h, z, kk, kd}));
      }
    }
  }

  return rep;
}

Realization realize_as_products(const TensorBundle& k, int z) {
  const TensorFibre& f = k.tensor_fibre(z);
  const BimoduleBundle& M = k.left_factor();
  const BimoduleBundle& N = k.right_factor();
  const int dm = M.fibre_dim(f.x);
  const int dn = N.fibre_dim(f.y);

  std::vector<CMatrix> gens;
  gens.reserve(static_cast<size_t>(f.n_gen));
  for (int i = 0; i < dm; ++i) {
    CVector ei = CVector::Zero(dm);
    ei(i) = 1.0;
    const CMatrix rm = M.realize(f.x, ei);
    for (int j = 0; j < dn; ++j) {
      CVector ej = CVector::Zero(dn);
      ej(j) = 1.0;
      gens.push_back(rm * N.realize(f.y, ej));
    }
  }

  Realization out;
  const Eigen::Index rows = k.left_fell()->dims.at_unit(k.base().space.r[z]);
  const Eigen::Index cols = k.right_fell()->dims.at_unit(k.base().space.s[z]);
  out.span = orthonormalize(rows, cols, gens, k.tol());
  out.dim_match = (out.span.dim() == f.dim());

  CMatrix realized_gram(f.n_gen, f.n_gen);
  for (int a = 0; a < f.n_gen; ++a) {
    for (int b = 0; b < f.n_gen; ++b) {
      // tr(G_a^* G_b), matching the right-scalarized abstract Gram.
      realized_gram(a, b) = hs_inner(gens[static_cast<size_t>(b)], gens[static_cast<size_t>(a)]);
    }
  }
  out.gram_residual = f.n_gen == 0 ? 0.0 : (realized_gram - f.gram).cwiseAbs().maxCoeff();

  CMatrix xi(out.span.dim(), f.n_gen);
  for (int a = 0; a < f.n_gen; ++a) {
    xi.col(a) = least_squares_expand(out.span, gens[static_cast<size_t>(a)], nullptr);
  }
  out.intertwiner = xi * f.q.lift;
  if (out.intertwiner.cols() > 0) {
    out.isometry_residual = (out.intertwiner.adjoint() * out.intertwiner -
                             CMatrix::Identity(f.dim(), f.dim()))
                                .norm();
  }
  return out;
}

Report oracle_check(const TensorBundle& k, double tol_gram) {
  Report rep;
  rep.subject = "oracle";
  auto& gram = rep.add("oracle.gram-agreement");
  auto& dims = rep.add("oracle.dimension");
  auto& isometry = rep.add("oracle.isometry");
  for (int z = 0; z < k.n_points(); ++z) {
    const Realization r = realize_as_products(k, z);
    track_residual(gram, r.gram_residual, tol_gram, "abstract vs realized Gram at fibre " + std::to_string(z));
    if (!r.dim_match) {
      fail_check(dims, "quotient dim " + std::to_string(k.tensor_fibre(z).dim()) +
                           " != realized span dim " + std::to_string(r.span.dim()) +
                           " at fibre " + std::to_string(z));
    }
    track_residual(isometry, r.isometry_residual, 1e-9,
                   "intertwiner not isometric at fibre " + std::to_string(z));
  }
  return rep;
}

Report associativity_check(const BimodulePtr& l, const BimodulePtr& m,
                           const BimodulePtr& n, const FeOptions& opt) {
  Report rep;
  rep.subject = "associativity";

  auto klm = std::make_shared<TensorBundle>(l, m, opt.tol, opt.jobs);
  auto kmn = std::make_shared<TensorBundle>(m, n, opt.tol, opt.jobs);
  TensorBundle k1(klm, n, opt.tol, opt.jobs);
  TensorBundle k2(l, kmn, opt.tol, opt.jobs);

  auto& structure = rep.add("assoc.base-alignment", CheckKind::Structural);
  if (k1.n_points() != k2.n_points()) {
    fail_check(structure, "iterated fibre products have different point counts");
    return rep;
  }
  // Both iterated products enumerate triples (v,x,y) in lexicographic
  // order, so indices align.
  std::vector<std::array<int, 2>> pair_points(static_cast<size_t>(k1.n_points()));
  for (int z1 = 0; z1 < k1.n_points(); ++z1) {
    const int zlm = k1.point_x(z1);
    const int y = k1.point_y(z1);
    const int v = klm->point_x(zlm);
    const int x = klm->point_y(zlm);
    const int zmn = kmn->point_of(x, y);
    const int z2 = zmn < 0 ? -1 : k2.point_of(v, zmn);
    if (z2 != z1) {
      fail_check(structure, "triple (v,x,y) indexing mismatch at z=" + std::to_string(z1));
      return rep;
    }
    pair_points[static_cast<size_t>(z1)] = {zlm, zmn};
  }
  const PreEquivalence& b1 = k1.base();
  const PreEquivalence& b2 = k2.base();
  for (int za = 0; za < k1.n_points(); ++za) {
    for (int zb = 0; zb < k1.n_points(); ++zb) {
      if (b1.lamL(za, zb) != b2.lamL(za, zb) || b1.lamR(za, zb) != b2.lamR(za, zb)) {
        fail_check(structure, "transporter tables of the iterated products disagree at " + tup({za, zb}));
      }
    }
  }
  if (!structure.pass) return rep;

  auto& unitary = rep.add("assoc.intertwiner-unitary");
  auto& welldef = rep.add("assoc.well-defined");
  auto& ips = rep.add("assoc.inner-products");
  std::vector<CMatrix> intertwiners(static_cast<size_t>(k1.n_points()));
  for (int z = 0; z < k1.n_points(); ++z) {
    const auto [zlm, zmn] = pair_points[static_cast<size_t>(z)];
    const int v = klm->point_x(zlm);
    const int x = klm->point_y(zlm);
    const int y = k1.point_y(z);
    const int dl = l->fibre_dim(v);
    const int dm = m->fibre_dim(x);
    const int dn = n->fibre_dim(y);
    const int nt = dl * dm * dn;
    CMatrix theta1 = CMatrix::Zero(k1.fibre_dim(z), std::max(nt, 0));
    CMatrix theta2 = CMatrix::Zero(k2.fibre_dim(z), std::max(nt, 0));
    for (int i = 0; i < dl; ++i) {
      CVector ei = CVector::Zero(dl);
      ei(i) = 1.0;
      for (int kk = 0; kk < dm; ++kk) {
        CVector ek = CVector::Zero(dm);
        ek(kk) = 1.0;
        const CVector lm = klm->elementary(zlm, ei, ek);
        for (int j = 0; j < dn; ++j) {
          CVector ej = CVector::Zero(dn);
          ej(j) = 1.0;
          const int col = (i * dm + kk) * dn + j;
          theta1.col(col) = k1.elementary(z, lm, ej);
          theta2.col(col) = k2.elementary(z, ei, kmn->elementary(zmn, ek, ej));
        }
      }
    }
    const int r1 = svd_rank(theta1, opt.tol);
    const int r2 = svd_rank(theta2, opt.tol);
    if (r1 != k1.fibre_dim(z) || r2 != k2.fibre_dim(z) || k1.fibre_dim(z) != k2.fibre_dim(z)) {
      fail_check(welldef, "generator ranks/dims disagree at fibre " + std::to_string(z));
      continue;
    }
    const CMatrix w = theta2 * pseudo_inverse(theta1, opt.tol);
    track_residual(welldef, (w * theta1 - theta2).norm() / std::max(1.0, theta2.norm()),
                   opt.tol, "intertwiner does not match generators at fibre " + std::to_string(z));
    if (w.rows() > 0) {
      track_residual(unitary,
                     (w.adjoint() * w - CMatrix::Identity(w.cols(), w.cols())).norm(),
                     opt.tol, "intertwiner not unitary at fibre " + std::to_string(z));
    }
    intertwiners[static_cast<size_t>(z)] = w;

    // Same-fibre inner products agree on triple generators.
    const std::vector<CMatrix> tl1 = k1.inner_left_table(z, z);
    const std::vector<CMatrix> tl2 = k2.inner_left_table(z, z);
    const std::vector<CMatrix> tr1 = k1.inner_right_table(z, z);
    const std::vector<CMatrix> tr2 = k2.inner_right_table(z, z);
    const int d = k1.fibre_dim(z);
    for (int a = 0; a < nt; ++a) {
      for (int b = 0; b < nt; ++b) {
        CMatrix ipl1 = CMatrix::Zero(tl1.empty() ? 0 : tl1.front().rows(),
                                     tl1.empty() ? 0 : tl1.front().cols());
        CMatrix ipl2 = ipl1, ipr1 = CMatrix::Zero(tr1.empty() ? 0 : tr1.front().rows(),
                                                  tr1.empty() ? 0 : tr1.front().cols());
        CMatrix ipr2 = ipr1;
        for (int p = 0; p < d; ++p) {
          for (int q = 0; q < d; ++q) {
            const Complex w1 = theta1(p, a) * std::conj(theta1(q, b));
            const Complex w2 = theta2(p, a) * std::conj(theta2(q, b));
            ipl1 += w1 * tl1[static_cast<size_t>(p) * d + q];
            ipl2 += w2 * tl2[static_cast<size_t>(p) * d + q];
            const Complex v1 = std::conj(theta1(p, a)) * theta1(q, b);
            const Complex v2 = std::conj(theta2(p, a)) * theta2(q, b);
            ipr1 += v1 * tr1[static_cast<size_t>(p) * d + q];
            ipr2 += v2 * tr2[static_cast<size_t>(p) * d + q];
          }
        }
        track_residual(ips, (ipl1 - ipl2).norm(), opt.tol * std::max(1.0, ipl1.norm()),
                       "left inner products disagree at fibre " + std::to_string(z) +
                           " generators " + tup({a, b}));
        track_residual(ips, (ipr1 - ipr2).norm(), opt.tol * std::max(1.0, ipr1.norm()),
                       "right inner products disagree at fibre " + std::to_string(z) +
                           " generators " + tup({a, b}));
      }
    }
  }
  return rep;
}

}  // namespace morita
