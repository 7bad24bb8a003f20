#include "morita/quotient_bundle.hpp"

#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

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

QuotientBundle::QuotientBundle(TensorBundlePtr k, std::shared_ptr<PsiFamily> psi,
                               double tol)
    : k_(std::move(k)), psi_(std::move(psi)), tol_(tol) {
  QuotientPreEquivalence q = quotient_preequivalence(k_->base());
  zeq_ = std::make_shared<GroupoidEquivalence>(std::move(q.equivalence));
  orbits_.class_of = std::move(q.projection);
  orbits_.rep_of = std::move(q.class_rep);

  // Transporter per point: the unique h with x = x0.h and y = h^{-1}.y0,
  // i.e. h = lamR_X(x0, x); its Psi moves K_z onto the canonical fibre.
  const PreEquivalence& xpre = k_->left_factor().base();
  const GroupoidBispace& X = xpre.space;
  const GroupoidBispace& Y = k_->right_factor().base().space;
  orbits_.transporter.assign(static_cast<size_t>(k_->n_points()), -1);
  for (int z = 0; z < k_->n_points(); ++z) {
    const int rep = orbits_.rep_of[static_cast<size_t>(orbits_.class_of[static_cast<size_t>(z)])];
    const int x0 = k_->point_x(rep), y0 = k_->point_y(rep);
    const int x = k_->point_x(z), y = k_->point_y(z);
    const int h = xpre.lamR(x0, x);
    if (h < 0 || X.act_right(x0, h) != x || Y.act_left(h, y) != y0) {
      throw std::invalid_argument(
          "QuotientBundle: no balancing transporter from point " + std::to_string(z) +
          " to its class representative (base spaces are not genuine equivalences?)");
    }
    orbits_.transporter[static_cast<size_t>(z)] = h;
    if (z != rep) {
      const PsiMap& p = psi_->at(h, z);
      if (p.z_dst != rep) {
        throw std::logic_error("QuotientBundle: Psi transport does not land on the representative");
      }
      if (!p.ok(std::max(tol_, 1e-7))) {
        throw std::invalid_argument("QuotientBundle: Psi well-definedness failure at (h,z)=" +
                                    tup({h, z}) + ", residual " +
                                    std::to_string(std::max(p.well_def_residual, p.unitary_residual)));
      }
    }
  }
}

CMatrix QuotientBundle::transport_to_rep(int z) const {
  const int rep = orbits_.rep_of[static_cast<size_t>(orbits_.class_of[static_cast<size_t>(z)])];
  if (z == rep) {
    const int d = k_->fibre_dim(z);
    return CMatrix::Identity(d, d);
  }
  return psi_->at(orbits_.transporter[static_cast<size_t>(z)], z).matrix;
}

CVector QuotientBundle::q_map(int z, const CVector& xi) const {
  const int rep = orbits_.rep_of[static_cast<size_t>(orbits_.class_of[static_cast<size_t>(z)])];
  if (z == rep) return xi;
  return transport_to_rep(z) * xi;
}

CMatrix QuotientBundle::act_left_matrix(const CMatrix& b, int g, int cls,
                                        double* residual) const {
  const int rep = orbits_.rep_of[static_cast<size_t>(cls)];
  const int gz = k_->base().space.act_left(g, rep);
  if (gz < 0) throw std::invalid_argument("QuotientBundle::act_left: not admissible");
  const CMatrix a = k_->act_left_matrix(b, g, rep, residual);
  return transport_to_rep(gz) * a;
}

CMatrix QuotientBundle::act_right_matrix(int cls, const CMatrix& d, int karrow,
                                         double* residual) const {
  const int rep = orbits_.rep_of[static_cast<size_t>(cls)];
  const int zk = k_->base().space.act_right(rep, karrow);
  if (zk < 0) throw std::invalid_argument("QuotientBundle::act_right: not admissible");
  const CMatrix a = k_->act_right_matrix(rep, d, karrow, residual);
  return transport_to_rep(zk) * a;
}

std::vector<CMatrix> QuotientBundle::inner_left_table(int c1, int c2) const {
  return k_->inner_left_table(orbits_.rep_of[static_cast<size_t>(c1)],
                              orbits_.rep_of[static_cast<size_t>(c2)]);
}

std::vector<CMatrix> QuotientBundle::inner_right_table(int c1, int c2) const {
  return k_->inner_right_table(orbits_.rep_of[static_cast<size_t>(c1)],
                               orbits_.rep_of[static_cast<size_t>(c2)]);
}

CMatrix QuotientBundle::realize(int cls, const CVector& coords) const {
  return k_->realize(orbits_.rep_of[static_cast<size_t>(cls)], coords);
}

QuotientBundle build_quotient_bundle(const TensorBundlePtr& k,
                                     std::shared_ptr<PsiFamily> psi,
                                     double tol) {
  if (psi == nullptr) psi = std::make_shared<PsiFamily>(k, tol);
  return QuotientBundle(k, std::move(psi), tol);
}

Report verify_equivalence_P(const QuotientBundle& p, const FeOptions& opt) {
  Report rep = verify_equivalence_bundle(p, opt);
  rep.subject = "quotient_bundle";

  const TensorBundle& k = p.tensor();
  const PreEquivalence& zpre = k.base();
  const double tol = opt.tol;

  // Base must itself pass the GE suite.
  auto& base_ok = rep.add("P.base-equivalence", CheckKind::Structural);
  if (!verify_equivalence(p.base_equivalence()).passed()) {
    fail_check(base_ok, "balanced product failed the groupoid equivalence suite");
  }

  // Q identifies exactly the Psi orbits: Q(xi) = Q(Psi_h xi) for every
  // admissible h, and the transport is a linear isometry.
  auto& qlaw = rep.add("P.q-map");
  const auto adm = p.psi().admissible();
  for (const auto& [h, z] : adm) {
    const PsiMap& pm = p.psi().at(h, z);
    if (p.orbits().class_of[static_cast<size_t>(z)] !=
        p.orbits().class_of[static_cast<size_t>(pm.z_dst)]) {
      fail_check(qlaw, "Psi relates points in different classes at (h,z)=" + tup({h, z}));
      continue;
    }
    const int d = k.fibre_dim(z);
    if (d == 0) continue;
    const CMatrix lhs = p.transport_to_rep(pm.z_dst) * pm.matrix;
    const CMatrix rhs = p.transport_to_rep(z);
    track_residual(qlaw, (lhs - rhs).norm(), tol * std::max(1.0, rhs.norm()),
                   "Q(Psi_h xi) != Q(xi) at (h,z)=" + tup({h, z}));
  }
  auto& qnorm = rep.add("P.q-map-isometry");
  for (int z = 0; z < k.n_points(); ++z) {
    const int d = k.fibre_dim(z);
    const CMatrix t = p.transport_to_rep(z);
    track_residual(qnorm, (t.adjoint() * t - CMatrix::Identity(d, d)).norm(), tol,
                   "transport not isometric at point " + std::to_string(z));
  }

  // Representative independence of actions and inner products: conjugating
  // the action at any representative by the transports must give the
  // class-level action, and inner products must be transport-invariant.
  auto& repind = rep.add("P.representative-independence");
  const FiniteGroupoid& G = *zpre.space.left;
  const FiniteGroupoid& Kgpd = *zpre.space.right;
  const FellBundle& B = *k.left_fell();
  const FellBundle& D = *k.right_fell();
  for (int z = 0; z < k.n_points(); ++z) {
    const int cls = p.orbits().class_of[static_cast<size_t>(z)];
    const CMatrix tz = p.transport_to_rep(z);
    for (int g = 0; g < G.n_arrows; ++g) {
      if (zpre.space.act_left(g, z) < 0) continue;
      const int gz = zpre.space.act_left(g, z);
      for (int kb = 0; kb < B.fibre(g).dim(); ++kb) {
        const CMatrix& bmat = B.fibre(g).basis[static_cast<size_t>(kb)];
        const CMatrix via_z = p.transport_to_rep(gz) *
                              k.act_left_matrix(bmat, g, z, nullptr) * tz.adjoint();
        const CMatrix via_cls = p.act_left_matrix(bmat, g, cls, nullptr);
        track_residual(repind, (via_z - via_cls).norm(), tol * std::max(1.0, via_cls.norm()),
                       "left action depends on the representative at " + tup({z, g, kb}));
      }
    }
    for (int kk = 0; kk < Kgpd.n_arrows; ++kk) {
      if (zpre.space.act_right(z, kk) < 0) continue;
      const int zk = zpre.space.act_right(z, kk);
      for (int kd = 0; kd < D.fibre(kk).dim(); ++kd) {
        const CMatrix& dmat = D.fibre(kk).basis[static_cast<size_t>(kd)];
        const CMatrix via_z = p.transport_to_rep(zk) *
                              k.act_right_matrix(z, dmat, kk, nullptr) * tz.adjoint();
        const CMatrix via_cls = p.act_right_matrix(cls, dmat, kk, nullptr);
        track_residual(repind, (via_z - via_cls).norm(), tol * std::max(1.0, via_cls.norm()),
                       "right action depends on the representative at " + tup({z, kk, kd}));
      }
    }
  }

  auto& ipind = rep.add("P.inner-representative-independence");
  for (int z1 = 0; z1 < k.n_points(); ++z1) {
    for (int z2 = 0; z2 < k.n_points(); ++z2) {
      if (zpre.lamL(z1, z2) < 0) continue;
      const int d1 = k.fibre_dim(z1), d2 = k.fibre_dim(z2);
      if (d1 == 0 || d2 == 0) continue;
      const CMatrix t1 = p.transport_to_rep(z1);
      const CMatrix t2 = p.transport_to_rep(z2);
      const int c1 = p.orbits().class_of[static_cast<size_t>(z1)];
      const int c2 = p.orbits().class_of[static_cast<size_t>(z2)];
      const std::vector<CMatrix> tz = k.inner_left_table(z1, z2);
      const std::vector<CMatrix> tc = p.inner_left_table(c1, c2);
      for (int i = 0; i < d1; ++i) {
        for (int j = 0; j < d2; ++j) {
          // <e_i, e_j> at (z1,z2) must match <t1 e_i, t2 e_j> at the reps.
          CMatrix moved = CMatrix::Zero(tz.front().rows(), tz.front().cols());
          for (int u = 0; u < d1; ++u) {
            for (int v = 0; v < d2; ++v) {
              moved += t1(u, i) * std::conj(t2(v, j)) * tc[static_cast<size_t>(u) * d2 + v];
            }
          }
          const CMatrix& direct = tz[static_cast<size_t>(i) * d2 + j];
          track_residual(ipind, (moved - direct).norm(), tol * std::max(1.0, direct.norm()),
                         "ip_left depends on the representative at " + tup({z1, i, z2, j}));
        }
      }
    }
  }

  return rep;
}

MoritaWitness morita_witness(const QuotientBundle& p, int cls, double tol) {
  MoritaWitness w;
  w.cls = cls;
  w.dim = p.fibre_dim(cls);
  // The base space of P has the classes as its points.
  const GroupoidBispace& Z = p.base().space;
  const int ru = Z.r[cls];
  const int su = Z.s[cls];
  const MatrixSubspace& bu = p.left_fell()->fibre(ru);
  const MatrixSubspace& du = p.right_fell()->fibre(su);
  w.dim_left_algebra = bu.dim();
  w.dim_right_algebra = du.dim();
  w.transporter_digest = transporter_table_digest(p.base_equivalence());

  if (w.dim == 0) {
    w.ok = false;
    w.note = "structural fail: zero fibre cannot be an imprimitivity bimodule";
    return w;
  }

  const std::vector<CMatrix> tl = p.inner_left_table(cls, cls);
  const std::vector<CMatrix> tr = p.inner_right_table(cls, cls);
  w.fullness_left = orthonormalize(bu.rows, bu.cols, tl, tol).dim();
  w.fullness_right = orthonormalize(du.rows, du.cols, tr, tol).dim();

  const int d = w.dim;
  for (int i = 0; i < d; ++i) {
    const CMatrix& li = tl[static_cast<size_t>(i) * d + i];
    const CMatrix& ri = tr[static_cast<size_t>(i) * d + i];
    w.norm_residual = std::max(w.norm_residual, std::abs(op_norm(li) - op_norm(ri)));
    for (int j = 0; j < d; ++j) {
      const CMatrix lm = p.act_left_matrix(tl[static_cast<size_t>(i) * d + j], ru, cls, nullptr);
      for (int kk = 0; kk < d; ++kk) {
        const CMatrix rm = p.act_right_matrix(cls, tr[static_cast<size_t>(j) * d + kk], su, nullptr);
        w.compatibility_residual = std::max(
            w.compatibility_residual, (lm.col(kk) - rm.col(i)).norm());
      }
    }
  }
  w.ok = (w.fullness_left == w.dim_left_algebra) &&
         (w.fullness_right == w.dim_right_algebra) &&
         w.compatibility_residual <= tol && w.norm_residual <= tol;
  if (!w.ok && w.note.empty()) w.note = "imprimitivity conditions violated";
  return w;
}

std::string transporter_table_digest(const GroupoidEquivalence& e) {
  std::ostringstream os;
  const PreEquivalence& p = e.pre;
  os << p.space.n_points << ":";
  for (int v : p.lam_left) os << v << ",";
  os << ";";
  for (int v : p.lam_right) os << v << ",";
  const size_t h = std::hash<std::string>{}(os.str());
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

}  // namespace morita
