// The balanced tensor bundle K = M (x)_{C^(0)} N over the fibre product
// Z = X * Y. Fibres are abstract Gram-quotient coordinate spaces built from
// the algebraic tensor generators m_i (x) n_j; the matrix realization
// m (x) n -> m.n is kept strictly as an independent oracle.
#pragma once

#include "morita/equiv_bundle.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace morita {

struct TensorFibre {
  int z = -1;       // point index in Z
  int x = -1;       // point in X
  int y = -1;       // point in Y
  int n_gen = 0;    // dim M_x * dim N_y, generator (i,j) has index i*dimN + j
  CMatrix gram;     // right-scalarized Gram of the generators
  GramQuotient q;   // isometric quotient coordinates
  double gram_cross_residual = 0.0;  // |gram - left-scalarized gram|

  int dim() const { return q.dim; }
};

class TensorBundle : public BimoduleBundle {
 public:
  // Builds Z = X * Y and every fibre. Requires m.right_fell == n.left_fell.
  TensorBundle(BimodulePtr m, BimodulePtr n, double tol = kDefaultTol,
               int jobs = 1);

  const PreEquivalence& base() const override { return *base_; }
  bool base_is_equivalence() const override { return false; }
  FellBundlePtr left_fell() const override { return m_->left_fell(); }
  FellBundlePtr right_fell() const override { return n_->right_fell(); }
  int fibre_dim(int z) const override {
    return fibres_[static_cast<size_t>(z)].dim();
  }
  CMatrix act_left_matrix(const CMatrix& b, int g, int z,
                          double* residual) const override;
  CMatrix act_right_matrix(int z, const CMatrix& d, int k,
                           double* residual) const override;
  std::vector<CMatrix> inner_left_table(int z1, int z2) const override;
  std::vector<CMatrix> inner_right_table(int z1, int z2) const override;
  CMatrix realize(int z, const CVector& coords) const override;

  const BimoduleBundle& left_factor() const { return *m_; }
  const BimoduleBundle& right_factor() const { return *n_; }
  BimodulePtr left_factor_ptr() const { return m_; }
  BimodulePtr right_factor_ptr() const { return n_; }
  FellBundlePtr middle_fell() const { return m_->right_fell(); }
  PreEquivalencePtr base_ptr() const { return base_; }

  int n_points() const { return base_->space.n_points; }
  int point_of(int x, int y) const;  // -1 when s_X(x) != r_Y(y)
  int point_x(int z) const { return px_[static_cast<size_t>(z)]; }
  int point_y(int z) const { return py_[static_cast<size_t>(z)]; }
  // t_Z(z) = s_X(x) = r_Y(y), a unit of the middle groupoid.
  int t_map(int z) const;
  const TensorFibre& tensor_fibre(int z) const {
    return fibres_[static_cast<size_t>(z)];
  }

  // Quotient coordinates of the elementary tensor with the given factor
  // coordinates; bilinear.
  CVector elementary(int z, const CVector& mcoords, const CVector& ncoords) const;

  double tol() const { return tol_; }

 private:
  TensorFibre build_fibre(int z) const;
  // Generator-level matrix-valued inner product tables, memoized.
  const std::vector<CMatrix>& gen_ipl(int z1, int z2) const;
  const std::vector<CMatrix>& gen_ipr(int z1, int z2) const;

  BimodulePtr m_, n_;
  PreEquivalencePtr base_;
  std::vector<int> px_, py_;
  std::vector<int> zindex_;  // x * |Y| + y -> z
  std::vector<TensorFibre> fibres_;
  double tol_ = kDefaultTol;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, int>, std::vector<CMatrix>> gen_ipl_cache_;
  mutable std::map<std::pair<int, int>, std::vector<CMatrix>> gen_ipr_cache_;
};

using TensorBundlePtr = std::shared_ptr<const TensorBundle>;

// The rebalancing isometry Psi_h : K_(x.h, y) -> K_(x, h.y) determined by
// (m.c) (x) n -> m (x) (c.n), built from the triple-tensor Gram route.
struct PsiMap {
  int h = -1;
  int z_src = -1;
  int z_dst = -1;
  CMatrix matrix;  // dim(z_dst) x dim(z_src)
  double well_def_residual = 0.0;  // mutual kernel containment defect
  double unitary_residual = 0.0;
  bool rank_match = true;  // rank Phi1 = dim src = rank Phi2 = dim dst
  int null_dim_src = 0;    // triple-tensor null space dimensions
  int null_dim_dst = 0;

  bool ok(double tol) const {
    return rank_match && well_def_residual <= tol && unitary_residual <= tol;
  }
};

PsiMap build_psi(const TensorBundle& k, int h, int z_src, double tol = kDefaultTol);

// Lazily built, memoized family of Psi maps over all admissible (h, z).
class PsiFamily {
 public:
  explicit PsiFamily(TensorBundlePtr k, double tol = kDefaultTol)
      : k_(std::move(k)), tol_(tol) {}

  const PsiMap& at(int h, int z_src) const;
  // Every (h, z) with s_H(h) = t_Z(z); deterministic order.
  std::vector<std::pair<int, int>> admissible() const;
  // Destination point of Psi_h on the fibre over z.
  int dst_point(int h, int z_src) const;
  const TensorBundle& bundle() const { return *k_; }
  double tol() const { return tol_; }

 private:
  TensorBundlePtr k_;
  double tol_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, PsiMap> cache_;
};

// Full FE hypo-equivalence suite on K plus the balancing identity
// k_elementary(m.c, n) = k_elementary(m, c.n) for middle unit fibres and
// the left/right Gram scalarization cross-check.
Report verify_hypoequiv_K(const TensorBundle& k, const FeOptions& opt = {});

Report cauchy_schwarz_K(const TensorBundle& k, int samples = 500,
                        std::uint64_t seed = 20240904, double tol = kDefaultTol);

// Psi2 cocycle, Psi3 units, Psi4 inverses, Psi5 bi-equivariance, plus
// well-definedness and unitarity of every admissible map.
Report verify_psi_properties(const PsiFamily& psi, const FeOptions& opt = {});

// Independent matrix-model oracle for one fibre: the realized span
// span(M_x . N_y) and the isometric intertwiner from quotient coordinates.
struct Realization {
  MatrixSubspace span;
  CMatrix intertwiner;      // span coordinates x quotient coordinates
  double gram_residual = 0.0;     // |abstract gram - realized gram|, entrywise max
  double isometry_residual = 0.0; // |W^*W - I|
  bool dim_match = true;
};
Realization realize_as_products(const TensorBundle& k, int z);

// Oracle sweep over all fibres: Gram agreement within tol_gram and exact
// dimension match.
Report oracle_check(const TensorBundle& k, double tol_gram = 1e-8);

// Compares (L (x) M) (x) N with L (x) (M (x) N) fibrewise: matching triple
// generators, a unitary intertwiner, and equal inner products on
// generators.
Report associativity_check(const BimodulePtr& l, const BimodulePtr& m,
                           const BimodulePtr& n, const FeOptions& opt = {});

}  // namespace morita
