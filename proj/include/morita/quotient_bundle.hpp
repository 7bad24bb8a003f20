// The quotient bundle P over the balanced product Z = X *_H Y: fibre data
// lives at canonical representatives (minimal base pair per class) and the
// Psi transports identify every other fibre of K with its canonical one.
#pragma once

#include "morita/tensor_compose.hpp"

#include <memory>
#include <string>
#include <vector>

namespace morita {

struct OrbitIndex {
  std::vector<int> class_of;     // point of Z -> class
  std::vector<int> rep_of;       // class -> canonical (minimal) point of Z
  std::vector<int> transporter;  // point z -> h with Psi_h : K_z -> K_rep

  int n_classes() const { return static_cast<int>(rep_of.size()); }
};

class QuotientBundle : public BimoduleBundle {
 public:
  // k must be the tensor bundle of two equivalence bundles over genuine
  // groupoid equivalences. Throws when a Psi transport fails its
  // well-definedness checks (a non-equivalence input).
  QuotientBundle(TensorBundlePtr k, std::shared_ptr<PsiFamily> psi, double tol);

  const PreEquivalence& base() const override { return zeq_->pre; }
  bool base_is_equivalence() const override { return true; }
  FellBundlePtr left_fell() const override { return k_->left_fell(); }
  FellBundlePtr right_fell() const override { return k_->right_fell(); }
  int fibre_dim(int cls) const override {
    return k_->fibre_dim(orbits_.rep_of[static_cast<size_t>(cls)]);
  }
  CMatrix act_left_matrix(const CMatrix& b, int g, int cls,
                          double* residual) const override;
  CMatrix act_right_matrix(int cls, const CMatrix& d, int karrow,
                           double* residual) const override;
  std::vector<CMatrix> inner_left_table(int c1, int c2) const override;
  std::vector<CMatrix> inner_right_table(int c1, int c2) const override;
  CMatrix realize(int cls, const CVector& coords) const override;

  const TensorBundle& tensor() const { return *k_; }
  const PsiFamily& psi() const { return *psi_; }
  const OrbitIndex& orbits() const { return orbits_; }
  const GroupoidEquivalence& base_equivalence() const { return *zeq_; }
  EquivalencePtr base_equivalence_ptr() const { return zeq_; }
  int n_classes() const { return orbits_.n_classes(); }

  // Transport matrix K_z -> K_{rep(class(z))} (identity at representatives).
  CMatrix transport_to_rep(int z) const;
  // Q on fibre coordinates: the class index and coordinates in the
  // canonical fibre.
  CVector q_map(int z, const CVector& xi) const;

 private:
  TensorBundlePtr k_;
  std::shared_ptr<PsiFamily> psi_;
  EquivalencePtr zeq_;
  OrbitIndex orbits_;
  double tol_ = kDefaultTol;
};

QuotientBundle build_quotient_bundle(const TensorBundlePtr& k,
                                     std::shared_ptr<PsiFamily> psi,
                                     double tol = kDefaultTol);

// Complete FE1-FE3 suite over the balanced-product equivalence, plus
// representative-independence of actions and inner products and the Q map
// laws (Q(xi) = Q(xi') iff xi ~ xi', linearity, norm preservation).
Report verify_equivalence_P(const QuotientBundle& p, const FeOptions& opt = {});

struct MoritaWitness {
  int cls = -1;
  int dim = 0;
  int fullness_left = 0;       // rank of span ip_left(P_z, P_z)
  int fullness_right = 0;
  int dim_left_algebra = 0;    // dim B(r(z))
  int dim_right_algebra = 0;   // dim D(s(z))
  double compatibility_residual = 0.0;
  double norm_residual = 0.0;
  std::string transporter_digest;
  bool ok = false;
  std::string note;
};

// Per-class imprimitivity certificate; refuses zero fibres with a
// structural note.
MoritaWitness morita_witness(const QuotientBundle& p, int cls,
                             double tol = kDefaultTol);

std::string transporter_table_digest(const GroupoidEquivalence& e);

}  // namespace morita
