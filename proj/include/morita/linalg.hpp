// Dense complex-matrix substrate: Hilbert-Schmidt pairings, subspaces,
// Gram quotients, positivity tests. Everything here is desk-scale dense
// linear algebra on top of Eigen.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace morita {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-9;

// trace(b^* a); conjugate-symmetric, positive definite on nonzero matrices.
Complex hs_inner(const CMatrix& a, const CMatrix& b);

double hs_norm(const CMatrix& a);

// Largest singular value; the C*-norm of the matrix model.
double op_norm(const CMatrix& a);

bool all_finite(const CMatrix& a);

// A linear subspace of rows x cols complex matrices with a basis that is
// orthonormal under hs_inner.
struct MatrixSubspace {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<CMatrix> basis;

  int dim() const { return static_cast<int>(basis.size()); }
  bool shape_matches(const CMatrix& m) const {
    return m.rows() == rows && m.cols() == cols;
  }
};

// Orthonormal basis of span(span_matrices). Directions whose singular value
// falls below tol*max(1, largest singular value) are dropped.
MatrixSubspace orthonormalize(Eigen::Index rows, Eigen::Index cols,
                              const std::vector<CMatrix>& span_matrices,
                              double tol = kDefaultTol);

// Shape inferred from the first element; input must be nonempty.
MatrixSubspace orthonormalize(const std::vector<CMatrix>& span_matrices,
                              double tol = kDefaultTol);

MatrixSubspace full_matrix_space(Eigen::Index rows, Eigen::Index cols);

// Coefficients of the orthogonal projection of m onto u; if residual is
// non-null it receives the Frobenius norm of m minus the projection.
CVector least_squares_expand(const MatrixSubspace& u, const CMatrix& m,
                             double* residual = nullptr);

bool subspace_contains(const MatrixSubspace& u, const CMatrix& m,
                       double tol = kDefaultTol);

// Mutual containment of basis elements.
bool subspace_equal(const MatrixSubspace& u, const MatrixSubspace& v,
                    double tol = kDefaultTol);

CMatrix subspace_element(const MatrixSubspace& u, const CVector& coords);

// Hermitian within tolerance and min eigenvalue >= -tol*max(1, |lambda|_max).
bool psd_check(const CMatrix& a, double tol = kDefaultTol);

// Smallest eigenvalue of the Hermitian part (a + a^*)/2.
double min_hermitian_eigenvalue(const CMatrix& a);

// Pairwise pairings of a finite generating family under a semi-inner
// product; Hermitian PSD within tol by contract.
struct GramData {
  CMatrix gram;
  double tol = kDefaultTol;
};

// Isometric coordinates for the quotient of the generating family by the
// null space of the semi-inner product:
//   coeff_map^* coeff_map  =  gram   (up to dropped null directions)
//   coeff_map * lift       =  identity on the quotient
struct GramQuotient {
  int dim = 0;
  CMatrix coeff_map;  // dim x n
  CMatrix lift;       // n x dim
};

// Throws std::invalid_argument if gram is not Hermitian PSD within tol.
GramQuotient gram_quotient(const GramData& g);

// Deterministic complex Gaussian test data.
CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
CVector random_vector(Eigen::Index n, std::uint64_t seed);

// Chunked deterministic parallel sweep; fn(i) must only write to slot i of
// pre-sized output. jobs <= 1 runs inline.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace morita
