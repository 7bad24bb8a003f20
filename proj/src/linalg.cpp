#include "morita/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <atomic>
#include <random>
#include <stdexcept>
#include <thread>

namespace morita {

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hs_inner: shape mismatch");
  }
  return (b.adjoint() * a).trace();
}

double hs_norm(const CMatrix& a) { return a.norm(); }

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

bool all_finite(const CMatrix& a) { return a.allFinite(); }

namespace {

CVector vectorize(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

}  // namespace

MatrixSubspace orthonormalize(Eigen::Index rows, Eigen::Index cols,
                              const std::vector<CMatrix>& span_matrices,
                              double tol) {
  if (tol <= 0) throw std::invalid_argument("orthonormalize: tol must be > 0");
  MatrixSubspace out;
  out.rows = rows;
  out.cols = cols;
  if (span_matrices.empty() || rows * cols == 0) return out;

  CMatrix stacked(rows * cols, static_cast<Eigen::Index>(span_matrices.size()));
  for (size_t j = 0; j < span_matrices.size(); ++j) {
    const CMatrix& m = span_matrices[j];
    if (m.rows() != rows || m.cols() != cols) {
      throw std::invalid_argument("orthonormalize: shape mismatch in span");
    }
    if (!m.allFinite()) {
      throw std::invalid_argument("orthonormalize: non-finite entry");
    }
    stacked.col(static_cast<Eigen::Index>(j)) = vectorize(m);
  }

  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return out;
  const double cutoff = tol * std::max(1.0, sv(0));
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) {
      out.basis.push_back(unvectorize(svd.matrixU().col(k), rows, cols));
    }
  }
  return out;
}

MatrixSubspace orthonormalize(const std::vector<CMatrix>& span_matrices,
                              double tol) {
  if (span_matrices.empty()) {
    throw std::invalid_argument("orthonormalize: cannot infer shape from empty span");
  }
  return orthonormalize(span_matrices.front().rows(),
                        span_matrices.front().cols(), span_matrices, tol);
}

MatrixSubspace full_matrix_space(Eigen::Index rows, Eigen::Index cols) {
  MatrixSubspace out;
  out.rows = rows;
  out.cols = cols;
  out.basis.reserve(static_cast<size_t>(rows * cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      CMatrix e = CMatrix::Zero(rows, cols);
      e(i, j) = 1.0;
      out.basis.push_back(std::move(e));
    }
  }
  return out;
}

CVector least_squares_expand(const MatrixSubspace& u, const CMatrix& m,
                             double* residual) {
  if (!u.shape_matches(m)) {
    throw std::invalid_argument("least_squares_expand: shape mismatch");
  }
  CVector coeffs(u.dim());
  CMatrix projection = CMatrix::Zero(u.rows, u.cols);
  for (int i = 0; i < u.dim(); ++i) {
    coeffs(i) = hs_inner(m, u.basis[static_cast<size_t>(i)]);
    projection += coeffs(i) * u.basis[static_cast<size_t>(i)];
  }
  if (residual != nullptr) *residual = (m - projection).norm();
  return coeffs;
}

bool subspace_contains(const MatrixSubspace& u, const CMatrix& m, double tol) {
  if (!u.shape_matches(m)) {
    throw std::invalid_argument("subspace_contains: shape mismatch");
  }
  double res = 0.0;
  least_squares_expand(u, m, &res);
  return res <= tol * std::max(1.0, m.norm());
}

bool subspace_equal(const MatrixSubspace& u, const MatrixSubspace& v,
                    double tol) {
  if (u.rows != v.rows || u.cols != v.cols) {
    throw std::invalid_argument("subspace_equal: shape mismatch");
  }
  if (u.dim() != v.dim()) return false;
  for (const CMatrix& b : u.basis) {
    if (!subspace_contains(v, b, tol)) return false;
  }
  for (const CMatrix& b : v.basis) {
    if (!subspace_contains(u, b, tol)) return false;
  }
  return true;
}

CMatrix subspace_element(const MatrixSubspace& u, const CVector& coords) {
  if (coords.size() != u.dim()) {
    throw std::invalid_argument("subspace_element: coordinate count mismatch");
  }
  CMatrix out = CMatrix::Zero(u.rows, u.cols);
  for (int i = 0; i < u.dim(); ++i) {
    out += coords(i) * u.basis[static_cast<size_t>(i)];
  }
  return out;
}

double min_hermitian_eigenvalue(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("min_hermitian_eigenvalue: matrix not square");
  }
  if (a.rows() == 0) return 0.0;
  CMatrix h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool psd_check(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("psd_check: matrix not square");
  }
  if (a.rows() == 0) return true;
  const double scale = std::max(1.0, a.norm());
  if ((a - a.adjoint()).norm() > tol * scale) return false;
  CMatrix h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double bound = tol * std::max(1.0, std::abs(ev(ev.size() - 1)));
  return ev(0) >= -bound;
}

GramQuotient gram_quotient(const GramData& g) {
  const Eigen::Index n = g.gram.rows();
  if (g.gram.cols() != n) {
    throw std::invalid_argument("gram_quotient: gram must be square");
  }
  GramQuotient out;
  out.coeff_map = CMatrix::Zero(0, n);
  out.lift = CMatrix::Zero(n, 0);
  if (n == 0) return out;

  const double scale = std::max(1.0, g.gram.norm());
  if ((g.gram - g.gram.adjoint()).norm() > g.tol * scale) {
    throw std::invalid_argument("gram_quotient: gram is not Hermitian within tolerance");
  }
  CMatrix h = (g.gram + g.gram.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const auto& ev = es.eigenvalues();
  const double top = std::max(0.0, ev(n - 1));
  if (ev(0) < -g.tol * std::max(1.0, top)) {
    throw std::invalid_argument("gram_quotient: gram is indefinite beyond tolerance");
  }
  const double cutoff = g.tol * std::max(1.0, top);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ev(k) > cutoff) kept.push_back(k);
  }
  out.dim = static_cast<int>(kept.size());
  out.coeff_map.resize(out.dim, n);
  out.lift.resize(n, out.dim);
  for (int r = 0; r < out.dim; ++r) {
    const Eigen::Index k = kept[static_cast<size_t>(r)];
    const double root = std::sqrt(ev(k));
    out.coeff_map.row(r) = root * es.eigenvectors().col(k).adjoint();
    out.lift.col(r) = es.eigenvectors().col(k) / root;
  }
  return out;
}

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = Complex(dist(rng), dist(rng));
    }
  }
  return m;
}

CVector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(dist(rng), dist(rng));
  return v;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace morita
