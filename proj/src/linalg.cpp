#include "lab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lab::linalg {

namespace {

void require_finite(const Matrix& m, const char* op) {
  if (!m.allFinite()) {
    throw NumericalFailure(std::string(op) + ": input has non-finite entries");
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  if (m.rows() == 0 || m.cols() == 0) {
    throw DimensionMismatch("svd: empty matrix");
  }
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("svd: factorization did not converge");
  }
  SvdResult out;
  out.u = solver.matrixU();
  out.singular_values = solver.singularValues();
  out.v = solver.matrixV();
  return out;
}

int rank(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  require_finite(m, "rank");
  Eigen::JacobiSVD<Matrix> solver(m);
  const Vector& s = solver.singularValues();
  if (s.size() == 0) return 0;
  const double cutoff = rel_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++r;
  }
  return r;
}

SymEigResult sym_eig(const Matrix& m) {
  require_finite(m, "sym_eig");
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("sym_eig: matrix must be square");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("sym_eig: iteration did not converge");
  }
  SymEigResult out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

Vector lstsq(const Matrix& a, const Vector& b) {
  require_finite(a, "lstsq");
  if (!b.allFinite()) throw NumericalFailure("lstsq: rhs has non-finite entries");
  if (a.rows() != b.size()) {
    throw DimensionMismatch("lstsq: a has " + std::to_string(a.rows()) +
                            " rows but b has " + std::to_string(b.size()) +
                            " entries");
  }
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("lstsq: factorization did not converge");
  }
  return solver.solve(b);
}

Matrix orth_complement(const Matrix& m, double rel_tol) {
  const Eigen::Index d = m.rows();
  if (d == 0) throw DimensionMismatch("orth_complement: zero-row matrix");
  if (m.cols() == 0) {
    return Matrix::Identity(d, d);
  }
  require_finite(m, "orth_complement");
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU);
  const Vector& s = solver.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++r;
  }
  const Matrix u = solver.matrixU();
  return u.rightCols(d - r);
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  require_finite(m, "spectral_norm");
  Eigen::JacobiSVD<Matrix> solver(m);
  return solver.singularValues().size() > 0 ? solver.singularValues()(0) : 0.0;
}

}  // namespace lab::linalg
