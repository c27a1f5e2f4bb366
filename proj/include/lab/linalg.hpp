#pragma once

#include <Eigen/Dense>

#include "lab/errors.hpp"

namespace lab {

// Dense row-major matrix and column vector used across the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace linalg {

// M = u * diag(singular_values) * v^T with orthonormal u, v (full factors)
// and singular values sorted descending.
struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

// Eigenvalues ascending, eigenvectors orthonormal in matching column order.
struct SymEigResult {
  Vector eigenvalues;
  Matrix eigenvectors;
};

SvdResult svd(const Matrix& m);

// Number of singular values strictly above rel_tol * (largest singular value).
int rank(const Matrix& m, double rel_tol = 1e-10);

// Symmetrizes the input internally: works on (m + m^T) / 2.
SymEigResult sym_eig(const Matrix& m);

// Minimum-norm least-squares solution of a x = b via SVD pseudoinverse.
Vector lstsq(const Matrix& a, const Vector& b);

// Orthonormal basis of {alpha : m^T alpha = 0}, the complement of the column
// span of m. Returns a (rows x (rows - rank)) matrix; zero columns when m has
// full row-space. A matrix with zero columns yields the identity basis.
Matrix orth_complement(const Matrix& m, double rel_tol = 1e-10);

// Largest singular value; 0 for empty input.
double spectral_norm(const Matrix& m);

}  // namespace linalg
}  // namespace lab
