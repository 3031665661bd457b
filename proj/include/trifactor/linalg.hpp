#pragma once

// Numeric kernel: Gram matrices, a dense symmetric eigensolver and
// projector distances between column spaces.

#include <string_view>

#include "trifactor/core.hpp"

namespace trifactor::linalg {

struct EigenResult {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // p x k, orthonormal columns
};

/// scale * X'X for X of shape p x T, symmetrized as (A + A')/2.
Matrix gram_scaled(const Matrix& X, double scale);

/// Full decomposition of a symmetric matrix by Householder tridiagonalization
/// followed by implicit QL. Eigenvalues descending, sign convention applied.
EigenResult sym_eig(const Matrix& S);

/// Leading k eigenpairs of symmetric S.
EigenResult sym_eig_topk(const Matrix& S, Eigen::Index k);

/// Flip each column so that its largest-magnitude entry is positive; ties go
/// to the first index.
void apply_sign_convention(Matrix& vectors);

/// sqrt(T) * eigenvectors, so (1/T) F'F = I.
Matrix scaled_eigvecs_to_factors(const EigenResult& eig, Eigen::Index T);

/// Orthonormal basis of the column space via Householder QR. Throws Numeric
/// if the smallest singular value is below 1e-12 of the largest.
Matrix orthonormal_basis(const Matrix& X, std::string_view name = "matrix");

/// ||P_A - P_B||_F with P_X the orthogonal projector on span(X). A
/// zero-column argument contributes the zero projector.
double projection_distance(const Matrix& A, const Matrix& B);

}  // namespace trifactor::linalg
