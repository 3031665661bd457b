#include "trifactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace trifactor::linalg {

namespace {

constexpr int kMaxQlIterationsPerEigenvalue = 30;

void require_finite(const Matrix& X, std::string_view what) {
  if (!X.allFinite())
    throw Error(ErrorKind::Numeric, std::string(what) + ": input contains non-finite entries");
}

// Householder reduction of the symmetric matrix held in V to tridiagonal
// form. On exit d is the diagonal, e the subdiagonal (e[0] unused) and V the
// accumulated orthogonal transform.
void tridiagonalize(Matrix& V, Vector& d, Vector& e) {
  const Eigen::Index n = V.rows();
  for (Eigen::Index j = 0; j < n; ++j) d(j) = V(n - 1, j);

  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d(k));
    if (scale == 0.0) {
      e(i) = d(i - 1);
      for (Eigen::Index j = 0; j < i; ++j) {
        d(j) = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d(k) /= scale;
        h += d(k) * d(k);
      }
      double f = d(i - 1);
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e(i) = scale * g;
      h -= f * g;
      d(i - 1) = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e(j) = 0.0;

      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        V(j, i) = f;
        g = e(j) + V(j, j) * f;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d(k);
          e(k) += V(k, j) * f;
        }
        e(j) = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e(j) /= h;
        f += e(j) * d(j);
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e(j) -= hh * d(j);
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        g = e(j);
        for (Eigen::Index k = j; k <= i - 1; ++k) V(k, j) -= (f * e(k) + g * d(k));
        d(j) = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d(i) = h;
  }

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d(i + 1);
    if (h != 0.0) {
      for (Eigen::Index k = 0; k <= i; ++k) d(k) = V(k, i + 1) / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (Eigen::Index k = 0; k <= i; ++k) V(k, j) -= g * d(k);
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j) = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e(0) = 0.0;
}

// Implicit QL iterations on the tridiagonal (d, e), accumulating rotations
// into V. Eigenvalues are left unsorted in d.
void tridiagonal_ql(Matrix& V, Vector& d, Vector& e) {
  const Eigen::Index n = V.rows();
  for (Eigen::Index i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const int max_iter = kMaxQlIterationsPerEigenvalue;

  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d(l)) + std::abs(e(l)));
    Eigen::Index m = l;
    while (m < n - 1) {
      if (std::abs(e(m)) <= eps * tst1) break;
      ++m;
    }

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iter)
          throw Error(ErrorKind::Numeric,
                      "symmetric eigensolver did not converge: eigenvalue " +
                          std::to_string(l + 1) + " still unresolved after " +
                          std::to_string(max_iter) + " QL iterations");
        double g = d(l);
        double p = (d(l + 1) - g) / (2.0 * e(l));
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const double dl1 = d(l + 1);
        double h = g - d(l);
        for (Eigen::Index i = l + 2; i < n; ++i) d(i) -= h;
        f += h;

        p = d(m);
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e(l + 1);
        double s = 0.0, s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = std::hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          for (Eigen::Index k = 0; k < n; ++k) {
            h = V(k, i + 1);
            V(k, i + 1) = s * V(k, i) + c * h;
            V(k, i) = c * V(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (std::abs(e(l)) > eps * tst1);
    }
    d(l) += f;
    e(l) = 0.0;
  }
}

}  // namespace

Matrix gram_scaled(const Matrix& X, double scale) {
  require_finite(X, "gram_scaled");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorKind::Contract, "gram_scaled: scale must be a positive finite number");
  Matrix S = scale * (X.transpose() * X);
  return 0.5 * (S + S.transpose());
}

void apply_sign_convention(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (vectors.rows() > 0 && vectors(best, c) < 0) vectors.col(c) = -vectors.col(c);
  }
}

EigenResult sym_eig(const Matrix& S) {
  if (S.rows() != S.cols())
    throw Error(ErrorKind::Contract, "sym_eig: matrix is " + std::to_string(S.rows()) + "x" +
                                         std::to_string(S.cols()) + ", not square");
  require_finite(S, "sym_eig");
  const double tol = 1e-10 * std::max(1.0, S.cwiseAbs().maxCoeff());
  if (S.size() > 0 && (S - S.transpose()).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::Contract, "sym_eig: matrix is not symmetric within 1e-10");

  const Eigen::Index n = S.rows();
  EigenResult out;
  if (n == 0) return out;

  Matrix V = S;
  Vector d(n), e(n);
  tridiagonalize(V, d, e);
  tridiagonal_ql(V, d, e);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return d(a) > d(b); });

  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = d(order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = V.col(order[static_cast<std::size_t>(k)]);
  }
  apply_sign_convention(out.eigenvectors);
  return out;
}

EigenResult sym_eig_topk(const Matrix& S, Eigen::Index k) {
  if (k < 0 || k > S.rows())
    throw Error(ErrorKind::Contract, "sym_eig_topk: k = " + std::to_string(k) +
                                         " exceeds matrix order " + std::to_string(S.rows()));
  EigenResult full = sym_eig(S);
  full.eigenvalues.conservativeResize(k);
  full.eigenvectors.conservativeResize(Eigen::NoChange, k);
  return full;
}

Matrix scaled_eigvecs_to_factors(const EigenResult& eig, Eigen::Index T) {
  if (eig.eigenvectors.rows() != T)
    throw Error(ErrorKind::Contract, "scaled_eigvecs_to_factors: eigenvectors have " +
                                         std::to_string(eig.eigenvectors.rows()) +
                                         " rows, expected T = " + std::to_string(T));
  return std::sqrt(static_cast<double>(T)) * eig.eigenvectors;
}

Matrix orthonormal_basis(const Matrix& X, std::string_view name) {
  require_finite(X, name);
  if (X.cols() == 0) return Matrix(X.rows(), 0);
  if (X.cols() > X.rows())
    throw Error(ErrorKind::Numeric, std::string(name) + " has more columns than rows");
  Eigen::JacobiSVD<Matrix> svd(X);
  const Vector& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) < 1e-12 * sv(0))
    throw Error(ErrorKind::Numeric, std::string(name) + " is rank deficient");
  Eigen::HouseholderQR<Matrix> qr(X);
  return qr.householderQ() * Matrix::Identity(X.rows(), X.cols());
}

double projection_distance(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows())
    throw Error(ErrorKind::Contract, "projection_distance: row counts differ (" +
                                         std::to_string(A.rows()) + " vs " +
                                         std::to_string(B.rows()) + ")");
  const Matrix Qa = orthonormal_basis(A, "projection_distance argument A");
  const Matrix Qb = orthonormal_basis(B, "projection_distance argument B");
  const Matrix diff = Qa * Qa.transpose() - Qb * Qb.transpose();
  return diff.norm();
}

}  // namespace trifactor::linalg
