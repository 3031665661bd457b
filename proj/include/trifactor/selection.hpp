#pragma once

// Thresholded eigenvalue-ratio rule for choosing a factor count, shared by
// the global step and every country-level step.

#include <cstddef>
#include <vector>

#include "trifactor/errors.hpp"

namespace trifactor {

struct SelectionDiagnostics {
  std::vector<double> eigenvalues;       // rho_1..rho_kmax after clamping at 0
  double mock = 1.0;                     // rho_0
  double omega = 0.0;
  std::vector<double> ratios;            // rho_{k+1}/rho_k, k = 0..kmax-1 (NaN if rho_k = 0)
  std::vector<double> criterion_values;  // k = 0..kmax
  std::size_t chosen_k = 0;
};

/// 1 / ln(max{M, N, T}). Throws Domain when the maximum is <= 1.
double omega(std::size_t M, std::size_t N, std::size_t T);

/// Ratio criterion with mock eigenvalue rho_0 = 1:
///
///   c_k = (rho_{k+1} / rho_k) * 1(rho_k >= omega) + 1(rho_k < omega),  k < kmax
///   c_kmax = 1
///
/// and chosen_k = argmin c_k with ties to the smallest k. The ratio at
/// k = kmax would need rho_{kmax+1}, so that position never wins outright. rho_k = 0 always
/// takes the threshold branch. Tiny negatives (>= -1e-10 relative) are
/// clamped to zero; an increasing ladder throws Contract.
SelectionDiagnostics select_rank(const std::vector<double>& eigenvalues, double omega);

}  // namespace trifactor
