#pragma once

// Pointwise normal confidence bands for estimated factors using a
// cross-sectional heteroskedasticity-robust plug-in for the limiting
// covariance Sigma^{-1} Phi_t Sigma^{-1}.

#include <cstddef>
#include <vector>

#include "trifactor/core.hpp"

namespace trifactor {

struct FactorBand {
  Matrix center;      // T x r
  Matrix half_width;  // T x r
  double level = 0.95;

  Matrix lower() const { return center - half_width; }
  Matrix upper() const { return center + half_width; }
};

/// Two-sided normal critical value z_{(1+level)/2}.
double normal_critical_value(double level);

/// Band for factors estimated from an n-unit cross-section.
///
///   Sigma   = (1/n) L'L
///   Phi_t   = (1/n) sum_k l_k l_k' v_kt^2
///   Var_t   = Sigma^{-1} Phi_t Sigma^{-1} / n
///
/// `loadings` is n x r, `factors` T x r, `composite` the n x T matrix of
/// v_kt (everything in the unit's series not explained by these factors).
FactorBand factor_band(const Matrix& loadings, const Matrix& factors, const Matrix& composite,
                       double level);

/// Global factors: composite = exporter part + importer part + residual.
FactorBand global_band(const Decomposition& decomp, double level);

/// Country factors. For importer j the composite at (i, j, t) is the exporter
/// part plus the residual; for exporter i it is the importer part plus the
/// residual.
FactorBand country_band(const Decomposition& decomp, Side side, std::size_t index, double level);

/// truth * H with H the least-squares regression of `estimate` on `truth`,
/// i.e. the truth expressed in the estimate's rotation. T x r_estimate.
Matrix align_truth(const Matrix& truth, const Matrix& estimate);

struct CoverageCount {
  std::size_t covered = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total); }
};

/// Counts |center - target| <= half_width over the given time rows and all
/// factor columns.
CoverageCount band_coverage(const FactorBand& band, const Matrix& target,
                            const std::vector<std::size_t>& rows);

}  // namespace trifactor
