#include "trifactor/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trifactor/errors.hpp"

namespace trifactor {

double omega(std::size_t M, std::size_t N, std::size_t T) {
  const std::size_t largest = std::max({M, N, T});
  if (largest <= 1)
    throw Error(ErrorKind::Domain, "omega: max{M,N,T} must exceed 1, got " +
                                       std::to_string(largest));
  return 1.0 / std::log(static_cast<double>(largest));
}

SelectionDiagnostics select_rank(const std::vector<double>& eigenvalues, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw Error(ErrorKind::Contract, "select_rank: omega must be positive and finite");

  SelectionDiagnostics out;
  out.omega = omega;
  out.eigenvalues = eigenvalues;

  double scale = 1.0;
  for (double v : eigenvalues) {
    if (!std::isfinite(v))
      throw Error(ErrorKind::Numeric, "select_rank: non-finite eigenvalue");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t k = 0; k < out.eigenvalues.size(); ++k) {
    double& v = out.eigenvalues[k];
    if (v < 0.0) {
      if (v < -1e-10 * scale)
        throw Error(ErrorKind::Contract, "select_rank: eigenvalue " + std::to_string(k + 1) +
                                             " is negative beyond roundoff");
      v = 0.0;
    }
    if (k > 0 && v > out.eigenvalues[k - 1] + 1e-12 * scale)
      throw Error(ErrorKind::Contract, "select_rank: eigenvalue ladder increases at position " +
                                           std::to_string(k + 1));
  }

  const std::size_t kmax = out.eigenvalues.size();
  auto rho = [&](std::size_t k) { return k == 0 ? out.mock : out.eigenvalues[k - 1]; };

  out.ratios.resize(kmax);
  out.criterion_values.resize(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double rk = rho(k);
    if (k < kmax)
      out.ratios[k] = rk > 0.0 ? rho(k + 1) / rk : std::numeric_limits<double>::quiet_NaN();
    const bool above = rk > 0.0 && rk >= omega;
    // No rho_{kmax+1} exists, so the last position carries the neutral value.
    if (k == kmax)
      out.criterion_values[k] = 1.0;
    else
      out.criterion_values[k] = above ? out.ratios[k] : 1.0;
  }

  out.chosen_k = 0;
  for (std::size_t k = 1; k <= kmax; ++k)
    if (out.criterion_values[k] < out.criterion_values[out.chosen_k]) out.chosen_k = k;
  return out;
}

}  // namespace trifactor
