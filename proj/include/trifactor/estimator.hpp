#pragma once

// Two-step estimation of the global / exporter / importer factor structure.
//
// Step 1 extracts global factors from the T x T Gram of the stacked panel.
// Step 2 removes the fitted global component and, independently for every
// importer and every exporter, extracts that country's own factors from its
// deflated slice. Both parts of Step 2 read the same Step-1 output.

#include <cstddef>
#include <optional>

#include "trifactor/core.hpp"
#include "trifactor/selection.hpp"

namespace trifactor {

struct DecomposeConfig {
  std::size_t k_max = 8;
  std::optional<double> omega_override;
  bool standardize = false;
  std::size_t threads = 1;  // 0 = all hardware threads
};

GlobalBlock estimate_global(const PanelTensor& panel, std::size_t k_max, double omega);

/// Y_{I,j} - Gamma_{I,j} G' (M x T).
Matrix deflated_importer_slice(const PanelTensor& panel, const GlobalBlock& global, std::size_t j);

/// Y_{E,i} - Gamma_{E,i} G' (N x T).
Matrix deflated_exporter_slice(const PanelTensor& panel, const GlobalBlock& global, std::size_t i);

CountryBlock estimate_importer(const PanelTensor& panel, const GlobalBlock& global, std::size_t j,
                               std::size_t k_max, double omega);

CountryBlock estimate_exporter(const PanelTensor& panel, const GlobalBlock& global, std::size_t i,
                               std::size_t k_max, double omega);

/// Demeans each (i, j) series and scales it to unit (population) variance.
/// Constant series are left at zero after demeaning.
PanelTensor standardize_series(const PanelTensor& panel);

/// Full pipeline. Residuals are y minus all three fitted components.
Decomposition decompose(const PanelTensor& panel, const DecomposeConfig& config = {});

/// Selection diagnostics for a fitted block (recomputed from its ladder).
SelectionDiagnostics diagnostics(const GlobalBlock& global);
SelectionDiagnostics diagnostics(const CountryBlock& block, double omega);

}  // namespace trifactor
