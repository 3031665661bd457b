#pragma once

// Long-format CSV ingestion, loss-free number formatting, atomic file
// writes and the serialized forms of decompositions and Monte Carlo reports.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trifactor/core.hpp"
#include "trifactor/selection.hpp"
#include "trifactor/simulate.hpp"

namespace trifactor::io {

using Json = nlohmann::ordered_json;

struct LoadOptions {
  // Rows with exporter == importer are rejected unless set. When the two
  // label sets overlap and self-pairs are not allowed, the (k, k, t) cells
  // are structural zeros and need not appear in the file.
  bool allow_self_pairs = false;
};

/// Reads `exporter,importer,period,value`. Exporter and importer labels are
/// sorted lexicographically; periods keep their order of first appearance.
PanelTensor load_long_csv(const std::filesystem::path& path, const LoadOptions& options = {});
PanelTensor parse_long_csv(std::istream& in, const LoadOptions& options = {},
                           std::string_view source = "<input>");

/// One row per cell, periods outermost so that reloading keeps period order.
/// Self-pair cells holding exactly 0 are treated as structural and skipped.
void write_panel(const std::filesystem::path& path, const PanelTensor& panel);
std::string panel_csv(const PanelTensor& panel);

/// %.17g, which round-trips every finite double.
std::string format_real(double x);

/// Writes to a sibling temporary file and renames it into place. Parent
/// directories are created.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct Rescaled {
  Vector values;
  std::optional<std::string> warning;
};

/// Min-max map onto [0, 1]; a constant vector maps to 0.5 with a warning.
Rescaled rescale_global_loadings(const Vector& column);
/// Division by the largest absolute entry; all-zero input is returned as is
/// with a warning.
Rescaled rescale_country_loadings(const Vector& column);

Json to_json(const SelectionDiagnostics& diag);
Json to_json(const McReport& report);
/// One row per cell: M,N,T, nine selection rates, three RMSEs, replications.
std::string mc_report_csv(const McReport& report);

struct DecomposeOutputOptions {
  double level = 0.95;
};

/// Writes the full decomposition artifact set under `dir` and returns the
/// warnings raised while producing it (decomposition warnings included).
std::vector<std::string> write_decomposition(const std::filesystem::path& dir,
                                             const PanelTensor& panel,
                                             const Decomposition& decomp,
                                             const DecomposeOutputOptions& options = {});

/// Ranks with every block's selection diagnostics.
Json ranks_json(const PanelTensor& panel, const Decomposition& decomp);
/// Sum of squares, R^2 and per-component shares of the fit.
Json residual_stats_json(const Decomposition& decomp);

/// Label turned into a file name: characters outside [A-Za-z0-9._-] become
/// '_'. Collisions within one directory get a numeric suffix.
std::vector<std::string> file_stems(const std::vector<std::string>& labels);

}  // namespace trifactor::io
