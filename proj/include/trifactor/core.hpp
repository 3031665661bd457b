#pragma once

// Domain types for a three-way (exporter x importer x time) panel and the
// stacked row layout shared by every estimation step.
//
// Indices are 0-based in code. Anything shown to a user (labels, error
// messages) is 1-based.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "trifactor/errors.hpp"

namespace trifactor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observed panel y(i, j, t). Storage is a flat buffer with the exporter
/// index fastest, then importer, then time, so column t of the stacked
/// MN x T matrix is a contiguous run.
class PanelTensor {
 public:
  /// `values` has length M*N*T in the layout described above.
  PanelTensor(std::size_t M, std::size_t N, std::size_t T,
              std::vector<double> values,
              std::vector<std::string> exporter_labels = {},
              std::vector<std::string> importer_labels = {},
              std::vector<std::string> period_labels = {});

  /// All-zero panel with default labels.
  static PanelTensor zeros(std::size_t M, std::size_t N, std::size_t T);

  std::size_t M() const noexcept { return M_; }
  std::size_t N() const noexcept { return N_; }
  std::size_t T() const noexcept { return T_; }

  double operator()(std::size_t i, std::size_t j, std::size_t t) const noexcept {
    return values_[i + M_ * (j + N_ * t)];
  }
  /// Bounds-checked access; throws Index.
  double at(std::size_t i, std::size_t j, std::size_t t) const;

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& exporter_labels() const noexcept { return exporter_labels_; }
  const std::vector<std::string>& importer_labels() const noexcept { return importer_labels_; }
  const std::vector<std::string>& period_labels() const noexcept { return period_labels_; }

  friend bool operator==(const PanelTensor&, const PanelTensor&) = default;

 private:
  std::size_t M_, N_, T_;
  std::vector<double> values_;
  std::vector<std::string> exporter_labels_;
  std::vector<std::string> importer_labels_;
  std::vector<std::string> period_labels_;
};

/// Row of pair (i, j) in the stacked matrix: exporter fastest within each
/// importer block.
constexpr std::size_t stacked_row(std::size_t i, std::size_t j, std::size_t M) noexcept {
  return j * M + i;
}

struct StackedPanel {
  Matrix matrix;  // MN x T
  std::size_t M = 0;
  std::size_t N = 0;

  std::size_t row(std::size_t i, std::size_t j) const noexcept { return stacked_row(i, j, M); }
};

StackedPanel stack(const PanelTensor& panel);

/// Inverse of stack(); labels are taken from `like` when given.
PanelTensor unstack(const StackedPanel& stacked, const PanelTensor* like = nullptr);

/// Y_{I,j}: M x T, row i is the series of pair (i, j).
Matrix slice_importer(const PanelTensor& panel, std::size_t j);

/// Y_{E,i}: N x T, row j is the series of pair (i, j).
Matrix slice_exporter(const PanelTensor& panel, std::size_t i);

enum class Side { Exporter, Importer };

std::string_view to_string(Side side) noexcept;

struct GlobalBlock {
  Matrix factors;                  // T x r_hat, (1/T) G'G = I
  Matrix loadings;                 // MN x r_hat, stacked row order
  std::vector<double> eigenvalues; // top k_max, descending
  std::size_t rank = 0;
  double omega = 0.0;
};

struct CountryBlock {
  Side side = Side::Exporter;
  std::size_t country = 0;
  Matrix factors;                  // T x r_hat
  Matrix loadings;                 // N x r_hat (exporter) or M x r_hat (importer)
  std::vector<double> eigenvalues;
  std::size_t rank = 0;
};

/// Residuals share PanelTensor's flat layout (exporter fastest).
struct Decomposition {
  std::size_t M = 0, N = 0, T = 0;
  GlobalBlock global;
  std::vector<CountryBlock> exporters;  // size M
  std::vector<CountryBlock> importers;  // size N
  std::vector<double> residuals;        // M*N*T
  std::vector<std::string> warnings;

  double residual(std::size_t i, std::size_t j, std::size_t t) const noexcept {
    return residuals[i + M * (j + N * t)];
  }
  /// gamma_ij' g_t
  double global_part(std::size_t i, std::size_t j, std::size_t t) const;
  /// lambda_E,ij' f_E,it
  double exporter_part(std::size_t i, std::size_t j, std::size_t t) const;
  /// lambda_I,ij' f_I,jt
  double importer_part(std::size_t i, std::size_t j, std::size_t t) const;
};

}  // namespace trifactor
