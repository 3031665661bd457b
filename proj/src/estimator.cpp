#include "trifactor/estimator.hpp"

#include <cmath>
#include <string>

#include "trifactor/linalg.hpp"
#include "trifactor/parallel.hpp"

namespace trifactor {

namespace {

struct PcaFit {
  Matrix factors;   // T x rank
  Matrix loadings;  // p x rank
  std::vector<double> eigenvalues;
  std::size_t rank = 0;
};

// PCA of (1/(pT)) X'X for X of shape p x T, rank by the ratio rule.
PcaFit pca_with_selection(const Matrix& X, std::size_t k_max, double omega) {
  const Eigen::Index p = X.rows();
  const Eigen::Index T = X.cols();
  const Matrix S = linalg::gram_scaled(X, 1.0 / (static_cast<double>(p) * static_cast<double>(T)));
  const linalg::EigenResult eig = linalg::sym_eig_topk(S, static_cast<Eigen::Index>(k_max));

  PcaFit fit;
  fit.eigenvalues.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
  fit.rank = select_rank(fit.eigenvalues, omega).chosen_k;

  const auto r = static_cast<Eigen::Index>(fit.rank);
  fit.factors = std::sqrt(static_cast<double>(T)) * eig.eigenvectors.leftCols(r);
  fit.loadings = (X * fit.factors) / static_cast<double>(T);
  return fit;
}

void check_k_max(std::size_t k_max, std::size_t cross_section, std::size_t T,
                 const char* cross_name) {
  if (k_max == 0) throw Error(ErrorKind::Config, "k_max must be at least 1");
  if (k_max >= T)
    throw Error(ErrorKind::Config, "k_max = " + std::to_string(k_max) +
                                       " must be smaller than T = " + std::to_string(T));
  if (k_max >= cross_section)
    throw Error(ErrorKind::Config, "k_max = " + std::to_string(k_max) + " must be smaller than " +
                                       cross_name + " = " + std::to_string(cross_section));
}

void check_global_matches(const PanelTensor& panel, const GlobalBlock& global) {
  if (static_cast<std::size_t>(global.factors.rows()) != panel.T() ||
      static_cast<std::size_t>(global.loadings.rows()) != panel.M() * panel.N())
    throw Error(ErrorKind::Contract, "global block does not match panel dimensions");
}

Matrix exporter_rows(const Matrix& stacked_rows, std::size_t i, std::size_t M, std::size_t N) {
  Matrix out(static_cast<Eigen::Index>(N), stacked_rows.cols());
  for (std::size_t j = 0; j < N; ++j)
    out.row(static_cast<Eigen::Index>(j)) =
        stacked_rows.row(static_cast<Eigen::Index>(stacked_row(i, j, M)));
  return out;
}

}  // namespace

GlobalBlock estimate_global(const PanelTensor& panel, std::size_t k_max, double omega) {
  check_k_max(k_max, panel.M() * panel.N(), panel.T(), "MN");
  const StackedPanel Y = stack(panel);
  PcaFit fit = pca_with_selection(Y.matrix, k_max, omega);

  GlobalBlock out;
  out.factors = std::move(fit.factors);
  out.loadings = std::move(fit.loadings);
  out.eigenvalues = std::move(fit.eigenvalues);
  out.rank = fit.rank;
  out.omega = omega;
  return out;
}

Matrix deflated_importer_slice(const PanelTensor& panel, const GlobalBlock& global, std::size_t j) {
  check_global_matches(panel, global);
  Matrix R = slice_importer(panel, j);
  if (global.rank > 0) {
    const auto M = static_cast<Eigen::Index>(panel.M());
    R.noalias() -= global.loadings.middleRows(static_cast<Eigen::Index>(j) * M, M) *
                   global.factors.transpose();
  }
  return R;
}

Matrix deflated_exporter_slice(const PanelTensor& panel, const GlobalBlock& global, std::size_t i) {
  check_global_matches(panel, global);
  Matrix R = slice_exporter(panel, i);
  if (global.rank > 0)
    R.noalias() -= exporter_rows(global.loadings, i, panel.M(), panel.N()) *
                   global.factors.transpose();
  return R;
}

CountryBlock estimate_importer(const PanelTensor& panel, const GlobalBlock& global, std::size_t j,
                               std::size_t k_max, double omega) {
  check_k_max(k_max, panel.M(), panel.T(), "M");
  PcaFit fit = pca_with_selection(deflated_importer_slice(panel, global, j), k_max, omega);
  CountryBlock out;
  out.side = Side::Importer;
  out.country = j;
  out.factors = std::move(fit.factors);
  out.loadings = std::move(fit.loadings);
  out.eigenvalues = std::move(fit.eigenvalues);
  out.rank = fit.rank;
  return out;
}

CountryBlock estimate_exporter(const PanelTensor& panel, const GlobalBlock& global, std::size_t i,
                               std::size_t k_max, double omega) {
  check_k_max(k_max, panel.N(), panel.T(), "N");
  PcaFit fit = pca_with_selection(deflated_exporter_slice(panel, global, i), k_max, omega);
  CountryBlock out;
  out.side = Side::Exporter;
  out.country = i;
  out.factors = std::move(fit.factors);
  out.loadings = std::move(fit.loadings);
  out.eigenvalues = std::move(fit.eigenvalues);
  out.rank = fit.rank;
  return out;
}

PanelTensor standardize_series(const PanelTensor& panel) {
  const std::size_t M = panel.M(), N = panel.N(), T = panel.T();
  std::vector<double> values = panel.values();
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < M; ++i) {
      double mean = 0.0;
      for (std::size_t t = 0; t < T; ++t) mean += panel(i, j, t);
      mean /= static_cast<double>(T);
      double ss = 0.0;
      for (std::size_t t = 0; t < T; ++t) ss += (panel(i, j, t) - mean) * (panel(i, j, t) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(T));
      for (std::size_t t = 0; t < T; ++t) {
        double& v = values[i + M * (j + N * t)];
        v -= mean;
        if (sd > 0.0) v /= sd;
      }
    }
  }
  return PanelTensor(M, N, T, std::move(values), panel.exporter_labels(),
                     panel.importer_labels(), panel.period_labels());
}

Decomposition decompose(const PanelTensor& input, const DecomposeConfig& config) {
  const PanelTensor standardized = config.standardize ? standardize_series(input) : PanelTensor(input);
  const PanelTensor& panel = standardized;
  const std::size_t M = panel.M(), N = panel.N(), T = panel.T();
  const double w = config.omega_override ? *config.omega_override : omega(M, N, T);
  if (!(w > 0.0) || !std::isfinite(w))
    throw Error(ErrorKind::Config, "omega override must be a positive finite number");

  Decomposition out;
  out.M = M;
  out.N = N;
  out.T = T;
  try {
    out.global = estimate_global(panel, config.k_max, w);
  } catch (const Error& e) {
    throw e.with_context("global step");
  }

  out.importers.resize(N);
  out.exporters.resize(M);
  parallel_for(N + M, config.threads, [&](std::size_t task) {
    if (task < N) {
      try {
        out.importers[task] = estimate_importer(panel, out.global, task, config.k_max, w);
      } catch (const Error& e) {
        throw e.with_context("importer " + std::to_string(task + 1) + " (" +
                             panel.importer_labels()[task] + ")");
      }
    } else {
      const std::size_t i = task - N;
      try {
        out.exporters[i] = estimate_exporter(panel, out.global, i, config.k_max, w);
      } catch (const Error& e) {
        throw e.with_context("exporter " + std::to_string(i + 1) + " (" +
                             panel.exporter_labels()[i] + ")");
      }
    }
  });

  // Residuals in the stacked layout, which coincides with the flat layout.
  Matrix fit = Matrix::Zero(static_cast<Eigen::Index>(M * N), static_cast<Eigen::Index>(T));
  if (out.global.rank > 0) fit.noalias() += out.global.loadings * out.global.factors.transpose();
  for (std::size_t j = 0; j < N; ++j) {
    const CountryBlock& b = out.importers[j];
    if (b.rank > 0)
      fit.middleRows(static_cast<Eigen::Index>(j * M), static_cast<Eigen::Index>(M)).noalias() +=
          b.loadings * b.factors.transpose();
  }
  for (std::size_t i = 0; i < M; ++i) {
    const CountryBlock& b = out.exporters[i];
    if (b.rank == 0) continue;
    const Matrix part = b.loadings * b.factors.transpose();  // N x T
    for (std::size_t j = 0; j < N; ++j)
      fit.row(static_cast<Eigen::Index>(stacked_row(i, j, M))) += part.row(static_cast<Eigen::Index>(j));
  }
  out.residuals = panel.values();
  for (Eigen::Index t = 0; t < fit.cols(); ++t)
    for (Eigen::Index r = 0; r < fit.rows(); ++r)
      out.residuals[static_cast<std::size_t>(r + fit.rows() * t)] -= fit(r, t);

  if (out.global.rank == config.k_max)
    out.warnings.push_back("global rank equals k_max = " + std::to_string(config.k_max) +
                           "; k_max may bind");
  for (const auto* blocks : {&out.exporters, &out.importers})
    for (const CountryBlock& b : *blocks)
      if (b.rank == config.k_max)
        out.warnings.push_back(std::string(to_string(b.side)) + " " +
                               std::to_string(b.country + 1) + " rank equals k_max = " +
                               std::to_string(config.k_max) + "; k_max may bind");
  return out;
}

SelectionDiagnostics diagnostics(const GlobalBlock& global) {
  return select_rank(global.eigenvalues, global.omega);
}

SelectionDiagnostics diagnostics(const CountryBlock& block, double omega) {
  return select_rank(block.eigenvalues, omega);
}

}  // namespace trifactor
