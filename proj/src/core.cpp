#include "trifactor/core.hpp"

#include <cmath>

namespace trifactor {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Index: return "index";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Data: return "data";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(Side side) noexcept {
  return side == Side::Exporter ? "exporter" : "importer";
}

namespace {

std::vector<std::string> default_labels(std::size_t n) {
  // Zero-padded so lexicographic order equals numeric order.
  const std::size_t width = std::to_string(n).size();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    std::string s = std::to_string(k);
    out.push_back(std::string(width - s.size(), '0') + s);
  }
  return out;
}

void check_labels(std::vector<std::string>& labels, std::size_t n, const char* what) {
  if (labels.empty()) {
    labels = default_labels(n);
  } else if (labels.size() != n) {
    throw Error(ErrorKind::Contract, std::string(what) + " label count " +
                                         std::to_string(labels.size()) +
                                         " does not match dimension " + std::to_string(n));
  }
}

}  // namespace

PanelTensor::PanelTensor(std::size_t M, std::size_t N, std::size_t T,
                         std::vector<double> values,
                         std::vector<std::string> exporter_labels,
                         std::vector<std::string> importer_labels,
                         std::vector<std::string> period_labels)
    : M_(M), N_(N), T_(T),
      values_(std::move(values)),
      exporter_labels_(std::move(exporter_labels)),
      importer_labels_(std::move(importer_labels)),
      period_labels_(std::move(period_labels)) {
  if (M == 0 || N == 0 || T == 0)
    throw Error(ErrorKind::Contract, "panel dimensions must be positive");
  if (values_.size() != M * N * T)
    throw Error(ErrorKind::Contract, "panel holds " + std::to_string(values_.size()) +
                                         " values, expected M*N*T = " +
                                         std::to_string(M * N * T));
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      const std::size_t i = k % M, j = (k / M) % N, t = k / (M * N);
      throw Error(ErrorKind::Numeric, "non-finite value at (i,j,t) = (" +
                                          std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                          "," + std::to_string(t + 1) + ")");
    }
  }
  check_labels(exporter_labels_, M, "exporter");
  check_labels(importer_labels_, N, "importer");
  check_labels(period_labels_, T, "period");
}

PanelTensor PanelTensor::zeros(std::size_t M, std::size_t N, std::size_t T) {
  return PanelTensor(M, N, T, std::vector<double>(M * N * T, 0.0));
}

double PanelTensor::at(std::size_t i, std::size_t j, std::size_t t) const {
  if (i >= M_ || j >= N_ || t >= T_)
    throw Error(ErrorKind::Index, "index (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + "," + std::to_string(t + 1) +
                                      ") outside panel of size (" + std::to_string(M_) + "," +
                                      std::to_string(N_) + "," + std::to_string(T_) + ")");
  return (*this)(i, j, t);
}

StackedPanel stack(const PanelTensor& panel) {
  StackedPanel out;
  out.M = panel.M();
  out.N = panel.N();
  const auto rows = static_cast<Eigen::Index>(panel.M() * panel.N());
  const auto cols = static_cast<Eigen::Index>(panel.T());
  // The flat layout already is the column-major MN x T matrix.
  out.matrix = Eigen::Map<const Matrix>(panel.values().data(), rows, cols);
  return out;
}

PanelTensor unstack(const StackedPanel& stacked, const PanelTensor* like) {
  const std::size_t M = stacked.M, N = stacked.N;
  const auto T = static_cast<std::size_t>(stacked.matrix.cols());
  if (static_cast<std::size_t>(stacked.matrix.rows()) != M * N)
    throw Error(ErrorKind::Contract, "stacked matrix rows do not equal M*N");
  std::vector<double> values(M * N * T);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i < M; ++i)
        values[i + M * (j + N * t)] = stacked.matrix(static_cast<Eigen::Index>(stacked.row(i, j)),
                                                     static_cast<Eigen::Index>(t));
  if (like != nullptr)
    return PanelTensor(M, N, T, std::move(values), like->exporter_labels(),
                       like->importer_labels(), like->period_labels());
  return PanelTensor(M, N, T, std::move(values));
}

Matrix slice_importer(const PanelTensor& panel, std::size_t j) {
  if (j >= panel.N())
    throw Error(ErrorKind::Index, "importer index " + std::to_string(j + 1) +
                                      " outside 1.." + std::to_string(panel.N()));
  const auto M = static_cast<Eigen::Index>(panel.M());
  Matrix out(M, static_cast<Eigen::Index>(panel.T()));
  for (std::size_t t = 0; t < panel.T(); ++t)
    for (Eigen::Index i = 0; i < M; ++i)
      out(i, static_cast<Eigen::Index>(t)) = panel(static_cast<std::size_t>(i), j, t);
  return out;
}

Matrix slice_exporter(const PanelTensor& panel, std::size_t i) {
  if (i >= panel.M())
    throw Error(ErrorKind::Index, "exporter index " + std::to_string(i + 1) +
                                      " outside 1.." + std::to_string(panel.M()));
  const auto N = static_cast<Eigen::Index>(panel.N());
  Matrix out(N, static_cast<Eigen::Index>(panel.T()));
  for (std::size_t t = 0; t < panel.T(); ++t)
    for (Eigen::Index j = 0; j < N; ++j)
      out(j, static_cast<Eigen::Index>(t)) = panel(i, static_cast<std::size_t>(j), t);
  return out;
}

double Decomposition::global_part(std::size_t i, std::size_t j, std::size_t t) const {
  if (global.rank == 0) return 0.0;
  const auto row = static_cast<Eigen::Index>(stacked_row(i, j, M));
  return global.loadings.row(row).dot(global.factors.row(static_cast<Eigen::Index>(t)));
}

double Decomposition::exporter_part(std::size_t i, std::size_t j, std::size_t t) const {
  const CountryBlock& b = exporters[i];
  if (b.rank == 0) return 0.0;
  return b.loadings.row(static_cast<Eigen::Index>(j))
      .dot(b.factors.row(static_cast<Eigen::Index>(t)));
}

double Decomposition::importer_part(std::size_t i, std::size_t j, std::size_t t) const {
  const CountryBlock& b = importers[j];
  if (b.rank == 0) return 0.0;
  return b.loadings.row(static_cast<Eigen::Index>(i))
      .dot(b.factors.row(static_cast<Eigen::Index>(t)));
}

}  // namespace trifactor
