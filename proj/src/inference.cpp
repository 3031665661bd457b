#include "trifactor/inference.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace trifactor {

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::Domain, "confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + level));
}

FactorBand factor_band(const Matrix& loadings, const Matrix& factors, const Matrix& composite,
                       double level) {
  const double z = normal_critical_value(level);
  const Eigen::Index n = loadings.rows();
  const Eigen::Index r = loadings.cols();
  const Eigen::Index T = factors.rows();
  if (factors.cols() != r || composite.rows() != n || composite.cols() != T)
    throw Error(ErrorKind::Contract, "factor_band: loadings, factors and composite shapes disagree");

  FactorBand band;
  band.level = level;
  band.center = factors;
  band.half_width = Matrix::Zero(T, r);
  if (r == 0) return band;

  const double dn = static_cast<double>(n);
  const Matrix sigma = loadings.transpose() * loadings / dn;
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success || sigma.diagonal().minCoeff() <= 0.0)
    throw Error(ErrorKind::Numeric, "factor_band: loading second-moment matrix is singular");
  const Matrix sigma_inv = llt.solve(Matrix::Identity(r, r));

  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector w = composite.col(t).array().square();
    const Matrix phi = loadings.transpose() * w.asDiagonal() * loadings / dn;
    const Matrix var = sigma_inv * phi * sigma_inv / dn;
    for (Eigen::Index k = 0; k < r; ++k) band.half_width(t, k) = z * std::sqrt(std::max(0.0, var(k, k)));
  }
  return band;
}

FactorBand global_band(const Decomposition& d, double level) {
  const std::size_t M = d.M, N = d.N, T = d.T;
  Matrix composite(static_cast<Eigen::Index>(M * N), static_cast<Eigen::Index>(T));
  if (d.global.rank > 0) {
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < M; ++i)
          composite(static_cast<Eigen::Index>(stacked_row(i, j, M)), static_cast<Eigen::Index>(t)) =
              d.exporter_part(i, j, t) + d.importer_part(i, j, t) + d.residual(i, j, t);
  }
  return factor_band(d.global.loadings, d.global.factors, composite, level);
}

FactorBand country_band(const Decomposition& d, Side side, std::size_t index, double level) {
  const std::size_t M = d.M, N = d.N, T = d.T;
  if (side == Side::Importer) {
    if (index >= N)
      throw Error(ErrorKind::Index, "importer index " + std::to_string(index + 1) + " outside 1.." +
                                        std::to_string(N));
    const CountryBlock& b = d.importers[index];
    Matrix composite(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < M; ++i)
        composite(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
            d.exporter_part(i, index, t) + d.residual(i, index, t);
    return factor_band(b.loadings, b.factors, composite, level);
  }
  if (index >= M)
    throw Error(ErrorKind::Index, "exporter index " + std::to_string(index + 1) + " outside 1.." +
                                      std::to_string(M));
  const CountryBlock& b = d.exporters[index];
  Matrix composite(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < N; ++j)
      composite(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) =
          d.importer_part(index, j, t) + d.residual(index, j, t);
  return factor_band(b.loadings, b.factors, composite, level);
}

Matrix align_truth(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows())
    throw Error(ErrorKind::Contract, "align_truth: row counts differ");
  if (truth.cols() == 0) return Matrix::Zero(estimate.rows(), estimate.cols());
  const Matrix H = truth.colPivHouseholderQr().solve(estimate);
  return truth * H;
}

CoverageCount band_coverage(const FactorBand& band, const Matrix& target,
                            const std::vector<std::size_t>& rows) {
  if (target.rows() != band.center.rows() || target.cols() != band.center.cols())
    throw Error(ErrorKind::Contract, "band_coverage: target shape differs from band");
  CoverageCount out;
  for (std::size_t t : rows) {
    if (t >= static_cast<std::size_t>(target.rows()))
      throw Error(ErrorKind::Index, "band_coverage: time index " + std::to_string(t + 1) + " out of range");
    const auto tt = static_cast<Eigen::Index>(t);
    for (Eigen::Index k = 0; k < target.cols(); ++k) {
      ++out.total;
      if (std::abs(band.center(tt, k) - target(tt, k)) <= band.half_width(tt, k)) ++out.covered;
    }
  }
  return out;
}

}  // namespace trifactor
