#include "trifactor/simulate.hpp"

#include <cmath>
#include <string>

#include "trifactor/linalg.hpp"
#include "trifactor/parallel.hpp"
#include "trifactor/rng.hpp"

namespace trifactor {

namespace {

// T x r AR(1) block, started from the stationary distribution.
Matrix ar1_block(CounterRng& rng, std::size_t T, std::size_t r, double phi) {
  Matrix X(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(r));
  const double start_scale = 1.0 / std::sqrt(1.0 - phi * phi);
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
      const double v = rng.normal();
      X(t, k) = t == 0 ? start_scale * v : phi * X(t - 1, k) + v;
    }
  }
  return X;
}

Matrix normal_block(CounterRng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    for (Eigen::Index c = 0; c < X.cols(); ++c) X(r, c) = scale * rng.normal();
  return X;
}

void add_indicator(RateTriple& acc, std::size_t estimated, std::size_t truth, double weight) {
  if (estimated == truth)
    acc.correct += weight;
  else if (estimated < truth)
    acc.under += weight;
  else
    acc.over += weight;
}

void check_pairing(const std::vector<Decomposition>& estimates, const std::vector<SimTruth>& truths) {
  if (estimates.size() != truths.size())
    throw Error(ErrorKind::Contract, "metrics: " + std::to_string(estimates.size()) +
                                         " estimates but " + std::to_string(truths.size()) +
                                         " truths");
  if (estimates.empty()) throw Error(ErrorKind::Contract, "metrics: no replications");
}

}  // namespace

void DgpConfig::validate() const {
  if (M == 0 || N == 0 || T == 0) throw Error(ErrorKind::Contract, "DGP dimensions must be positive");
  if (r_E.size() != M || r_I.size() != N)
    throw Error(ErrorKind::Contract, "DGP rank lists must have lengths M and N");
  for (double phi : {phi_g, phi_E, phi_I, phi_u})
    if (!(std::abs(phi) < 1.0))
      throw Error(ErrorKind::Contract, "AR(1) coefficients must satisfy |phi| < 1");
}

SimDraw gen_dgp(const DgpConfig& c) {
  c.validate();
  const std::size_t M = c.M, N = c.N, T = c.T;
  auto stream = [&](StreamTag tag) { return CounterRng(c.seed, c.cell, c.replication, tag); };

  SimTruth truth;
  {
    CounterRng rng = stream(StreamTag::GlobalFactors);
    truth.G = ar1_block(rng, T, c.r_g, c.phi_g);
  }
  {
    CounterRng rng = stream(StreamTag::ExporterFactors);
    truth.F_E.reserve(M);
    for (std::size_t i = 0; i < M; ++i) truth.F_E.push_back(ar1_block(rng, T, c.r_E[i], c.phi_E));
  }
  {
    CounterRng rng = stream(StreamTag::ImporterFactors);
    truth.F_I.reserve(N);
    for (std::size_t j = 0; j < N; ++j) truth.F_I.push_back(ar1_block(rng, T, c.r_I[j], c.phi_I));
  }
  {
    CounterRng rng = stream(StreamTag::GlobalLoadings);
    truth.Gamma = normal_block(rng, M * N, c.r_g, c.loading_scale);
  }
  {
    CounterRng rng = stream(StreamTag::ExporterLoadings);
    truth.Lambda_E.reserve(M);
    for (std::size_t i = 0; i < M; ++i)
      truth.Lambda_E.push_back(normal_block(rng, N, c.r_E[i], c.loading_scale));
  }
  {
    CounterRng rng = stream(StreamTag::ImporterLoadings);
    truth.Lambda_I.reserve(N);
    for (std::size_t j = 0; j < N; ++j)
      truth.Lambda_I.push_back(normal_block(rng, M, c.r_I[j], c.loading_scale));
  }
  truth.U.assign(M * N * T, 0.0);
  if (c.noise_scale != 0.0) {
    CounterRng rng = stream(StreamTag::Errors);
    const double start_scale = 1.0 / std::sqrt(1.0 - c.phi_u * c.phi_u);
    const std::size_t MN = M * N;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t p = 0; p < MN; ++p) {
        const double e = rng.normal();
        truth.U[p + MN * t] = t == 0 ? start_scale * e : c.phi_u * truth.U[p + MN * (t - 1)] + e;
      }
    for (double& u : truth.U) u *= c.noise_scale;
  }

  // Y = Gamma G' + exporter and importer blocks + U, built in stacked form.
  Matrix Y = Eigen::Map<const Matrix>(truth.U.data(), static_cast<Eigen::Index>(M * N),
                                      static_cast<Eigen::Index>(T));
  if (c.r_g > 0) Y.noalias() += truth.Gamma * truth.G.transpose();
  for (std::size_t j = 0; j < N; ++j)
    if (c.r_I[j] > 0)
      Y.middleRows(static_cast<Eigen::Index>(j * M), static_cast<Eigen::Index>(M)).noalias() +=
          truth.Lambda_I[j] * truth.F_I[j].transpose();
  for (std::size_t i = 0; i < M; ++i) {
    if (c.r_E[i] == 0) continue;
    const Matrix part = truth.Lambda_E[i] * truth.F_E[i].transpose();
    for (std::size_t j = 0; j < N; ++j)
      Y.row(static_cast<Eigen::Index>(stacked_row(i, j, M))) += part.row(static_cast<Eigen::Index>(j));
  }

  std::vector<double> values(Y.data(), Y.data() + Y.size());
  return SimDraw{PanelTensor(M, N, T, std::move(values)), std::move(truth)};
}

DgpConfig DgpTemplate::expand(std::size_t M, std::size_t N, std::size_t T, std::uint32_t cell,
                              std::uint32_t replication) const {
  DgpConfig c;
  c.M = M;
  c.N = N;
  c.T = T;
  c.r_g = r_g;
  c.r_E.assign(M, r_E);
  c.r_I.assign(N, r_I);
  c.phi_g = phi_g;
  c.phi_E = phi_E;
  c.phi_I = phi_I;
  c.phi_u = phi_u;
  c.loading_scale = loading_scale;
  c.noise_scale = noise_scale;
  c.seed = seed;
  c.cell = cell;
  c.replication = replication;
  return c;
}

DgpTemplate dgp1(std::uint64_t seed) {
  DgpTemplate d;
  d.seed = seed;
  return d;
}

DgpTemplate dgp2(std::uint64_t seed) {
  DgpTemplate d;
  d.phi_g = d.phi_E = d.phi_I = d.phi_u = 0.5;
  d.seed = seed;
  return d;
}

ReplicationOutcome evaluate_replication(const Decomposition& est, const SimTruth& truth) {
  const std::size_t M = est.M, N = est.N;
  if (truth.F_E.size() != M || truth.F_I.size() != N ||
      static_cast<std::size_t>(truth.G.rows()) != est.T)
    throw Error(ErrorKind::Contract, "evaluate_replication: estimate and truth shapes differ");

  ReplicationOutcome out;
  const auto r_g = static_cast<std::size_t>(truth.G.cols());
  add_indicator(out.global, est.global.rank, r_g, 1.0);
  const double dG = linalg::projection_distance(est.global.factors, truth.G);
  out.sq_dist_G = dG * dG;

  for (std::size_t i = 0; i < M; ++i) {
    add_indicator(out.exporter, est.exporters[i].rank, static_cast<std::size_t>(truth.F_E[i].cols()),
                  1.0 / static_cast<double>(M));
    const double d = linalg::projection_distance(est.exporters[i].factors, truth.F_E[i]);
    out.sq_dist_E += d * d / static_cast<double>(M);
  }
  for (std::size_t j = 0; j < N; ++j) {
    add_indicator(out.importer, est.importers[j].rank, static_cast<std::size_t>(truth.F_I[j].cols()),
                  1.0 / static_cast<double>(N));
    const double d = linalg::projection_distance(est.importers[j].factors, truth.F_I[j]);
    out.sq_dist_I += d * d / static_cast<double>(N);
  }
  return out;
}

SelectionRates aggregate_rates(const std::vector<ReplicationOutcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorKind::Contract, "aggregate_rates: no replications");
  SelectionRates acc;
  auto add = [](RateTriple& a, const RateTriple& b) {
    a.correct += b.correct;
    a.under += b.under;
    a.over += b.over;
  };
  for (const auto& o : outcomes) {
    add(acc.global, o.global);
    add(acc.exporter, o.exporter);
    add(acc.importer, o.importer);
  }
  const double L = static_cast<double>(outcomes.size());
  for (RateTriple* t : {&acc.global, &acc.exporter, &acc.importer}) {
    t->correct /= L;
    t->under /= L;
    t->over /= L;
  }
  return acc;
}

RmseTriple aggregate_rmse(const std::vector<ReplicationOutcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorKind::Contract, "aggregate_rmse: no replications");
  RmseTriple acc;
  for (const auto& o : outcomes) {
    acc.G += o.sq_dist_G;
    acc.E += o.sq_dist_E;
    acc.I += o.sq_dist_I;
  }
  const double L = static_cast<double>(outcomes.size());
  return RmseTriple{std::sqrt(acc.G / L), std::sqrt(acc.E / L), std::sqrt(acc.I / L)};
}

SelectionRates selection_metrics(const std::vector<Decomposition>& estimates,
                                 const std::vector<SimTruth>& truths) {
  check_pairing(estimates, truths);
  std::vector<ReplicationOutcome> outcomes;
  outcomes.reserve(estimates.size());
  for (std::size_t l = 0; l < estimates.size(); ++l)
    outcomes.push_back(evaluate_replication(estimates[l], truths[l]));
  return aggregate_rates(outcomes);
}

RmseTriple rmse_metrics(const std::vector<Decomposition>& estimates,
                        const std::vector<SimTruth>& truths) {
  check_pairing(estimates, truths);
  std::vector<ReplicationOutcome> outcomes;
  outcomes.reserve(estimates.size());
  for (std::size_t l = 0; l < estimates.size(); ++l)
    outcomes.push_back(evaluate_replication(estimates[l], truths[l]));
  return aggregate_rmse(outcomes);
}

McReport run_monte_carlo(const DgpTemplate& dgp, const std::vector<Dims>& dims, std::size_t reps,
                         std::size_t k_max, std::size_t threads) {
  if (reps == 0) throw Error(ErrorKind::Contract, "run_monte_carlo: reps must be at least 1");

  McReport report;
  report.seed = dgp.seed;
  report.k_max = k_max;

  DecomposeConfig cfg;
  cfg.k_max = k_max;
  cfg.threads = 1;

  for (std::size_t cell = 0; cell < dims.size(); ++cell) {
    const Dims d = dims[cell];
    std::vector<ReplicationOutcome> outcomes(reps);
    parallel_for(reps, threads, [&](std::size_t rep) {
      try {
        const DgpConfig config = dgp.expand(d.M, d.N, d.T, static_cast<std::uint32_t>(cell),
                                            static_cast<std::uint32_t>(rep));
        const SimDraw draw = gen_dgp(config);
        outcomes[rep] = evaluate_replication(decompose(draw.panel, cfg), draw.truth);
      } catch (const Error& e) {
        throw e.with_context("cell (" + std::to_string(d.M) + "," + std::to_string(d.N) + "," +
                             std::to_string(d.T) + ") replication " + std::to_string(rep + 1));
      }
    });
    McCell out;
    out.M = d.M;
    out.N = d.N;
    out.T = d.T;
    out.rates = aggregate_rates(outcomes);
    out.rmse = aggregate_rmse(outcomes);
    out.replications = reps;
    report.cells.push_back(out);
  }
  return report;
}

}  // namespace trifactor
