#pragma once

// Simulation designs with AR(1) factors and errors, the Monte Carlo runner,
// and the selection-rate and projection-RMSE metrics.

#include <array>
#include <cstdint>
#include <vector>

#include "trifactor/core.hpp"
#include "trifactor/estimator.hpp"

namespace trifactor {

struct DgpConfig {
  std::size_t M = 0, N = 0, T = 0;
  std::size_t r_g = 0;
  std::vector<std::size_t> r_E;  // length M
  std::vector<std::size_t> r_I;  // length N
  double phi_g = 0.0, phi_E = 0.0, phi_I = 0.0, phi_u = 0.0;
  double loading_scale = 1.0;  // multiplies every loading draw
  double noise_scale = 1.0;    // multiplies u; 0 gives a noise-free panel
  std::uint64_t seed = 0;
  // Stream coordinates: each (seed, cell, replication) is an independent draw.
  std::uint32_t cell = 0;
  std::uint32_t replication = 0;

  void validate() const;
};

struct SimTruth {
  Matrix G;                       // T x r_g
  std::vector<Matrix> F_E;        // M entries, T x r_E,i
  std::vector<Matrix> F_I;        // N entries, T x r_I,j
  Matrix Gamma;                   // MN x r_g, stacked rows
  std::vector<Matrix> Lambda_E;   // M entries, N x r_E,i
  std::vector<Matrix> Lambda_I;   // N entries, M x r_I,j
  std::vector<double> U;          // M*N*T, panel layout
};

struct SimDraw {
  PanelTensor panel;
  SimTruth truth;
};

SimDraw gen_dgp(const DgpConfig& config);

/// Uniform-rank template expanded per (M, N, T) cell.
struct DgpTemplate {
  std::size_t r_g = 3, r_E = 2, r_I = 1;
  double phi_g = 0.0, phi_E = 0.0, phi_I = 0.0, phi_u = 0.0;
  double loading_scale = 1.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;

  DgpConfig expand(std::size_t M, std::size_t N, std::size_t T, std::uint32_t cell,
                   std::uint32_t replication) const;
};

/// i.i.d. design: all phi = 0, ranks (3, 2, 1).
DgpTemplate dgp1(std::uint64_t seed);
/// Serially correlated design: all phi = 0.5, ranks (3, 2, 1).
DgpTemplate dgp2(std::uint64_t seed);

struct RateTriple {
  double correct = 0.0, under = 0.0, over = 0.0;
};

struct SelectionRates {
  RateTriple global, exporter, importer;
};

struct RmseTriple {
  double G = 0.0, E = 0.0, I = 0.0;
};

/// Per-replication summary; averages over countries are already taken.
struct ReplicationOutcome {
  RateTriple global, exporter, importer;
  double sq_dist_G = 0.0;  // ||P_Ghat - P_G||_F^2
  double sq_dist_E = 0.0;  // mean over i
  double sq_dist_I = 0.0;  // mean over j
};

ReplicationOutcome evaluate_replication(const Decomposition& estimate, const SimTruth& truth);

SelectionRates aggregate_rates(const std::vector<ReplicationOutcome>& outcomes);
RmseTriple aggregate_rmse(const std::vector<ReplicationOutcome>& outcomes);

SelectionRates selection_metrics(const std::vector<Decomposition>& estimates,
                                 const std::vector<SimTruth>& truths);
RmseTriple rmse_metrics(const std::vector<Decomposition>& estimates,
                        const std::vector<SimTruth>& truths);

struct McCell {
  std::size_t M = 0, N = 0, T = 0;
  SelectionRates rates;
  RmseTriple rmse;
  std::size_t replications = 0;
};

struct McReport {
  std::vector<McCell> cells;
  std::uint64_t seed = 0;
  std::size_t k_max = 0;
};

struct Dims {
  std::size_t M = 0, N = 0, T = 0;
};

/// Replications run in parallel over `threads` workers (0 = hardware);
/// results are bitwise identical for any thread count.
McReport run_monte_carlo(const DgpTemplate& dgp, const std::vector<Dims>& dims, std::size_t reps,
                         std::size_t k_max, std::size_t threads);

}  // namespace trifactor
