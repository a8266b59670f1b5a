// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pilotcap/model.hpp"

namespace pilotcap {

using ComplexMatrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

/// Independent generator for one trial, derived from (seed, trial) only.
Rng trial_stream(std::uint64_t seed, std::uint64_t trial);

/// M x K matrix of i.i.d. CN(0, 1) entries (real and imaginary parts N(0, 1/2)).
ComplexMatrix generate_channels(Index m_antennas, Index users, Rng& rng);

/// Least-squares estimate of every user's channel from its own pilot:
/// h_hat_i = sum_j rho_ij h_j + n_i, where n_i = S_i^T z and z ~ CN(0, sigma_z^2 I).
/// The training noise is drawn as N = Z S with Z an M x tau matrix of CN(0, sigma_z^2)
/// entries, which gives E[n_i n_j^H] = rho_ij sigma_z^2 I_M.
/// Throws Error(dimension_mismatch).
ComplexMatrix ls_estimate(const ComplexMatrix& channels, const PilotMatrix& pilots,
                          double sigma_z_sq, Rng& rng);

/// Columns normalised to unit norm. Throws Error(zero_norm_estimate).
ComplexMatrix mrt_precoders(const ComplexMatrix& estimates);

/// Per-user powers of one trial, or of the trial average.
struct TrialResult {
  Vector empirical_sinr;
  Vector signal_power;
  Vector interference_power;
  Vector noise_power;
};

/// Decomposition of the received power for one channel draw.
TrialResult evaluate_trial(const ComplexMatrix& channels, const ComplexMatrix& precoders,
                           const Vector& powers, double sigma_w_sq);

struct SinrEstimate {
  /// Component means; empirical_sinr is the ratio of the means.
  TrialResult mean;
  Vector se_signal;
  Vector se_interference;
  /// Delta-method standard error of the ratio of means.
  Vector se_sinr;
  Index trials = 0;
};

/// Monte Carlo estimate over scenario.n_trials independent draws; trial t uses
/// trial_stream(seed, t), so the result does not depend on the thread count.
SinrEstimate empirical_sinr(const SimScenario& scenario, const PilotMatrix& pilots,
                            const PowerAllocation& powers);

struct SweepRow {
  Index m_antennas;
  Index user;
  double empirical;
  double predicted;
  double relative_gap;
  double standard_error;
};

/// One empirical_sinr run per antenna count, compared with the asymptotic prediction.
/// Throws Error(invalid_argument) unless m_values is strictly ascending.
std::vector<SweepRow> convergence_sweep(const SimScenario& base, std::span<const Index> m_values,
                                        const PilotMatrix& pilots, const PowerAllocation& powers);

}  // namespace pilotcap
