// SPDX-License-Identifier: Apache-2.0

#include "pilotcap/simulator.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "pilotcap/parallel.hpp"
#include "pilotcap/sequences.hpp"

namespace pilotcap {

namespace {

// Fills with CN(0, variance) entries.
ComplexMatrix complex_normal(Index rows, Index cols, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  ComplexMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = {re, im};
    }
  }
  return out;
}

double ratio_or_inf(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

}  // namespace

Rng trial_stream(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    0x70696c6fu};
  return Rng(seq);
}

ComplexMatrix generate_channels(Index m_antennas, Index users, Rng& rng) {
  if (m_antennas < 1 || users < 1) {
    throw Error(Errc::invalid_argument, "channel matrix needs M >= 1 and K >= 1");
  }
  return complex_normal(m_antennas, users, 1.0, rng);
}

ComplexMatrix ls_estimate(const ComplexMatrix& channels, const PilotMatrix& pilots,
                          double sigma_z_sq, Rng& rng) {
  if (channels.cols() != pilots.users()) {
    throw Error(Errc::dimension_mismatch, "channels have " + std::to_string(channels.cols()) +
                                              " users, pilots " + std::to_string(pilots.users()));
  }
  if (!(sigma_z_sq >= 0.0)) throw Error(Errc::invalid_argument, "sigma_z^2 must be >= 0");
  ComplexMatrix estimate = channels * pilots.gram().cast<std::complex<double>>();
  if (sigma_z_sq > 0.0) {
    const ComplexMatrix z = complex_normal(channels.rows(), pilots.tau(), sigma_z_sq, rng);
    estimate += z * pilots.s().cast<std::complex<double>>();
  }
  return estimate;
}

ComplexMatrix mrt_precoders(const ComplexMatrix& estimates) {
  ComplexMatrix t = estimates;
  for (Index j = 0; j < t.cols(); ++j) {
    const double norm = t.col(j).norm();
    if (!(norm > 0.0)) {
      throw Error(Errc::zero_norm_estimate, "estimate " + std::to_string(j) + " has zero norm");
    }
    t.col(j) /= norm;
  }
  return t;
}

TrialResult evaluate_trial(const ComplexMatrix& channels, const ComplexMatrix& precoders,
                           const Vector& powers, double sigma_w_sq) {
  const Index k = channels.cols();
  if (precoders.cols() != k || precoders.rows() != channels.rows() || powers.size() != k) {
    throw Error(Errc::dimension_mismatch, "trial operands disagree on dimensions");
  }
  // gain(i, j) = |h_i^H t_j|^2
  const Matrix gain = (channels.adjoint() * precoders).cwiseAbs2();
  TrialResult out;
  out.signal_power = gain.diagonal().cwiseProduct(powers);
  out.interference_power = gain * powers - out.signal_power;
  out.interference_power = out.interference_power.cwiseMax(0.0);
  out.noise_power = Vector::Constant(k, sigma_w_sq);
  out.empirical_sinr.resize(k);
  for (Index i = 0; i < k; ++i) {
    out.empirical_sinr(i) = ratio_or_inf(out.signal_power(i),
                                         out.interference_power(i) + out.noise_power(i));
  }
  return out;
}

SinrEstimate empirical_sinr(const SimScenario& scenario, const PilotMatrix& pilots,
                            const PowerAllocation& powers) {
  scenario.validate();
  const Index k = pilots.users();
  if (powers.users() != k) {
    throw Error(Errc::dimension_mismatch, "pilots and powers disagree on K");
  }
  const auto n = static_cast<std::size_t>(scenario.n_trials);
  std::vector<Vector> signal(n);
  std::vector<Vector> interference(n);

  parallel_for(n, [&](std::size_t t) {
    Rng rng = trial_stream(scenario.seed, t);
    const ComplexMatrix h = generate_channels(scenario.m_antennas, k, rng);
    const ComplexMatrix h_hat = ls_estimate(h, pilots, scenario.sigma_z_sq, rng);
    const TrialResult r = evaluate_trial(h, mrt_precoders(h_hat), powers.p(), scenario.sigma_w_sq);
    signal[t] = r.signal_power;
    interference[t] = r.interference_power;
  });

  const auto count = static_cast<double>(n);
  Vector s_mean = Vector::Zero(k);
  Vector i_mean = Vector::Zero(k);
  for (std::size_t t = 0; t < n; ++t) {
    s_mean += signal[t];
    i_mean += interference[t];
  }
  s_mean /= count;
  i_mean /= count;

  Vector s_var = Vector::Zero(k);
  Vector i_var = Vector::Zero(k);
  Vector cov = Vector::Zero(k);
  for (std::size_t t = 0; t < n; ++t) {
    const Vector ds = signal[t] - s_mean;
    const Vector di = interference[t] - i_mean;
    s_var += ds.cwiseAbs2();
    i_var += di.cwiseAbs2();
    cov += ds.cwiseProduct(di);
  }
  if (n > 1) {
    s_var /= count - 1.0;
    i_var /= count - 1.0;
    cov /= count - 1.0;
  }

  SinrEstimate est;
  est.trials = scenario.n_trials;
  est.mean.signal_power = s_mean;
  est.mean.interference_power = i_mean;
  est.mean.noise_power = Vector::Constant(k, scenario.sigma_w_sq);
  est.mean.empirical_sinr.resize(k);
  est.se_signal = (s_var / count).cwiseSqrt();
  est.se_interference = (i_var / count).cwiseSqrt();
  est.se_sinr.resize(k);
  for (Index i = 0; i < k; ++i) {
    const double den = i_mean(i) + scenario.sigma_w_sq;
    est.mean.empirical_sinr(i) = ratio_or_inf(s_mean(i), den);
    if (den > 0.0) {
      const double var = (s_var(i) / (den * den) +
                          s_mean(i) * s_mean(i) * i_var(i) / (den * den * den * den) -
                          2.0 * s_mean(i) * cov(i) / (den * den * den)) /
                         count;
      est.se_sinr(i) = std::sqrt(std::max(var, 0.0));
    } else {
      est.se_sinr(i) = 0.0;
    }
  }
  return est;
}

std::vector<SweepRow> convergence_sweep(const SimScenario& base, std::span<const Index> m_values,
                                        const PilotMatrix& pilots, const PowerAllocation& powers) {
  for (std::size_t i = 1; i < m_values.size(); ++i) {
    if (m_values[i] <= m_values[i - 1]) {
      throw Error(Errc::invalid_argument, "antenna counts must be strictly ascending");
    }
  }
  const Vector predicted = asymptotic_sinr(pilots, powers);
  std::vector<SweepRow> rows;
  for (Index m : m_values) {
    SimScenario scenario = base;
    scenario.m_antennas = m;
    const SinrEstimate est = empirical_sinr(scenario, pilots, powers);
    for (Index i = 0; i < pilots.users(); ++i) {
      const double emp = est.mean.empirical_sinr(i);
      const double pred = predicted(i);
      // |e - p| / p tends to 1 as p -> inf with e finite.
      const double gap = std::isinf(pred) ? (std::isinf(emp) ? 0.0 : 1.0)
                                          : std::abs(emp - pred) / pred;
      rows.push_back({m, i, emp, pred, gap, est.se_sinr(i)});
    }
  }
  return rows;
}

}  // namespace pilotcap
