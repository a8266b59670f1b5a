// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pilotcap/error.hpp"
#include "pilotcap/tolerances.hpp"

namespace pilotcap {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Effective load f(gamma) = gamma / (1 + gamma) of a single SINR target.
/// Saturates at 1 for gamma = +inf.
inline double effective_load(double gamma) {
  return std::isinf(gamma) ? 1.0 : gamma / (1.0 + gamma);
}

/// Inverse of effective_load on [0, 1]; maps 1 to +inf.
inline double gamma_from_load(double load) {
  return load >= 1.0 ? std::numeric_limits<double>::infinity() : load / (1.0 - load);
}

template <typename Derived>
Vector effective_loads(const Eigen::MatrixBase<Derived>& gammas) {
  return gammas.derived().unaryExpr([](double g) { return effective_load(g); });
}

/// Per-user SINR targets (linear scale) together with the pilot length.
/// Instances only come out of validate_requirements.
class SinrRequirements {
 public:
  const Vector& gammas() const noexcept { return gammas_; }
  double gamma(Index i) const { return gammas_(i); }
  Index users() const noexcept { return gammas_.size(); }
  Index tau() const noexcept { return tau_; }

  /// Sum of f(gamma_i).
  double load() const { return effective_loads(gammas_).sum(); }

 private:
  friend SinrRequirements validate_requirements(Vector gammas, Index tau);
  SinrRequirements(Vector gammas, Index tau) : gammas_(std::move(gammas)), tau_(tau) {}

  Vector gammas_;
  Index tau_;
};

/// Checks K >= 1, tau >= 1 and every gamma_i finite and positive.
/// Throws Error(empty_user_set | zero_pilot_length | non_positive_gamma).
SinrRequirements validate_requirements(Vector gammas, Index tau);
SinrRequirements validate_requirements(const std::vector<double>& gammas, Index tau);

/// tau x K real pilot matrix with unit-norm columns and its Gram matrix S^T S.
class PilotMatrix {
 public:
  /// Throws Error(invalid_dimensions) for empty input and Error(numerical_failure)
  /// when a column is not unit norm within Tolerances::structural.
  explicit PilotMatrix(Matrix s);

  const Matrix& s() const noexcept { return s_; }
  const Matrix& gram() const noexcept { return gram_; }
  Index tau() const noexcept { return s_.rows(); }
  Index users() const noexcept { return s_.cols(); }

 private:
  Matrix s_;
  Matrix gram_;
};

/// Positive downlink powers and the scale constant c they were derived from.
class PowerAllocation {
 public:
  PowerAllocation(Vector p, double scale_c);

  const Vector& p() const noexcept { return p_; }
  double scale_c() const noexcept { return scale_c_; }
  Index users() const noexcept { return p_.size(); }

 private:
  Vector p_;
  double scale_c_;
};

/// A pilot/power pair together with the targets it was designed for (achieved_gammas,
/// possibly inflated and possibly +inf) and the original requirements.
class Allocation {
 public:
  Allocation(PilotMatrix pilots, PowerAllocation powers, Vector achieved_gammas,
             SinrRequirements targets);

  const PilotMatrix& pilots() const noexcept { return pilots_; }
  const PowerAllocation& powers() const noexcept { return powers_; }
  const Vector& achieved_gammas() const noexcept { return achieved_; }
  const SinrRequirements& targets() const noexcept { return targets_; }

 private:
  PilotMatrix pilots_;
  PowerAllocation powers_;
  Vector achieved_;
  SinrRequirements targets_;
};

/// Partition of user indices {0..K-1} into tau pilot groups.
class FosGrouping {
 public:
  /// Throws Error(invalid_grouping) unless the groups are disjoint, cover 0..K-1 and
  /// have the balanced cardinalities q+1 (r groups) / q (tau-r groups), K = q tau + r.
  FosGrouping(std::vector<std::vector<Index>> groups, Index users);

  /// User i goes to group i mod tau.
  static FosGrouping round_robin(Index users, Index tau);

  const std::vector<std::vector<Index>>& groups() const noexcept { return groups_; }
  Index tau() const noexcept { return static_cast<Index>(groups_.size()); }
  Index users() const noexcept { return static_cast<Index>(group_of_.size()); }
  Index group_of(Index user) const { return group_of_.at(static_cast<std::size_t>(user)); }

 private:
  std::vector<std::vector<Index>> groups_;
  std::vector<Index> group_of_;
};

struct SimScenario {
  Index m_antennas = 1024;
  double sigma_z_sq = 0.1;
  double sigma_w_sq = 0.1;
  Index n_trials = 500;
  std::uint64_t seed = 0;

  /// Throws Error(invalid_argument) on M < 1, n_trials < 1 or a negative variance.
  void validate() const;
};

}  // namespace pilotcap
