// SPDX-License-Identifier: Apache-2.0

#include "pilotcap/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pilotcap {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::non_positive_gamma: return "NonPositiveGamma";
    case Errc::empty_user_set: return "EmptyUserSet";
    case Errc::zero_pilot_length: return "ZeroPilotLength";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::not_majorized: return "NotMajorized";
    case Errc::numerical_failure: return "NumericalFailure";
    case Errc::infeasible_requirements: return "InfeasibleRequirements";
    case Errc::construction_failure: return "ConstructionFailure";
    case Errc::invalid_dimensions: return "InvalidDimensions";
    case Errc::invalid_grouping: return "InvalidGrouping";
    case Errc::no_feasible_scale: return "NoFeasibleScale";
    case Errc::infeasible_fixed_part: return "InfeasibleFixedPart";
    case Errc::zero_norm_estimate: return "ZeroNormEstimate";
    case Errc::config_parse_error: return "ConfigParseError";
  }
  return "Unknown";
}

SinrRequirements validate_requirements(Vector gammas, Index tau) {
  if (gammas.size() == 0) {
    throw Error(Errc::empty_user_set, "gammas is empty");
  }
  if (tau < 1) {
    throw Error(Errc::zero_pilot_length, "tau = " + std::to_string(tau));
  }
  for (Index i = 0; i < gammas.size(); ++i) {
    if (!std::isfinite(gammas(i)) || gammas(i) <= 0.0) {
      throw Error(Errc::non_positive_gamma, "gammas[" + std::to_string(i) +
                                                "] = " + std::to_string(gammas(i)));
    }
  }
  return SinrRequirements(std::move(gammas), tau);
}

SinrRequirements validate_requirements(const std::vector<double>& gammas, Index tau) {
  return validate_requirements(
      Vector(Eigen::Map<const Vector>(gammas.data(), static_cast<Index>(gammas.size()))),
      tau);
}

PilotMatrix::PilotMatrix(Matrix s) : s_(std::move(s)) {
  if (s_.rows() == 0 || s_.cols() == 0) {
    throw Error(Errc::invalid_dimensions, "pilot matrix must be non-empty");
  }
  for (Index i = 0; i < s_.cols(); ++i) {
    const double norm = s_.col(i).norm();
    if (!(std::abs(norm - 1.0) <= Tolerances::structural)) {
      throw Error(Errc::numerical_failure,
                  "pilot column " + std::to_string(i) + " has norm " + std::to_string(norm));
    }
  }
  gram_ = s_.transpose() * s_;
  gram_ = (0.5 * (gram_ + gram_.transpose())).eval();
}

PowerAllocation::PowerAllocation(Vector p, double scale_c) : p_(std::move(p)), scale_c_(scale_c) {
  if (p_.size() == 0) {
    throw Error(Errc::empty_user_set, "power vector is empty");
  }
  if (!(scale_c_ > 0.0) || !std::isfinite(scale_c_)) {
    throw Error(Errc::invalid_argument, "scale constant c must be positive");
  }
  for (Index i = 0; i < p_.size(); ++i) {
    if (!(p_(i) > 0.0) || !std::isfinite(p_(i))) {
      throw Error(Errc::invalid_argument, "power[" + std::to_string(i) + "] must be positive");
    }
  }
}

Allocation::Allocation(PilotMatrix pilots, PowerAllocation powers, Vector achieved_gammas,
                       SinrRequirements targets)
    : pilots_(std::move(pilots)),
      powers_(std::move(powers)),
      achieved_(std::move(achieved_gammas)),
      targets_(std::move(targets)) {
  const Index k = targets_.users();
  if (pilots_.users() != k || powers_.users() != k || achieved_.size() != k) {
    throw Error(Errc::dimension_mismatch, "allocation components disagree on K");
  }
  for (Index i = 0; i < k; ++i) {
    if (!(achieved_(i) >= targets_.gamma(i) * (1.0 - Tolerances::load))) {
      throw Error(Errc::invalid_argument,
                  "achieved gamma below target for user " + std::to_string(i));
    }
  }
}

FosGrouping::FosGrouping(std::vector<std::vector<Index>> groups, Index users)
    : groups_(std::move(groups)) {
  const auto tau = static_cast<Index>(groups_.size());
  if (tau < 1 || users < 1) {
    throw Error(Errc::invalid_grouping, "need at least one group and one user");
  }
  const Index q = users / tau;
  const Index r = users % tau;
  Index larger = 0;
  group_of_.assign(static_cast<std::size_t>(users), -1);
  for (Index g = 0; g < tau; ++g) {
    const auto& members = groups_[static_cast<std::size_t>(g)];
    const auto size = static_cast<Index>(members.size());
    if (size == q + 1 && r > 0) {
      ++larger;
    } else if (size != q) {
      throw Error(Errc::invalid_grouping, "group " + std::to_string(g) + " has cardinality " +
                                              std::to_string(size));
    }
    for (Index u : members) {
      if (u < 0 || u >= users) {
        throw Error(Errc::invalid_grouping, "user index " + std::to_string(u) + " out of range");
      }
      auto& slot = group_of_[static_cast<std::size_t>(u)];
      if (slot != -1) {
        throw Error(Errc::invalid_grouping, "user " + std::to_string(u) + " in two groups");
      }
      slot = g;
    }
  }
  if (larger != r) {
    throw Error(Errc::invalid_grouping, "expected " + std::to_string(r) +
                                            " groups of size q+1, got " + std::to_string(larger));
  }
  // Cardinalities sum to K and indices are distinct, so coverage follows.
}

FosGrouping FosGrouping::round_robin(Index users, Index tau) {
  if (tau < 1) {
    throw Error(Errc::invalid_grouping, "tau must be positive");
  }
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(tau));
  for (Index u = 0; u < users; ++u) {
    groups[static_cast<std::size_t>(u % tau)].push_back(u);
  }
  return FosGrouping(std::move(groups), users);
}

void SimScenario::validate() const {
  if (m_antennas < 1) throw Error(Errc::invalid_argument, "M must be >= 1");
  if (n_trials < 1) throw Error(Errc::invalid_argument, "n_trials must be >= 1");
  if (!(sigma_z_sq >= 0.0) || !(sigma_w_sq >= 0.0)) {
    throw Error(Errc::invalid_argument, "noise variances must be >= 0");
  }
}

}  // namespace pilotcap
