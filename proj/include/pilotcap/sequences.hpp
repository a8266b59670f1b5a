// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <optional>

#include "pilotcap/model.hpp"

namespace pilotcap {

/// Interference-limited SINR of every user for Gram matrix G and powers p:
/// SINR_i = p_i / sum_{j != i} G_ji^2 p_j. A vanishing denominator yields +inf.
template <typename DerivedG, typename DerivedP>
Vector asymptotic_sinr(const Eigen::MatrixBase<DerivedG>& gram,
                       const Eigen::MatrixBase<DerivedP>& p) {
  if (gram.rows() != gram.cols() || gram.rows() != p.size()) {
    throw Error(Errc::dimension_mismatch, "Gram matrix and power vector disagree on K");
  }
  Vector sinr(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    double interference = 0.0;
    for (Index j = 0; j < p.size(); ++j) {
      if (j != i) interference += gram(j, i) * gram(j, i) * p(j);
    }
    sinr(i) = interference > 0.0 ? p(i) / interference
                                 : std::numeric_limits<double>::infinity();
  }
  return sinr;
}

Vector asymptotic_sinr(const PilotMatrix& pilots, const PowerAllocation& powers);

/// ||(T - G o G) p||_inf / ||p||_inf with T = diag(1 + 1/gamma_hat); zero iff p lies in
/// the null space that makes (S, p) meet gamma_hat with equality.
double null_space_residual(const Matrix& gram, const Vector& p, const Vector& gamma_hat);

/// Targets raised so that sum f(gamma_hat) = tau when the load is below tau.
/// Multiplicative in f-space; users hitting 1 - Tolerances::inflation_cap are capped
/// and the remainder is spread proportionally over the others. Requires K > tau and
/// load <= tau. Loads already within Tolerances::load of tau are returned unchanged.
Vector inflate_targets(const SinrRequirements& req);

/// Capacity-achieving pilots and powers for requirements with load <= tau.
///
/// Powers are P_i = c f(gamma_hat_i); the pilots are S = Sigma^{1/2} V^T D^{-1/2} where
/// V spans the nonzero eigenspace of a symmetric H with diagonal p and flat spectrum
/// sum(p)/tau on tau eigenvalues. For K <= tau the pilots are orthonormal, P_i = c and
/// the achieved SINR is +inf. Identical targets on a (K, tau) with a known equiangular
/// tight frame return that frame directly.
///
/// Throws Error(infeasible_requirements) when load > tau and
/// Error(construction_failure) if a postcondition residual is out of tolerance.
Allocation gwbe_design(const SinrRequirements& req, double c = 1.0);

struct WbeFrame {
  PilotMatrix pilots;
  bool equiangular = false;
};

/// Real equiangular tight frame for (K, tau) when one is built in:
/// K == tau (orthonormal), tau == 1, K == tau + 1 (simplex), (6, 3) (icosahedron).
std::optional<Matrix> equiangular_frame(Index users, Index tau);

/// Unit-norm tight frame S S^T = (K / tau) I. Throws Error(invalid_dimensions)
/// unless K >= tau >= 1.
WbeFrame wbe_sequences(Index users, Index tau);

/// Column i is the standard basis vector of user i's group.
/// Throws Error(invalid_grouping) if the grouping does not match (K, tau).
PilotMatrix fos_pilots(Index users, Index tau, const FosGrouping& grouping);

/// P_i = c gamma_i / (1 + gamma_i), the power rule of the WBE and FOS schemes.
PowerAllocation scheme_powers(const SinrRequirements& req, double c = 1.0);

}  // namespace pilotcap
