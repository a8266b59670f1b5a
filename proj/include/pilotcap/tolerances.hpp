// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace pilotcap {

// Single home for every numerical threshold used by constructors, solvers and tests.
struct Tolerances {
  // Unit-norm columns, Gram symmetry and unit diagonal.
  static constexpr double structural = 1e-9;
  // Achieved vs designed SINR, and the null-space residual of a valid allocation.
  static constexpr double sinr_match = 1e-6;
  // Residuals of the prescribed-diagonal/spectrum construction and of S D S^T.
  static constexpr double construction = 1e-8;
  // Relative slack on load comparisons (sum of f(gamma) against tau or 1) so that
  // boundary points such as Kf = tau survive rounding.
  static constexpr double load = 1e-12;
  // Largest admissible effective load of one inflated user is 1 - inflation_cap.
  static constexpr double inflation_cap = 1e-9;
  // Default relative tolerance of the achievable-SINR bisection.
  static constexpr double bisection = 1e-9;
};

}  // namespace pilotcap
