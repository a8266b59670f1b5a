// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <optional>

namespace pilotcap {

struct BisectionBracket {
  double lower = 1e-9;
  double upper_limit = 1e6;
  double growth = 2.0;
};

/// Largest x in [bracket.lower, bracket.upper_limit] with feasible(x) true, for a
/// predicate that is true below some threshold and false above it.
///
/// Returns nullopt if feasible(lower) is false and +inf if the predicate still holds at
/// upper_limit. Otherwise the result is the feasible end of a bracket whose width is at
/// most rel_tol times its lower end.
template <typename Predicate>
std::optional<double> max_feasible(Predicate&& feasible, double rel_tol,
                                   BisectionBracket bracket = {}) {
  double lo = bracket.lower;
  if (!feasible(lo)) return std::nullopt;
  double hi = std::max(1.0, 2.0 * lo);
  while (feasible(hi)) {
    lo = hi;
    if (hi >= bracket.upper_limit) return std::numeric_limits<double>::infinity();
    hi = std::min(hi * bracket.growth, bracket.upper_limit);
  }
  while (hi - lo > rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace pilotcap
