// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "pilotcap/model.hpp"

namespace pilotcap {

enum class Scheme { gwbe, wbe, fos };

std::string_view to_string(Scheme scheme);
/// Accepts "gwbe", "wbe", "fos" (case-insensitive). Throws Error(invalid_argument).
Scheme parse_scheme(std::string_view name);

struct BoundCheck {
  bool holds;
  /// sqrt(tau * sum(1 + 1/gamma_i)) - K.
  double slack;
};

/// Necessary condition for admitting K users: K <= sqrt(tau * sum_i (1 + 1/gamma_i)).
BoundCheck upper_bound_check(const SinrRequirements& req);

struct LoadCheck {
  bool admissible;
  double load;
};

/// Capacity region test sum_i f(gamma_i) <= tau, achieved by gwbe_design.
LoadCheck gwbe_admissible(const SinrRequirements& req);

/// Largest K admissible for identical targets gamma: floor((1 + 1/gamma) tau).
/// gamma = +inf gives tau.
Index identical_gamma_capacity(double gamma, Index tau);

/// Right-hand side min{tau, kappa - (kappa - 1) f(gamma_max)} of the WBE condition,
/// kappa = (K - 1) tau / (K - tau). Requires K > tau.
double wbe_load_limit(const SinrRequirements& req);

/// WBE scheme condition; always true for K <= tau (orthogonal pilots).
bool wbe_admissible(const SinrRequirements& req);

/// Per-group loads sum_{k in E_g} f(gamma_k).
Vector group_loads(const SinrRequirements& req, const FosGrouping& grouping);

/// Every group load <= 1 and total load <= tau. Throws Error(invalid_grouping).
bool fos_admissible(const SinrRequirements& req, const FosGrouping& grouping);

/// Groups with exhaustive search at or below this K; LPT plus 2-swap polish above.
inline constexpr Index kExhaustiveGroupingLimit = 12;

/// Balanced-cardinality grouping minimising the largest group load. Exact for
/// K <= kExhaustiveGroupingLimit. Starts from the round-robin grouping and only accepts
/// strict improvements, so symmetric inputs return round-robin.
FosGrouping fos_optimal_grouping(const SinrRequirements& req);

/// How FOS forms groups when no explicit grouping is given.
/// index_order is the round-robin grouping E_g = {g, g + tau, g + 2 tau, ...}.
enum class FosPolicy { optimal, index_order };

std::string_view to_string(FosPolicy policy);

/// Dispatch helper; FOS uses fos_optimal_grouping unless a grouping is supplied.
bool admissible(const SinrRequirements& req, Scheme scheme,
                const std::optional<FosGrouping>& grouping = std::nullopt);

using ScalePattern = std::function<SinrRequirements(double scale)>;

/// Pattern gamma_i = scale * weights_i with pilot length tau.
ScalePattern weighted_pattern(Vector weights, Index tau);

struct AchievableOptions {
  double rel_tol = Tolerances::bisection;
  /// When set, FOS keeps this grouping instead of re-optimising at every probe.
  std::optional<FosGrouping> fixed_grouping;
  /// Used when fixed_grouping is empty.
  FosPolicy fos_policy = FosPolicy::optimal;
};

/// Largest scale keeping pattern(scale) admissible under the scheme, by bisection
/// (lower bracket 1e-9, geometric growth up to 1e6). Returns +inf when admissible at
/// 1e6. Throws Error(no_feasible_scale) when even 1e-9 is inadmissible.
double achievable_sinr(const ScalePattern& pattern, Scheme scheme,
                       const AchievableOptions& options = {});

using LevelPattern = std::function<Vector(Index level)>;

/// Repeats each of the base targets `level` times: [g_0 x l, g_1 x l, ...].
LevelPattern repeated_pattern(Vector base);

/// Largest K = size(pattern(l)) admissible under the scheme, scanning l = 1, 2, ...
/// until the first failure. Returns 0 when l = 1 already fails.
Index max_admissible_users(const LevelPattern& pattern, Index tau, Scheme scheme,
                           Index max_level = 100000,
                           FosPolicy fos_policy = FosPolicy::optimal);

struct RegionProblem {
  /// Full K-vector; entries at free_axes are placeholders.
  Vector base_gammas;
  Index tau = 1;
  /// Two or three user indices. All but the last span the grid; the last is solved for.
  std::vector<Index> free_axes;
  /// One value list per grid axis (free_axes.size() - 1 lists).
  std::vector<std::vector<double>> grid;
  /// Upper clamp on the solved axis.
  double cap = 5.0;
  /// FOS grouping; round-robin when absent.
  std::optional<FosGrouping> grouping;
};

struct RegionPoint {
  std::vector<double> coords;
  double boundary;
};

/// For every grid point (row-major, first axis slowest) the largest value of the last
/// free axis keeping the scheme admissible, clamped to cap; 0 where nothing positive is
/// admissible. Closed form for GWBE and FOS, bisection for WBE.
/// Throws Error(infeasible_fixed_part) when the fixed users alone load tau or more.
std::vector<RegionPoint> region_boundary(const RegionProblem& problem, Scheme scheme);

struct ValidityReport {
  /// ||(T - G o G) p||_inf / ||p||_inf against the achieved targets.
  double null_residual;
  /// Asymptotic SINR of the allocation.
  Vector sinr;
  /// (sinr_i - gamma_i) / gamma_i against the original targets.
  Vector gaps;
  bool valid;
};

ValidityReport verify_validity(const Allocation& alloc);

}  // namespace pilotcap
