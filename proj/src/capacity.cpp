// SPDX-License-Identifier: Apache-2.0

#include "pilotcap/capacity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "pilotcap/bisection.hpp"
#include "pilotcap/parallel.hpp"
#include "pilotcap/sequences.hpp"

namespace pilotcap {

namespace {

bool load_within(double load, double budget) {
  return load <= budget * (1.0 + Tolerances::load);
}

// Group capacities in the canonical layout: the r groups of size q+1 come first.
std::vector<Index> group_capacities(Index users, Index tau) {
  std::vector<Index> caps(static_cast<std::size_t>(tau), users / tau);
  for (Index g = 0; g < users % tau; ++g) ++caps[static_cast<std::size_t>(g)];
  return caps;
}

double max_load_of(const std::vector<std::vector<Index>>& groups, const Vector& f) {
  double worst = 0.0;
  for (const auto& members : groups) {
    double load = 0.0;
    for (Index u : members) load += f(u);
    worst = std::max(worst, load);
  }
  return worst;
}

// Depth-first enumeration of balanced groupings, users visited in decreasing load.
// Groups with equal capacity are interchangeable, so a user may only open the first
// empty group of its capacity class.
class ExhaustiveGrouper {
 public:
  ExhaustiveGrouper(const Vector& f, Index tau, double initial_best)
      : f_(f),
        caps_(group_capacities(f.size(), tau)),
        loads_(static_cast<std::size_t>(tau), 0.0),
        members_(static_cast<std::size_t>(tau)),
        best_(initial_best) {
    order_.resize(static_cast<std::size_t>(f.size()));
    std::iota(order_.begin(), order_.end(), Index{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&f](Index a, Index b) { return f(a) > f(b); });
  }

  std::optional<std::vector<std::vector<Index>>> run() {
    descend(0, 0.0);
    return found_;
  }

 private:
  bool improves(double value) const { return value < best_ - Tolerances::load * best_; }

  void descend(std::size_t depth, double current_max) {
    if (depth == order_.size()) {
      if (improves(current_max)) {
        best_ = current_max;
        found_ = members_;
      }
      return;
    }
    const Index user = order_[depth];
    for (std::size_t g = 0; g < caps_.size(); ++g) {
      auto& members = members_[g];
      if (static_cast<Index>(members.size()) >= caps_[g]) continue;
      if (members.empty() && opens_duplicate(g)) continue;
      const double load = loads_[g] + f_(user);
      if (!improves(load)) continue;
      members.push_back(user);
      loads_[g] = load;
      descend(depth + 1, std::max(current_max, load));
      loads_[g] -= f_(user);
      members.pop_back();
    }
  }

  bool opens_duplicate(std::size_t g) const {
    for (std::size_t h = 0; h < g; ++h) {
      if (members_[h].empty() && caps_[h] == caps_[g]) return true;
    }
    return false;
  }

  const Vector& f_;
  std::vector<Index> caps_;
  std::vector<double> loads_;
  std::vector<std::vector<Index>> members_;
  std::vector<Index> order_;
  double best_;
  std::optional<std::vector<std::vector<Index>>> found_;
};

// Longest-processing-time assignment under the balanced-cardinality constraint,
// followed by pairwise swap and single-move polishing.
std::vector<std::vector<Index>> lpt_grouping(const Vector& f, Index tau) {
  const Index users = f.size();
  const Index q = users / tau;
  const Index r = users % tau;
  std::vector<Index> order(static_cast<std::size_t>(users));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&f](Index a, Index b) { return f(a) > f(b); });

  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(tau));
  std::vector<double> loads(static_cast<std::size_t>(tau), 0.0);
  Index oversized = 0;
  for (Index user : order) {
    std::size_t pick = groups.size();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto size = static_cast<Index>(groups[g].size());
      const bool room = size < q || (size == q && oversized < r);
      if (room && (pick == groups.size() || loads[g] < loads[pick])) pick = g;
    }
    if (static_cast<Index>(groups[pick].size()) == q) ++oversized;
    groups[pick].push_back(user);
    loads[pick] += f(user);
  }

  const double eps = Tolerances::load;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t a = 0; a < groups.size() && !improved; ++a) {
      for (std::size_t b = a + 1; b < groups.size() && !improved; ++b) {
        const double before = std::max(loads[a], loads[b]);
        // Moving one user from a larger group to a group with one member fewer
        // keeps the multiset of cardinalities.
        for (int dir = 0; dir < 2 && !improved; ++dir) {
          const std::size_t from = dir == 0 ? a : b;
          const std::size_t to = dir == 0 ? b : a;
          if (groups[from].size() != groups[to].size() + 1) continue;
          for (std::size_t i = 0; i < groups[from].size(); ++i) {
            const double x = f(groups[from][i]);
            if (std::max(loads[from] - x, loads[to] + x) < before - eps * before) {
              groups[to].push_back(groups[from][i]);
              groups[from].erase(groups[from].begin() + static_cast<std::ptrdiff_t>(i));
              loads[from] -= x;
              loads[to] += x;
              improved = true;
              break;
            }
          }
        }
        for (std::size_t i = 0; i < groups[a].size() && !improved; ++i) {
          for (std::size_t j = 0; j < groups[b].size() && !improved; ++j) {
            const double delta = f(groups[a][i]) - f(groups[b][j]);
            if (std::max(loads[a] - delta, loads[b] + delta) < before - eps * before) {
              std::swap(groups[a][i], groups[b][j]);
              loads[a] -= delta;
              loads[b] += delta;
              improved = true;
            }
          }
        }
      }
    }
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::gwbe: return "gwbe";
    case Scheme::wbe: return "wbe";
    case Scheme::fos: return "fos";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "gwbe") return Scheme::gwbe;
  if (lower == "wbe") return Scheme::wbe;
  if (lower == "fos") return Scheme::fos;
  throw Error(Errc::invalid_argument, "unknown scheme '" + std::string(name) + "'");
}

BoundCheck upper_bound_check(const SinrRequirements& req) {
  const double sum = (1.0 + req.gammas().array().inverse()).sum();
  const double rhs = std::sqrt(static_cast<double>(req.tau()) * sum);
  const auto k = static_cast<double>(req.users());
  return {k <= rhs * (1.0 + Tolerances::load), rhs - k};
}

LoadCheck gwbe_admissible(const SinrRequirements& req) {
  const double load = req.load();
  return {load_within(load, static_cast<double>(req.tau())), load};
}

Index identical_gamma_capacity(double gamma, Index tau) {
  if (!(gamma > 0.0)) throw Error(Errc::non_positive_gamma, "gamma must be positive");
  if (tau < 1) throw Error(Errc::zero_pilot_length, "tau must be positive");
  if (std::isinf(gamma)) return tau;
  const auto t = static_cast<double>(tau);
  // K admissible iff K gamma / (1 + gamma) <= tau; settle rounding of the closed form.
  auto fits = [&](Index k) { return load_within(static_cast<double>(k) * effective_load(gamma), t); };
  auto k = static_cast<Index>(std::floor((1.0 + 1.0 / gamma) * t));
  while (fits(k + 1)) ++k;
  while (k > 0 && !fits(k)) --k;
  return k;
}

double wbe_load_limit(const SinrRequirements& req) {
  const Index k = req.users();
  const Index tau = req.tau();
  if (k <= tau) throw Error(Errc::invalid_dimensions, "WBE load limit needs K > tau");
  const double kappa = static_cast<double>((k - 1) * tau) / static_cast<double>(k - tau);
  const double f_max = effective_load(req.gammas().maxCoeff());
  return std::min(static_cast<double>(tau), kappa - (kappa - 1.0) * f_max);
}

bool wbe_admissible(const SinrRequirements& req) {
  if (req.users() <= req.tau()) return true;
  return load_within(req.load(), wbe_load_limit(req));
}

Vector group_loads(const SinrRequirements& req, const FosGrouping& grouping) {
  if (grouping.users() != req.users() || grouping.tau() != req.tau()) {
    throw Error(Errc::invalid_grouping, "grouping does not match (K, tau)");
  }
  Vector loads = Vector::Zero(grouping.tau());
  for (Index u = 0; u < req.users(); ++u) loads(grouping.group_of(u)) += effective_load(req.gamma(u));
  return loads;
}

bool fos_admissible(const SinrRequirements& req, const FosGrouping& grouping) {
  const Vector loads = group_loads(req, grouping);
  return load_within(loads.maxCoeff(), 1.0) &&
         load_within(req.load(), static_cast<double>(req.tau()));
}

FosGrouping fos_optimal_grouping(const SinrRequirements& req) {
  const Index users = req.users();
  const Index tau = req.tau();
  const Vector f = effective_loads(req.gammas());
  auto best = FosGrouping::round_robin(users, tau);
  const double baseline = max_load_of(best.groups(), f);

  std::optional<std::vector<std::vector<Index>>> better;
  if (users <= kExhaustiveGroupingLimit) {
    better = ExhaustiveGrouper(f, tau, baseline).run();
  } else {
    auto candidate = lpt_grouping(f, tau);
    if (max_load_of(candidate, f) < baseline - Tolerances::load * baseline) better = candidate;
  }
  if (!better) return best;
  for (auto& g : *better) std::sort(g.begin(), g.end());
  // Canonical order: larger groups first, then by smallest member.
  std::stable_sort(better->begin(), better->end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.empty() ? false : (b.empty() ? true : a.front() < b.front());
  });
  return FosGrouping(std::move(*better), users);
}

std::string_view to_string(FosPolicy policy) {
  return policy == FosPolicy::optimal ? "optimal" : "index_order";
}

namespace {

std::optional<FosGrouping> policy_grouping(const SinrRequirements& req, Scheme scheme,
                                           FosPolicy policy) {
  if (scheme != Scheme::fos || policy == FosPolicy::optimal) return std::nullopt;
  return FosGrouping::round_robin(req.users(), req.tau());
}

}  // namespace

bool admissible(const SinrRequirements& req, Scheme scheme,
                const std::optional<FosGrouping>& grouping) {
  switch (scheme) {
    case Scheme::gwbe: return gwbe_admissible(req).admissible;
    case Scheme::wbe: return wbe_admissible(req);
    case Scheme::fos:
      return fos_admissible(req, grouping ? *grouping : fos_optimal_grouping(req));
  }
  return false;
}

ScalePattern weighted_pattern(Vector weights, Index tau) {
  return [weights = std::move(weights), tau](double scale) {
    return validate_requirements(Vector(scale * weights), tau);
  };
}

double achievable_sinr(const ScalePattern& pattern, Scheme scheme,
                       const AchievableOptions& options) {
  auto feasible = [&](double scale) {
    const auto req = pattern(scale);
    if (options.fixed_grouping) return admissible(req, scheme, options.fixed_grouping);
    return admissible(req, scheme, policy_grouping(req, scheme, options.fos_policy));
  };
  const auto result = max_feasible(feasible, options.rel_tol);
  if (!result) {
    throw Error(Errc::no_feasible_scale,
                std::string("pattern inadmissible at the smallest scale under ") +
                    std::string(to_string(scheme)));
  }
  return *result;
}

LevelPattern repeated_pattern(Vector base) {
  return [base = std::move(base)](Index level) {
    Vector out(base.size() * level);
    for (Index i = 0; i < base.size(); ++i) out.segment(i * level, level).setConstant(base(i));
    return out;
  };
}

Index max_admissible_users(const LevelPattern& pattern, Index tau, Scheme scheme,
                           Index max_level, FosPolicy fos_policy) {
  Index best = 0;
  for (Index level = 1; level <= max_level; ++level) {
    const auto req = validate_requirements(pattern(level), tau);
    if (!admissible(req, scheme, policy_grouping(req, scheme, fos_policy))) break;
    best = req.users();
  }
  return best;
}

std::vector<RegionPoint> region_boundary(const RegionProblem& problem, Scheme scheme) {
  const auto& axes = problem.free_axes;
  const Index users = problem.base_gammas.size();
  const auto tau = static_cast<double>(problem.tau);
  if (axes.size() < 2 || axes.size() > 3) {
    throw Error(Errc::invalid_argument, "region needs two or three free axes");
  }
  if (problem.grid.size() != axes.size() - 1) {
    throw Error(Errc::invalid_argument, "need one grid list per non-solved free axis");
  }
  for (Index a : axes) {
    if (a < 0 || a >= users) throw Error(Errc::invalid_argument, "free axis out of range");
  }
  if (!(problem.cap > 0.0)) throw Error(Errc::invalid_argument, "cap must be positive");

  double fixed_load = 0.0;
  for (Index u = 0; u < users; ++u) {
    if (std::find(axes.begin(), axes.end(), u) == axes.end()) {
      fixed_load += effective_load(problem.base_gammas(u));
    }
  }
  if (fixed_load >= tau) {
    throw Error(Errc::infeasible_fixed_part,
                "fixed users load " + std::to_string(fixed_load) + " >= tau");
  }
  const FosGrouping grouping = problem.grouping
                                   ? *problem.grouping
                                   : FosGrouping::round_robin(users, problem.tau);
  if (grouping.users() != users || grouping.tau() != problem.tau) {
    throw Error(Errc::invalid_grouping, "grouping does not match (K, tau)");
  }

  const auto& first = problem.grid[0];
  const std::size_t second_size = problem.grid.size() > 1 ? problem.grid[1].size() : 1;
  const std::size_t total = first.size() * second_size;
  std::vector<RegionPoint> points(total);
  const Index solved = axes.back();

  parallel_for(total, [&](std::size_t idx) {
    Vector gammas = problem.base_gammas;
    std::vector<double> coords;
    coords.push_back(first[idx / second_size]);
    if (problem.grid.size() > 1) coords.push_back(problem.grid[1][idx % second_size]);
    for (std::size_t a = 0; a < coords.size(); ++a) gammas(axes[a]) = coords[a];

    double others = 0.0;
    for (Index u = 0; u < users; ++u) {
      if (u != solved) others += effective_load(gammas(u));
    }
    double boundary = 0.0;
    switch (scheme) {
      case Scheme::gwbe: {
        const double room = tau - others;
        boundary = room <= 0.0 ? 0.0 : std::min(problem.cap, gamma_from_load(room));
        break;
      }
      case Scheme::fos: {
        Vector loads = Vector::Zero(problem.tau);
        for (Index u = 0; u < users; ++u) {
          if (u != solved) loads(grouping.group_of(u)) += effective_load(gammas(u));
        }
        const Index own = grouping.group_of(solved);
        bool others_ok = true;
        for (Index g = 0; g < problem.tau; ++g) {
          if (g != own && !load_within(loads(g), 1.0)) others_ok = false;
        }
        const double room = std::min(1.0 - loads(own), tau - others);
        boundary = (!others_ok || room <= 0.0) ? 0.0 : std::min(problem.cap, gamma_from_load(room));
        break;
      }
      case Scheme::wbe: {
        auto feasible = [&](double x) {
          gammas(solved) = x;
          return wbe_admissible(validate_requirements(gammas, problem.tau));
        };
        if (feasible(problem.cap)) {
          boundary = problem.cap;
        } else if (feasible(1e-12)) {
          double lo = 1e-12;
          double hi = problem.cap;
          for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, lo); ++it) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
          }
          boundary = lo;
        }
        break;
      }
    }
    points[idx] = RegionPoint{std::move(coords), boundary};
  });
  return points;
}

ValidityReport verify_validity(const Allocation& alloc) {
  const Matrix& gram = alloc.pilots().gram();
  const Vector& p = alloc.powers().p();
  ValidityReport report;
  report.null_residual = null_space_residual(gram, p, alloc.achieved_gammas());
  report.sinr = asymptotic_sinr(gram, p);
  const Vector& targets = alloc.targets().gammas();
  report.gaps = (report.sinr - targets).cwiseQuotient(targets);
  report.valid = report.null_residual <= Tolerances::sinr_match &&
                 (report.gaps.array() >= -Tolerances::sinr_match).all();
  return report;
}

}  // namespace pilotcap
