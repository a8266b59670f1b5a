// SPDX-License-Identifier: Apache-2.0

#include "pilotcap/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pilotcap/majorization.hpp"

namespace pilotcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool within_load(double load, double budget) {
  return load <= budget * (1.0 + Tolerances::load);
}

Matrix normalized_columns(Matrix s) {
  for (Index i = 0; i < s.cols(); ++i) s.col(i).normalize();
  return s;
}

// Helmert basis of the sum-zero hyperplane of R^{tau+1}, rescaled to unit columns.
Matrix simplex_frame(Index tau) {
  const Index n = tau + 1;
  Matrix s = Matrix::Zero(tau, n);
  for (Index k = 1; k < n; ++k) {
    const double norm = std::sqrt(static_cast<double>(k * (k + 1)));
    for (Index j = 0; j < k; ++j) s(k - 1, j) = 1.0 / norm;
    s(k - 1, k) = -static_cast<double>(k) / norm;
  }
  return normalized_columns(std::move(s));
}

// The six diagonals of the icosahedron.
Matrix icosahedral_frame() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Matrix s(3, 6);
  s << 0.0, 0.0, 1.0, -1.0, phi, phi,
       1.0, -1.0, phi, phi, 0.0, 0.0,
       phi, phi, 0.0, 0.0, 1.0, -1.0;
  return normalized_columns(std::move(s));
}

bool is_equiangular(const Matrix& gram, Index users, Index tau) {
  if (users <= tau) return true;
  const double target = static_cast<double>(users - tau) /
                        static_cast<double>((users - 1) * tau);
  for (Index i = 0; i < users; ++i) {
    for (Index j = 0; j < users; ++j) {
      if (i != j && std::abs(gram(i, j) * gram(i, j) - target) > Tolerances::construction) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

Vector asymptotic_sinr(const PilotMatrix& pilots, const PowerAllocation& powers) {
  return asymptotic_sinr(pilots.gram(), powers.p());
}

double null_space_residual(const Matrix& gram, const Vector& p, const Vector& gamma_hat) {
  if (gram.rows() != p.size() || gamma_hat.size() != p.size()) {
    throw Error(Errc::dimension_mismatch, "null-space residual operands disagree on K");
  }
  const Vector t = gamma_hat.unaryExpr([](double g) { return 1.0 + 1.0 / g; });
  const Vector mp = t.cwiseProduct(p) - gram.cwiseAbs2().transpose() * p;
  return mp.cwiseAbs().maxCoeff() / p.cwiseAbs().maxCoeff();
}

Vector inflate_targets(const SinrRequirements& req) {
  const auto tau = static_cast<double>(req.tau());
  const Vector f = effective_loads(req.gammas());
  const double load = f.sum();
  if (!within_load(load, tau)) {
    throw Error(Errc::infeasible_requirements,
                "load " + std::to_string(load) + " exceeds tau " + std::to_string(req.tau()));
  }
  if (req.users() <= req.tau()) {
    throw Error(Errc::invalid_dimensions, "target inflation needs K > tau");
  }
  if (load >= tau * (1.0 - Tolerances::load)) return req.gammas();

  const double cap = 1.0 - Tolerances::inflation_cap;
  const Index k = req.users();
  Vector f_hat = f;
  std::vector<bool> capped(static_cast<std::size_t>(k), false);
  for (Index i = 0; i < k; ++i) capped[static_cast<std::size_t>(i)] = f(i) >= cap;

  for (;;) {
    double budget = tau;
    double free_load = 0.0;
    for (Index i = 0; i < k; ++i) {
      if (capped[static_cast<std::size_t>(i)]) {
        budget -= f_hat(i);
      } else {
        free_load += f(i);
      }
    }
    if (free_load <= 0.0) break;
    const double scale = budget / free_load;
    bool changed = false;
    for (Index i = 0; i < k; ++i) {
      if (!capped[static_cast<std::size_t>(i)] && f(i) * scale >= cap) {
        capped[static_cast<std::size_t>(i)] = true;
        f_hat(i) = cap;
        changed = true;
      }
    }
    if (!changed) {
      for (Index i = 0; i < k; ++i) {
        if (!capped[static_cast<std::size_t>(i)]) f_hat(i) = f(i) * scale;
      }
      break;
    }
  }

  Vector gamma_hat(k);
  for (Index i = 0; i < k; ++i) gamma_hat(i) = std::max(req.gamma(i), gamma_from_load(f_hat(i)));
  return gamma_hat;
}

Allocation gwbe_design(const SinrRequirements& req, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(Errc::invalid_argument, "scale constant c must be positive");
  }
  const Index k = req.users();
  const Index tau = req.tau();
  const double load = req.load();
  if (!within_load(load, static_cast<double>(tau))) {
    throw Error(Errc::infeasible_requirements,
                "load " + std::to_string(load) + " exceeds tau " + std::to_string(tau));
  }

  if (k <= tau) {
    return Allocation(PilotMatrix(Matrix::Identity(tau, k)),
                      PowerAllocation(Vector::Constant(k, c), c), Vector::Constant(k, kInf), req);
  }

  const Vector gamma_hat = inflate_targets(req);
  const Vector p = c * effective_loads(gamma_hat);
  const double lambda = p.sum() / static_cast<double>(tau);

  Matrix s;
  const bool identical = p.maxCoeff() - p.minCoeff() <= Tolerances::load * p.maxCoeff();
  if (auto frame = identical ? equiangular_frame(k, tau) : std::nullopt) {
    s = std::move(*frame);
  } else {
    Vector e = Vector::Zero(k);
    e.head(tau).setConstant(lambda);
    try {
      const SpectrumDiagonalPair<double> pair(std::move(e), p);
      const auto built = construct_symmetric(pair);
      s = std::sqrt(lambda) * built.q.leftCols(tau).transpose() *
          p.cwiseSqrt().cwiseInverse().asDiagonal();
    } catch (const Error& err) {
      throw Error(Errc::construction_failure, err.what());
    }
    s = normalized_columns(std::move(s));
  }

  PilotMatrix pilots(std::move(s));
  const Matrix frame_operator = pilots.s() * p.asDiagonal() * pilots.s().transpose();
  const double sds_error =
      (frame_operator - lambda * Matrix::Identity(tau, tau)).cwiseAbs().maxCoeff();
  if (!(sds_error <= Tolerances::construction * std::max(1.0, lambda))) {
    throw Error(Errc::construction_failure, "S D S^T residual " + std::to_string(sds_error));
  }
  const Vector sinr = asymptotic_sinr(pilots.gram(), p);
  for (Index i = 0; i < k; ++i) {
    if (!(std::abs(sinr(i) - gamma_hat(i)) <= Tolerances::sinr_match * gamma_hat(i))) {
      throw Error(Errc::construction_failure,
                  "user " + std::to_string(i) + " reaches SINR " + std::to_string(sinr(i)) +
                      " instead of " + std::to_string(gamma_hat(i)));
    }
  }
  const double residual = null_space_residual(pilots.gram(), p, gamma_hat);
  if (!(residual <= Tolerances::sinr_match)) {
    throw Error(Errc::construction_failure, "null-space residual " + std::to_string(residual));
  }
  return Allocation(std::move(pilots), PowerAllocation(p, c), gamma_hat, req);
}

std::optional<Matrix> equiangular_frame(Index users, Index tau) {
  if (tau < 1 || users < tau) return std::nullopt;
  if (users == tau) return Matrix(Matrix::Identity(tau, users));
  if (tau == 1) return Matrix(Matrix::Ones(1, users));
  if (users == tau + 1) return simplex_frame(tau);
  if (users == 6 && tau == 3) return icosahedral_frame();
  return std::nullopt;
}

WbeFrame wbe_sequences(Index users, Index tau) {
  if (tau < 1 || users < tau) {
    throw Error(Errc::invalid_dimensions,
                "WBE needs K >= tau >= 1, got K=" + std::to_string(users) +
                    " tau=" + std::to_string(tau));
  }
  if (auto frame = equiangular_frame(users, tau)) {
    return {PilotMatrix(std::move(*frame)), true};
  }
  // Identical targets with load exactly tau: gamma = tau / (K - tau).
  const double gamma = static_cast<double>(tau) / static_cast<double>(users - tau);
  auto alloc = gwbe_design(validate_requirements(Vector::Constant(users, gamma), tau));
  const bool equiangular = is_equiangular(alloc.pilots().gram(), users, tau);
  return {alloc.pilots(), equiangular};
}

PilotMatrix fos_pilots(Index users, Index tau, const FosGrouping& grouping) {
  if (grouping.users() != users || grouping.tau() != tau) {
    throw Error(Errc::invalid_grouping, "grouping is for K=" + std::to_string(grouping.users()) +
                                            ", tau=" + std::to_string(grouping.tau()));
  }
  Matrix s = Matrix::Zero(tau, users);
  for (Index u = 0; u < users; ++u) s(grouping.group_of(u), u) = 1.0;
  return PilotMatrix(std::move(s));
}

PowerAllocation scheme_powers(const SinrRequirements& req, double c) {
  return PowerAllocation(c * effective_loads(req.gammas()), c);
}

}  // namespace pilotcap
