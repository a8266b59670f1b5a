// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pilotcap/error.hpp"
#include "pilotcap/tolerances.hpp"

namespace pilotcap {

namespace detail {

template <typename Derived>
std::vector<typename Derived::Scalar> sorted_decreasing(const Eigen::MatrixBase<Derived>& v) {
  std::vector<typename Derived::Scalar> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// Largest prefix-sum deficit of x against y after sorting both decreasingly,
// i.e. max_n (sum_{k<=n} y_[k] - sum_{k<=n} x_[k]); <= 0 iff x majorizes y.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar majorization_deficit(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw Error(Errc::length_mismatch, "majorization operands have lengths " +
                                           std::to_string(x.size()) + " and " +
                                           std::to_string(y.size()));
  }
  const auto xs = sorted_decreasing(x);
  const auto ys = sorted_decreasing(y);
  Scalar px = 0, py = 0;
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    px += xs[k];
    py += static_cast<Scalar>(ys[k]);
    worst = std::max(worst, py - px);
  }
  return worst;
}

}  // namespace detail

/// True iff every decreasing-order prefix sum of x is >= that of y. Equal totals are
/// not required here. Throws Error(length_mismatch).
template <typename DerivedX, typename DerivedY>
bool majorizes(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() == 0 && y.size() == 0) return true;
  return detail::majorization_deficit(x, y) <= 0;
}

/// Prescribed spectrum e and prescribed diagonal p with equal sums and e majorizing p.
template <typename Scalar>
class SpectrumDiagonalPair {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Throws Error(length_mismatch) or Error(not_majorized). Sums must agree and the
  /// prefix-sum deficit must stay below tol * max(1, sum |p|).
  SpectrumDiagonalPair(VectorType eigenvalues, VectorType diagonal,
                       Scalar tol = Scalar(Tolerances::structural))
      : e_(std::move(eigenvalues)), p_(std::move(diagonal)) {
    if (e_.size() != p_.size() || e_.size() == 0) {
      throw Error(Errc::length_mismatch, "spectrum and diagonal must have the same positive length");
    }
    const Scalar scale = std::max(Scalar(1), p_.cwiseAbs().sum());
    if (std::abs(e_.sum() - p_.sum()) > tol * scale) {
      throw Error(Errc::not_majorized, "spectrum and diagonal sums differ");
    }
    if (detail::majorization_deficit(e_, p_) > tol * scale) {
      throw Error(Errc::not_majorized, "spectrum does not majorize the diagonal");
    }
  }

  const VectorType& eigenvalues() const noexcept { return e_; }
  const VectorType& diagonal() const noexcept { return p_; }

 private:
  VectorType e_;
  VectorType p_;
};

template <typename Scalar>
struct SymmetricConstruction {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  /// Symmetric matrix with the prescribed diagonal, H = Q diag(e) Q^T.
  MatrixType h;
  /// Orthogonal factor; column j is the eigenvector of eigenvalue e_j, so for
  /// e = [lambda_1..lambda_tau, 0..0] the leading tau columns span range(H).
  MatrixType q;
};

/// Builds a real symmetric H with diag(H) = p and spectrum e by a chain of at most
/// K-1 plane rotations applied to diag(e).
///
/// Slots are kept sorted by current diagonal value. Each step takes the largest
/// unassigned target t, finds the last slot a whose value is still >= t and rotates
/// it against its successor b so that H_aa = t. The merged value H_bb = x + z - t
/// stays between its neighbours, so the ordering survives and the remaining diagonal
/// still majorizes the remaining targets. Within the unassigned block H stays diagonal,
/// which makes every rotation angle closed-form: cos^2 = (t - z) / (x - z).
///
/// The output is a deterministic function of (e, p): ties are broken by index.
/// Throws Error(numerical_failure) if the final residuals exceed tol.
template <typename Scalar>
SymmetricConstruction<Scalar> construct_symmetric(const SpectrumDiagonalPair<Scalar>& pair,
                                                  Scalar tol = Scalar(Tolerances::construction)) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using std::sqrt;
  const auto& e = pair.eigenvalues();
  const auto& p = pair.diagonal();
  const Eigen::Index n = e.size();
  const Scalar scale = std::max(Scalar(1), e.cwiseAbs().maxCoeff());
  const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale;

  auto by_value_desc = [](const auto& v) {
    return [&v](Eigen::Index a, Eigen::Index b) { return v(a) > v(b) || (v(a) == v(b) && a < b); };
  };

  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Eigen::Index{0});
  std::sort(active.begin(), active.end(), by_value_desc(e));

  std::vector<Eigen::Index> targets(static_cast<std::size_t>(n));
  std::iota(targets.begin(), targets.end(), Eigen::Index{0});
  std::sort(targets.begin(), targets.end(), by_value_desc(p));

  std::vector<Scalar> diag(e.data(), e.data() + n);
  std::vector<Eigen::Index> output_row(static_cast<std::size_t>(n), -1);
  // Slot-coordinate rotation: H_slot = R diag(e) R^T.
  MatrixType r = MatrixType::Identity(n, n);

  for (std::size_t step = 0; step + 1 < targets.size(); ++step) {
    const Eigen::Index target = targets[step];
    const Scalar want = p(target);

    std::size_t k = 0;
    while (k + 1 < active.size() && diag[static_cast<std::size_t>(active[k + 1])] >= want - slack) {
      ++k;
    }
    if (k + 1 == active.size()) {
      // Every remaining slot already sits at (numerically) the same value as the targets.
      break;
    }
    const Eigen::Index a = active[k];
    const Eigen::Index b = active[k + 1];
    const Scalar x = diag[static_cast<std::size_t>(a)];
    const Scalar z = diag[static_cast<std::size_t>(b)];
    if (x - want > slack) {
      const Scalar c2 = std::clamp((want - z) / (x - z), Scalar(0), Scalar(1));
      const Scalar c = sqrt(c2);
      const Scalar s = sqrt(Scalar(1) - c2);
      const auto row_a = r.row(a).eval();
      r.row(a) = c * row_a + s * r.row(b);
      r.row(b) = c * r.row(b) - s * row_a;
      diag[static_cast<std::size_t>(b)] = x + z - want;
    }
    diag[static_cast<std::size_t>(a)] = want;
    output_row[static_cast<std::size_t>(a)] = target;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(k));
  }

  // Remaining slots (one, or a tied block) take the remaining targets in order.
  {
    std::size_t next = targets.size() - active.size();
    for (Eigen::Index slot : active) output_row[static_cast<std::size_t>(slot)] = targets[next++];
  }

  MatrixType q(n, n);
  for (Eigen::Index slot = 0; slot < n; ++slot) {
    q.row(output_row[static_cast<std::size_t>(slot)]) = r.row(slot);
  }

  auto orthogonality_error = [&q, n] {
    return (q.transpose() * q - MatrixType::Identity(n, n)).cwiseAbs().maxCoeff();
  };
  if (orthogonality_error() > tol / 10) {
    // One Newton-Schulz step pulls Q back onto the orthogonal group.
    q = (q * (Scalar(1.5) * MatrixType::Identity(n, n) - Scalar(0.5) * q.transpose() * q)).eval();
  }

  MatrixType h = q * e.asDiagonal() * q.transpose();
  h = (Scalar(0.5) * (h + h.transpose())).eval();

  const Scalar diag_error = (h.diagonal() - p).cwiseAbs().maxCoeff();
  const Scalar orth_error = orthogonality_error();
  if (!(diag_error <= tol * scale) || !(orth_error <= tol)) {
    throw Error(Errc::numerical_failure,
                "diagonal residual " + std::to_string(static_cast<double>(diag_error)) +
                    ", orthogonality residual " + std::to_string(static_cast<double>(orth_error)));
  }
  return {std::move(h), std::move(q)};
}

}  // namespace pilotcap
