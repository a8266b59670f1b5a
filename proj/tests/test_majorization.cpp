// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "pilotcap/majorization.hpp"

using namespace pilotcap;
using oracle::error_of;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

void check_construction(const Vec& e, const Vec& p, double tol = 1e-8) {
  SpectrumDiagonalPair<double> pair(e, p);
  auto c = construct_symmetric(pair);
  const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
  CHECK((c.h.diagonal() - p).cwiseAbs().maxCoeff() <= tol * scale);
  Vec want = e;
  std::sort(want.data(), want.data() + want.size(), std::greater<>());
  CHECK((oracle::eigenvalues_decreasing(c.h) - want).cwiseAbs().maxCoeff() <= tol * scale);
  CHECK((c.q.transpose() * c.q - Mat::Identity(e.size(), e.size())).cwiseAbs().maxCoeff() <= tol);
  CHECK((c.q * e.asDiagonal() * c.q.transpose() - c.h).cwiseAbs().maxCoeff() <= tol * scale);
}

}  // namespace

TEST_CASE("majorizes on small vectors") {
  CHECK(majorizes(vec({3, 0, 0}), vec({1, 1, 1})));
  CHECK(majorizes(vec({1, 1, 1}), vec({1, 1, 1})));
  CHECK_FALSE(majorizes(vec({1, 1, 1}), vec({3, 0, 0})));
  CHECK(majorizes(vec({0, 2, 1}), vec({1, 1, 1})));
  CHECK(majorizes(Vec(), Vec()));
  CHECK(error_of([] { majorizes(vec({1, 2}), vec({1})); }) == Errc::length_mismatch);
}

TEST_CASE("SpectrumDiagonalPair validation") {
  CHECK(error_of([] { SpectrumDiagonalPair<double>(vec({1, 1}), vec({2, 0})); }) == Errc::not_majorized);
  CHECK(error_of([] { SpectrumDiagonalPair<double>(vec({3, 0}), vec({1, 1})); }) == Errc::not_majorized);
  CHECK(error_of([] { SpectrumDiagonalPair<double>(vec({2}), vec({1, 1})); }) == Errc::length_mismatch);
  CHECK(error_of([] { SpectrumDiagonalPair<double>(Vec(), Vec()); }) == Errc::length_mismatch);
  CHECK_FALSE(error_of([] { SpectrumDiagonalPair<double>(vec({2, 0}), vec({1, 1})); }));
}

TEST_CASE("construct_symmetric hand cases") {
  check_construction(vec({2, 0}), vec({1, 1}));
  check_construction(vec({5}), vec({5}));
  check_construction(vec({3, 2, 1}), vec({3, 2, 1}));
  check_construction(vec({3, 2, 1}), vec({1, 2, 3}));
  check_construction(vec({1.5, 1.5, 1.5, 0, 0, 0}), vec({0.75, 0.75, 0.75, 0.75, 0.75, 0.75}));
  check_construction(vec({2, 2, 0, 0, 0}), vec({1.2, 0.9, 0.8, 0.6, 0.5}));
  check_construction(vec({4, -1, 0}), vec({1, 1, 1}));
}

TEST_CASE("2x2 rotation has the textbook off-diagonal") {
  // diag(2,0) rotated to diagonal (1,1) has |off-diagonal| = 1
  auto c = construct_symmetric(SpectrumDiagonalPair<double>(vec({2, 0}), vec({1, 1})));
  CHECK(std::abs(c.h(0, 1)) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("construct_symmetric is deterministic") {
  const Vec e = vec({2.4, 2.4, 0, 0, 0, 0});
  const Vec p = vec({1.0, 0.9, 0.8, 0.8, 0.7, 0.6});
  auto a = construct_symmetric(SpectrumDiagonalPair<double>(e, p));
  auto b = construct_symmetric(SpectrumDiagonalPair<double>(e, p));
  CHECK(a.h == b.h);
  CHECK(a.q == b.q);
}

TEST_CASE("construct_symmetric random majorizing pairs") {
  std::mt19937_64 rng(20261015);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    // e starts as p; moving mass from a smaller entry to a larger one keeps e majorizing p
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = u(rng);
    Vec e = p;
    std::sort(e.data(), e.data() + n, std::greater<>());
    for (int step = 0; step < n; ++step) {
      const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
      if (i == j || e(i) < e(j)) continue;
      const double move = e(j) * u(rng);
      e(i) += move;
      e(j) -= move;
    }
    CAPTURE(trial, n);
    check_construction(e, p);
  }
}

TEST_CASE("construct_symmetric with flat spectrum on tau slots") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 40)(rng);
    const int tau = std::uniform_int_distribution<int>(1, k - 1)(rng);
    Vec p = oracle::random_feasible_gammas(rng, k, tau).unaryExpr([](double g) { return oracle::f(g); });
    p *= tau / p.sum();
    if (p.maxCoeff() > 1.0) continue;
    Vec e = Vec::Zero(k);
    e.head(tau).setConstant(1.0);
    CAPTURE(trial, k, tau);
    check_construction(e, p);
  }
}
