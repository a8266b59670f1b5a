// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstdlib>

#include "oracles.hpp"
#include "pilotcap/sequences.hpp"
#include "pilotcap/simulator.hpp"

using namespace pilotcap;
using Catch::Approx;
using oracle::error_of;

namespace {

Allocation etf_design() {
  return gwbe_design(validate_requirements(std::vector<double>(6, 1.0), 3));
}

}  // namespace

TEST_CASE("trial streams depend only on seed and trial") {
  auto a = trial_stream(42, 7);
  auto b = trial_stream(42, 7);
  auto c = trial_stream(42, 8);
  auto d = trial_stream(43, 7);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
  // high bits of the seed matter
  CHECK(trial_stream(1ull << 40, 0)() != trial_stream(0, 0)());
}

TEST_CASE("channels are unit-variance circular") {
  auto rng = trial_stream(1, 0);
  auto h = generate_channels(4000, 4, rng);
  CHECK(h.rows() == 4000);
  const double power = h.cwiseAbs2().mean();
  CHECK(power == Approx(1.0).epsilon(0.03));
  CHECK(std::abs(h.real().cwiseAbs2().mean() - 0.5) < 0.02);
  CHECK(std::abs(h.mean()) < 0.03);
  CHECK(error_of([&] { generate_channels(0, 4, rng); }) == Errc::invalid_argument);
}

TEST_CASE("noiseless LS estimate mixes channels through the Gram matrix") {
  auto a = etf_design();
  auto rng = trial_stream(2, 0);
  auto h = generate_channels(64, 6, rng);
  auto est = ls_estimate(h, a.pilots(), 0.0, rng);
  const Matrix& g = a.pilots().gram();
  for (Index i = 0; i < 6; ++i) {
    ComplexMatrix want = ComplexMatrix::Zero(64, 1);
    for (Index j = 0; j < 6; ++j) want += g(i, j) * h.col(j);
    CHECK((est.col(i) - want).norm() < 1e-12);
  }
  CHECK(error_of([&] { ls_estimate(h.leftCols(5), a.pilots(), 0.0, rng); }) == Errc::dimension_mismatch);
  CHECK(error_of([&] { ls_estimate(h, a.pilots(), -1.0, rng); }) == Errc::invalid_argument);
}

TEST_CASE("training noise has covariance rho_ij sigma_z^2") {
  auto a = etf_design();
  auto rng = trial_stream(3, 0);
  const ComplexMatrix zero = ComplexMatrix::Zero(20000, 6);
  auto n = ls_estimate(zero, a.pilots(), 0.4, rng);
  const Matrix& g = a.pilots().gram();
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 6; ++j) {
      const double cov = (n.col(i).adjoint() * n.col(j))(0, 0).real() / 20000.0;
      CHECK(cov == Approx(0.4 * g(i, j)).margin(0.02));
    }
  }
}

TEST_CASE("MRT precoders have unit norm") {
  auto rng = trial_stream(4, 0);
  auto t = mrt_precoders(generate_channels(32, 5, rng));
  CHECK((t.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  ComplexMatrix z = ComplexMatrix::Zero(8, 2);
  z(0, 0) = 1.0;
  CHECK(error_of([&] { mrt_precoders(z); }) == Errc::zero_norm_estimate);
}

TEST_CASE("trial energy decomposition") {
  auto rng = trial_stream(5, 0);
  auto h = generate_channels(16, 4, rng);
  auto t = mrt_precoders(generate_channels(16, 4, rng));
  Vector p(4);
  p << 1, 2, 0.5, 3;
  auto r = evaluate_trial(h, t, p, 0.25);
  for (Index i = 0; i < 4; ++i) {
    double total = 0.0;
    for (Index j = 0; j < 4; ++j) total += p(j) * std::norm(h.col(i).dot(t.col(j)));
    CHECK(r.signal_power(i) + r.interference_power(i) == Approx(total).epsilon(1e-12));
    CHECK(r.signal_power(i) == Approx(p(i) * std::norm(h.col(i).dot(t.col(i)))).epsilon(1e-12));
    CHECK(r.noise_power(i) == 0.25);
    CHECK(r.empirical_sinr(i) == Approx(r.signal_power(i) / (r.interference_power(i) + 0.25)));
  }
  CHECK(error_of([&] { evaluate_trial(h, t, Vector::Ones(3), 0.1); }) == Errc::dimension_mismatch);
}

TEST_CASE("orthogonal pilots without noise give infinite SINR") {
  auto rng = trial_stream(6, 0);
  auto h = generate_channels(8, 2, rng);
  ComplexMatrix t(8, 2);
  t.col(0) = h.col(0).normalized();
  // t_1 orthogonal to h_0
  t.col(1) = h.col(1) - h.col(0) * (h.col(0).dot(h.col(1)) / h.col(0).squaredNorm());
  t.col(1).normalize();
  auto r = evaluate_trial(h, t, Vector::Ones(2), 0.0);
  CHECK(std::isinf(r.empirical_sinr(0)));
}

TEST_CASE("empirical_sinr is reproducible and thread-count independent") {
  auto a = etf_design();
  SimScenario s;
  s.m_antennas = 64;
  s.n_trials = 60;
  s.seed = 9;
  ::setenv("PILOTCAP_THREADS", "1", 1);
  auto one = empirical_sinr(s, a.pilots(), a.powers());
  ::setenv("PILOTCAP_THREADS", "4", 1);
  auto four = empirical_sinr(s, a.pilots(), a.powers());
  ::unsetenv("PILOTCAP_THREADS");
  auto again = empirical_sinr(s, a.pilots(), a.powers());
  CHECK(one.mean.empirical_sinr == four.mean.empirical_sinr);
  CHECK(one.se_sinr == again.se_sinr);
  CHECK(one.trials == 60);
  s.seed = 10;
  CHECK(empirical_sinr(s, a.pilots(), a.powers()).mean.empirical_sinr != one.mean.empirical_sinr);
}

TEST_CASE("empirical_sinr approaches the asymptotic value") {
  auto a = etf_design();
  SimScenario s;
  s.m_antennas = 1024;
  s.n_trials = 200;
  s.seed = 1;
  auto est = empirical_sinr(s, a.pilots(), a.powers());
  for (Index i = 0; i < 6; ++i) {
    CHECK(est.mean.empirical_sinr(i) == Approx(1.0).epsilon(0.1));
    CHECK(est.se_sinr(i) > 0.0);
    CHECK(est.se_sinr(i) < 0.05);
  }
}

TEST_CASE("empirical_sinr argument errors") {
  auto a = etf_design();
  SimScenario s;
  s.n_trials = 0;
  CHECK(error_of([&] { empirical_sinr(s, a.pilots(), a.powers()); }) == Errc::invalid_argument);
  s = SimScenario{};
  CHECK(error_of([&] { empirical_sinr(s, a.pilots(), PowerAllocation(Vector::Ones(5), 1.0)); }) ==
        Errc::dimension_mismatch);
}

TEST_CASE("convergence_sweep rows and ordering check") {
  auto a = etf_design();
  SimScenario s;
  s.n_trials = 20;
  std::vector<Index> ms{16, 64};
  auto rows = convergence_sweep(s, ms, a.pilots(), a.powers());
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].m_antennas == 16);
  CHECK(rows[6].m_antennas == 64);
  CHECK(rows[6].user == 0);
  for (const auto& r : rows) {
    CHECK(r.predicted == Approx(1.0));
    CHECK(r.relative_gap == Approx(std::abs(r.empirical - 1.0)));
  }
  std::vector<Index> bad{64, 16};
  CHECK(error_of([&] { convergence_sweep(s, bad, a.pilots(), a.powers()); }) == Errc::invalid_argument);

  // orthogonal pilots predict +inf; a finite empirical value counts as gap 1
  PilotMatrix eye(Matrix::Identity(2, 2));
  s.sigma_w_sq = 0.1;
  std::vector<Index> one{8};
  auto inf_rows = convergence_sweep(s, one, eye, PowerAllocation(Vector::Ones(2), 1.0));
  CHECK(std::isinf(inf_rows[0].predicted));
  CHECK(inf_rows[0].relative_gap == 1.0);
}
