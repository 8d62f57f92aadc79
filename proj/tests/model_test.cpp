// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include <doctest.h>

#include "isac/quadrature.hpp"
#include "support.hpp"

using namespace isac;
using testkit::rel_err;

TEST_CASE("steering vector values") {
  const CVec a2 = steering_vector(2, 0.0);
  CHECK(std::abs(a2[0] - cd(1.0)) < 1e-15);
  CHECK(std::abs(a2[1] - cd(1.0)) < 1e-15);
  const CVec a3 = steering_vector(3, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a3[i] - cd(1.0)) < 1e-15);

  const CVec b = steering_vector(2, kPi / 6);
  CHECK(std::abs(b[0] - std::polar(1.0, -kPi / 4)) < 1e-14);
  CHECK(std::abs(b[1] - std::polar(1.0, kPi / 4)) < 1e-14);
}

TEST_CASE("steering vectors are unit modulus and conjugate symmetric") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-kPi / 2, kPi / 2);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 9;
    const double th = u(eng);
    const CVec a = steering_vector(n, th);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-14);
      CHECK(std::abs(a[i] - std::conj(a[n - 1 - i])) < 1e-13);
    }
  }
}

TEST_CASE("steering vector rejects angles outside the half circle") {
  CHECK_THROWS_AS(steering_vector(4, 2.0), std::domain_error);
  CHECK_NOTHROW(steering_vector(4, kPi / 2));
}

TEST_CASE("steering derivative values and finite-difference oracle") {
  const CVec d1 = steering_derivative(1, 0.7);
  CHECK(std::abs(d1[0]) == 0.0);
  const CVec d2 = steering_derivative(2, 0.0);
  CHECK(std::abs(d2[0] - cd(0.0, -kPi / 2)) < 1e-14);
  CHECK(std::abs(d2[1] - cd(0.0, kPi / 2)) < 1e-14);

  const double h = 1e-6;
  const CVec fd = (steering_vector(4, 0.3 + h) - steering_vector(4, 0.3 - h)) / (2 * h);
  const CVec an = steering_derivative(4, 0.3);
  CHECK((fd - an).norm() / an.norm() <= 1e-6);
}

TEST_CASE("Rician channel: line-of-sight limit, determinism and mean power") {
  const ArrayConfig ar{8, 12, 6, 3, 6, RxArchitecture::PartiallyConnected};
  const double beta_c = 1e-3 / std::pow(400.0, 3.5);
  const CMat h = gen_rician_channel(ar, 0.36, 400.0, 1e12, 1e-3, 3.5, 7);
  const CMat los = std::sqrt(beta_c) * steering_vector(6, 0.36) * steering_vector(8, 0.36).adjoint();
  double worst = 0.0;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j) worst = std::max(worst, std::abs(h(i, j) - los(i, j)) / std::abs(los(i, j)));
  CHECK(worst <= 1e-5);

  const CMat a = gen_rician_channel(ar, 0.36, 400.0, 0.158, 1e-3, 3.5, 11);
  const CMat b = gen_rician_channel(ar, 0.36, 400.0, 0.158, 1e-3, 3.5, 11);
  CHECK(a == b);

  double acc = 0.0;
  const int n = 10000;
  for (int s = 0; s < n; ++s)
    acc += gen_rician_channel(ar, 0.36, 400.0, 0.158, 1e-3, 3.5, s).squaredNorm() / (6.0 * 8.0);
  CHECK(rel_err(acc / n, beta_c) < 0.1);
}

TEST_CASE("sub-carrier responses from taps") {
  const ArrayConfig ar{3, 4, 2, 1, 2, RxArchitecture::PartiallyConnected};
  const auto flat = gen_wideband_channel(ar, 1, 5, 1.0, 2);
  for (const auto& h : flat) CHECK((h - flat[0]).norm() == 0.0);

  std::mt19937_64 eng(5);
  const CMat a = testkit::random_matrix(2, 3, eng), b = testkit::random_matrix(2, 3, eng);
  const auto two = taps_to_subcarriers({a, b}, 2);
  CHECK((two[0] - (a + b)).norm() < 1e-14);
  CHECK((two[1] - (a - b)).norm() < 1e-14);

  const auto taps = wideband_taps(ar, 4, 1.0, 9);
  const auto resp = taps_to_subcarriers(taps, 16);
  double lhs = 0.0, rhs = 0.0;
  for (const auto& h : resp) lhs += h.squaredNorm();
  for (const auto& t : taps) rhs += t.squaredNorm();
  CHECK(rel_err(lhs, 16.0 * rhs) <= 1e-9);

  CHECK_THROWS_AS(taps_to_subcarriers(taps, 2), std::invalid_argument);
}

TEST_CASE("prior Fisher information of single Gaussians") {
  const GmmAnglePrior g2({{1.0, 0.0, 1e-2}});
  CHECK(rel_err(prior_fisher_theta(g2, make_prior_grid(g2, 2048)), 100.0) <= 1e-6);
  const GmmAnglePrior g3({{1.0, 0.0, 1e-3}});
  CHECK(rel_err(prior_fisher_theta(g3, make_prior_grid(g3, 2048)), 1000.0) <= 1e-6);
}

TEST_CASE("prior Fisher information of the reference mixture against Monte Carlo") {
  const GmmAnglePrior p = reference_angle_prior();
  const double quad = prior_fisher_theta(p, make_prior_grid(p, 2048));
  // Independent estimator: score from a central difference of the log density.
  std::mt19937_64 eng(21);
  const int n = 10000000;
  double s1 = 0.0, s2 = 0.0;
  const double h = 1e-5;
  for (int i = 0; i < n; ++i) {
    const double t = p.sample(eng);
    const double sc = (p.log_density(t + h) - p.log_density(t - h)) / (2 * h);
    s1 += sc * sc;
    s2 += sc * sc * sc * sc;
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(quad - mean) <= 3.0 * se);
}

TEST_CASE("mixture prior validation") {
  CHECK_THROWS_AS(GmmAnglePrior({{0.5, 0.0, 1e-2}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmAnglePrior({{1.0, 0.0, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmAnglePrior({{1.0, 2.0, 1e-2}}), std::invalid_argument);
  const GmmAnglePrior p = reference_angle_prior();
  CHECK(std::abs(p.mode() + 0.74) < 0.02);
}

TEST_CASE("array configuration names the divisibility rule") {
  ArrayConfig ar{8, 12, 6, 3, 5, RxArchitecture::PartiallyConnected};
  try {
    ar.validate();
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("divisible") != std::string::npos);
  }
  ar.rx_architecture = RxArchitecture::FullyConnected;
  CHECK_NOTHROW(ar.validate());
}

TEST_CASE("named and indexed random streams are reproducible and distinct") {
  Rng a(5), b(5);
  CHECK(a.split("x").engine()() == b.split("x").engine()());
  CHECK(Rng(5).split("x").engine()() != Rng(5).split("y").engine()());
  CHECK(Rng(5).split(std::uint64_t{1}).engine()() != Rng(5).split(std::uint64_t{2}).engine()());
}

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watts(-90.0) == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3).epsilon(1e-12));
}
