// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include <doctest.h>

#include "isac/ofdm_opt.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace isac;
using testkit::rel_err;

namespace {

CVec vec_of(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

CMat phase_matrix(int rows, int cols, std::mt19937_64& eng) {
  const CVec p = testkit::random_phases(rows * cols, eng);
  return Eigen::Map<const CMat>(p.data(), rows, cols);
}

}  // namespace

TEST_CASE("WMMSE surrogate: empty precoder and the scalar channel") {
  const WmmseAux e = wmmse_update(CMat::Ones(1, 2), CMat::Ones(2, 1), CMat::Zero(1, 0), 1.0);
  CHECK(e.xi == 0.0);
  CHECK(wmmse_surrogate(e, CMat::Ones(2, 1)) == 0.0);

  // h = 1, v = 1, noise 1: rate log 2.
  const WmmseAux s = wmmse_update(CMat::Ones(1, 1), CMat::Ones(1, 1), CMat::Ones(1, 1), 1.0);
  CHECK(std::abs(s.xi - std::log(2.0)) < 1e-14);
  CHECK(std::abs(s.q(0, 0) - cd(0.5)) < 1e-14);
  CHECK(std::abs(s.u(0, 0) - cd(2.0)) < 1e-14);
}

TEST_CASE("WMMSE surrogate is tight at the build point and a minorizer elsewhere") {
  std::mt19937_64 eng(12);
  for (int t = 0; t < 30; ++t) {
    const int nt = 4, nrf = 2, nu = 1 + t % 3;
    const double noise = 0.1 + 0.2 * (t % 4);
    const CMat h = testkit::random_matrix(nu, nt, eng);
    const CMat v = phase_matrix(nt, nrf, eng);
    const CMat vbb = digital_factor(testkit::random_psd(nrf, eng) / 4.0);
    const WmmseAux aux = wmmse_update(h, v, vbb, noise);
    const double exact = log_det_rate(h, v * vbb * vbb.adjoint() * v.adjoint(), noise);
    CHECK(std::abs(aux.xi - exact) <= 1e-8 * std::max(1.0, exact));
    CHECK(std::abs(wmmse_surrogate(aux, v) - exact) <= 1e-8 * std::max(1.0, exact));
    for (int k = 0; k < 5; ++k) {
      const CMat w = phase_matrix(nt, nrf, eng);
      const double r = log_det_rate(h, w * vbb * vbb.adjoint() * w.adjoint(), noise);
      CHECK(wmmse_surrogate(aux, w) <= r + 1e-10 * std::max(1.0, r));
    }
  }
}

TEST_CASE("thin digital factor reproduces the covariance") {
  std::mt19937_64 eng(2);
  const CMat r = testkit::random_psd(4, eng, 2);
  const CMat f = digital_factor(r);
  CHECK(f.cols() == 2);
  CHECK((f * f.adjoint() - r).norm() <= 1e-12 * r.norm());
  CHECK(digital_factor(CMat::Zero(3, 3)).cols() == 0);
}

TEST_CASE("vectorized analog subproblem matches the matrix forms") {
  std::mt19937_64 eng(7);
  const int nt = 4, nrf = 2;
  const CMat a = testkit::random_psd(nt, eng);
  const CMat h = testkit::random_matrix(2, nt, eng);
  const CMat v = phase_matrix(nt, nrf, eng);
  const CMat r = testkit::random_psd(nrf, eng) / 8.0;
  const WmmseAux aux = wmmse_update(h, v, digital_factor(r), 0.5);
  const std::vector<CMat> rs = {r};
  const std::vector<WmmseAux> auxs = {aux};
  const AnalogSubproblem sub = make_analog_subproblem(a, rs, auxs, 1.0, 0.3, nt);
  const CMat w = phase_matrix(nt, nrf, eng);
  const CVec x = vec_of(w);
  CHECK(rel_err(sub.sensing_value(x), (a * w * r * w.adjoint()).trace().real()) < 1e-12);
  CHECK(rel_err(sub.power_value(x), (w * r * w.adjoint()).trace().real()) < 1e-12);
  CHECK(rel_err(sub.rate_value(x), wmmse_surrogate(aux, w)) < 1e-10);
  CHECK(rel_err(sub.rate_value(vec_of(v)), aux.xi) < 1e-10);
}

TEST_CASE("constrained phase pass keeps feasibility and is not beaten on a phase grid") {
  std::mt19937_64 eng(19);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const int nt = 3 + t % 3, nrf = 1 + t % 2;
    const CMat a = testkit::random_psd(nt, eng);
    const CMat h = testkit::random_matrix(2, nt, eng);
    const CMat v0 = phase_matrix(nt, nrf, eng);
    const CMat r = testkit::random_psd(nrf, eng) / (nt * nrf);
    const WmmseAux aux = wmmse_update(h, v0, digital_factor(r), 0.2);
    const std::vector<CMat> rs = {r};
    const std::vector<WmmseAux> auxs = {aux};
    const double power = (v0 * r * v0.adjoint()).trace().real() * 1.05;
    const AnalogSubproblem sub = make_analog_subproblem(a, rs, auxs, power, 0.9 * aux.xi, nt);
    REQUIRE(sub.feasible(vec_of(v0)));
    const CVec x = vec_of(coordinate_update_isac(sub, v0));
    CHECK(sub.feasible(x));
    CHECK(sub.sensing_value(x) >= sub.sensing_value(vec_of(v0)) * (1 - 1e-12));
    // The last coordinate is optimal among grid phases that keep both constraints.
    const Eigen::Index m = x.size() - 1;
    double grid_best = -std::numeric_limits<double>::infinity();
    CVec y = x;
    for (int k = 0; k < 3600; ++k) {
      y[m] = std::polar(1.0, 2.0 * kPi * k / 3600);
      if (sub.feasible(y, 0.0)) grid_best = std::max(grid_best, sub.sensing_value(y));
    }
    if (std::isfinite(grid_best)) {
      ++checked;
      CHECK(grid_best - sub.sensing_value(x) <= 1e-9 * std::max(1.0, sub.sensing_value(x)));
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("FPP-SCA returns a feasible analog matrix that does not lose objective") {
  std::mt19937_64 eng(23);
  for (int t = 0; t < 4; ++t) {
    const int nt = 3, nrf = 1 + t % 2;
    const CMat a = testkit::random_psd(nt, eng);
    const CMat h = testkit::random_matrix(2, nt, eng);
    const CMat v0 = phase_matrix(nt, nrf, eng);
    const CMat r = testkit::random_psd(nrf, eng) / (nt * nrf);
    const WmmseAux aux = wmmse_update(h, v0, digital_factor(r), 0.2);
    const std::vector<CMat> rs = {r};
    const std::vector<WmmseAux> auxs = {aux};
    const double power = (v0 * r * v0.adjoint()).trace().real() * 1.05;
    const double target = t % 2 ? 0.9 * aux.xi : 0.0;
    const AnalogSubproblem sub = make_analog_subproblem(a, rs, auxs, power, target, nt);
    const FppScaResult res = fpp_sca_stacked(a, rs, auxs, power, target, v0, {});
    const CVec x = vec_of(res.v_rf);
    CHECK_FALSE(res.solver_failed);
    CHECK(sub.feasible(x, 1e-6));
    CHECK(sub.sensing_value(x) >= sub.sensing_value(vec_of(v0)) * (1 - 1e-12));
    for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(std::abs(std::abs(x[i]) - 1.0) < 1e-12);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1]);
  }
}

TEST_CASE("FPP-SCA against an exhaustive phase search without a rate constraint") {
  std::mt19937_64 eng(5);
  const int nt = 3;
  const CMat a = testkit::random_psd(nt, eng);
  const CMat r = CMat::Constant(1, 1, 1.0 / nt);
  const std::vector<CMat> rs = {r};
  const std::vector<WmmseAux> auxs;
  const AnalogSubproblem sub = make_analog_subproblem(a, rs, auxs, 1.0, 0.0, nt);
  double best = 0.0;
  const int q = 64;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const CVec v = Eigen::Vector3cd(1.0, std::polar(1.0, 2 * kPi * i / q), std::polar(1.0, 2 * kPi * j / q));
      best = std::max(best, sub.sensing_value(v));
    }
  const CMat start = coordinate_update_isac(sub, phase_matrix(nt, 1, eng));
  const FppScaResult res = fpp_sca_stacked(a, rs, auxs, 1.0, 0.0, start, {});
  CHECK(sub.sensing_value(vec_of(res.v_rf)) >= 0.97 * best);
}

TEST_CASE("optimal digital covariance meets the rate target and the power budget") {
  std::mt19937_64 eng(31);
  for (int t = 0; t < 10; ++t) {
    const int nt = 4, nrf = 2;
    const CMat a = testkit::random_psd(nt, eng);
    const CMat h = testkit::random_matrix(2, nt, eng);
    const CMat v = phase_matrix(nt, nrf, eng);
    const CMat hv = h * v;
    const double cap = capacity(v.adjoint() * v, std::span<const CMat>(&hv, 1), 1.0, 0.1);
    const double target = 0.5 * cap;
    const CMat r = optimal_rbb_isac(a, v, h, 1.0, target, 0.1);
    const CMat x = v * r * v.adjoint();
    CHECK(x.trace().real() <= 1.0 + 1e-9);
    CHECK(log_det_rate(h, x, 0.1) >= target * (1 - 1e-9));
    // Rate target zero: the sensing-only maximizer over the same analog matrix.
    const CMat r0 = optimal_rbb_isac(a, v, h, 1.0, 0.0, 0.1);
    const EigPair e = top_generalized_eig(v.adjoint() * a * v, v.adjoint() * v);
    CHECK(rel_err((a * v * r0 * v.adjoint()).trace().real(), e.value) < 1e-9);
  }
}

TEST_CASE("random-phase initialization is reproducible and improves with more draws") {
  testkit::ScenarioShape sh;
  sh.rate_bits = 0.5;
  const Scenario s = testkit::make_scenario(sh);
  const HybridDesign a = init_random_phase(s, 5, 9);
  const HybridDesign b = init_random_phase(s, 5, 9);
  CHECK(*a.v_rf == *b.v_rf);
  CHECK(a.r_bb[0] == b.r_bb[0]);
  const PcrbModel m(s);
  const HybridDesign many = init_random_phase(s, 50, 9);
  CHECK(m.pcrb(many) <= m.pcrb(init_random_phase(s, 1, 9)) * (1 + 1e-12));
  CHECK(design_rate(s, many) >= s.rate_target * (1 - 1e-9));
}

TEST_CASE("ISAC AO: monotone traces and a met rate target") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    testkit::ScenarioShape sh;
    sh.seed = seed;
    sh.rate_bits = 0.5 + 0.5 * seed;
    const Scenario s = testkit::make_scenario(sh);
    const AoReport r = ao_p1(s);
    CHECK(r.feasible);
    CHECK(r.rate >= s.rate_target * (1 - 1e-9));
    CHECK(r.power <= s.power * (1 + 1e-9));
    CHECK(rel_err(r.pcrb, PcrbModel(s).pcrb(r.design)) < 1e-12);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] * (1 + 1e-10));
  }
}

TEST_CASE("ISAC AO with no rate target is close to the sensing AO") {
  testkit::ScenarioShape sh;
  const Scenario s = testkit::make_scenario(sh);
  const double p1 = ao_p1(s).pcrb;
  const double p0 = ao_p0(s).pcrb;
  CHECK(p1 <= p0 * 1.05);
  CHECK(p0 <= p1 * 1.05);
}

TEST_CASE("ISAC AO reports an unreachable rate target") {
  testkit::ScenarioShape sh;
  sh.rate_bits = 200.0;
  const Scenario s = testkit::make_scenario(sh);
  try {
    ao_p1(s);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.best_rate() < s.rate_target);
    CHECK(e.best_rate() > 0.0);
  }
}

TEST_CASE("wideband objective and per-sub-carrier covariances") {
  testkit::ScenarioShape sh;
  sh.taps = 2;
  sh.subcarriers = 4;
  sh.rate_bits = 0.5;
  Scenario s = testkit::make_scenario(sh);
  REQUIRE(s.channel.subcarriers() == 4);
  std::mt19937_64 eng(4);
  HybridDesign d;
  d.v_rf = phase_matrix(4, 2, eng);
  for (int k = 0; k < 4; ++k) d.r_bb.push_back(testkit::random_psd(2, eng) / 40.0);
  d.rx = default_receive(s.arrays);
  CHECK(rel_err(pcrb_ofdm_objective(s, d), PcrbModel(s).pcrb(d)) < 1e-14);

  // A single sub-carrier reduces to the narrowband digital step.
  const CMat a = PcrbModel(s).kernel().a1(combiner_matrix(d.rx, s.arrays));
  const std::vector<CMat> one = {s.channel.response[0]};
  const auto r1 = optimal_rbb_ofdm(a, *d.v_rf, one, 1.0, 1.0, s.noise_comm);
  const CMat r2 = optimal_rbb_isac(a, *d.v_rf, s.channel.response[0], 1.0, 1.0, s.noise_comm);
  CHECK((r1[0] - r2).norm() <= 1e-9 * r2.norm());

  const auto rs = optimal_rbb_ofdm(a, *d.v_rf, s.channel.response, 1.0, s.rate_target, s.noise_comm);
  double power = 0.0;
  std::vector<CMat> xs;
  for (const auto& r : rs) {
    xs.push_back(*d.v_rf * r * d.v_rf->adjoint());
    power += xs.back().trace().real();
  }
  CHECK(power <= 1.0 + 1e-9);
  CHECK(average_rate(s.channel.response, xs, s.noise_comm) >= s.rate_target * (1 - 1e-9));
}

TEST_CASE("wideband AO: flat channel equals the narrowband AO and traces are monotone") {
  testkit::ScenarioShape sh;
  sh.rate_bits = 1.5;
  const Scenario s = testkit::make_scenario(sh);
  const AoReport a = ao_p2(s), b = ao_p1(s);
  CHECK(a.pcrb == b.pcrb);

  sh.taps = 2;
  sh.subcarriers = 4;
  sh.rate_bits = 0.5;
  const Scenario w = testkit::make_scenario(sh);
  const AoReport r = ao_p2(w);
  CHECK(r.feasible);
  CHECK(r.design.r_bb.size() == 4);
  CHECK(r.rate >= w.rate_target * (1 - 1e-9));
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] * (1 + 1e-10));
}
