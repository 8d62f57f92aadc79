// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "isac/cvxkit.hpp"
#include "isac/sensing_opt.hpp"

namespace isac {

struct WmmseAux {
  CMat q;     // decoder, n_user x n_streams
  CMat u;     // weight, n_streams x n_streams
  CMat v_bb;  // digital precoder the aux was built from
  double xi = 0.0;   // surrogate rate at the build point (nats)
  double eta = 0.0;  // constant part of the surrogate
  CMat b1;           // H^H Q U Q^H H
  CMat b2;           // V_BB U Q^H H
};

// Thin factor F with F F^H = R, keeping eigenvalues above rel_tol * tr(R).
CMat digital_factor(const CMat& r, double rel_tol = 1e-9);

WmmseAux wmmse_update(const CMat& h, const CMat& v_rf, const CMat& v_bb, double noise);
// Surrogate rate of an arbitrary analog matrix under fixed (Q, U, V_BB).
double wmmse_surrogate(const WmmseAux& aux, const CMat& v_rf);

struct FppScaOptions {
  double epsilon = 1.0;  // on the sensing form normalized to 1 at the start
  int max_iters = 30;
  double slack_tol = 1e-7;
  double objective_tol = 1e-8;
  double qcqp_tol = 1e-7;
};

struct FppScaResult {
  CMat v_rf;                           // best projected feasible iterate (v_init if none)
  bool slacks_vanished = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // best sensing objective so far, per iteration
  std::vector<double> slack_trace;      // r + |p|_1 + |w|_1 per iteration
  bool solver_failed = false;
};

// Analog-matrix subproblem in vectorized form v = vec(V_RF): maximize v^H S v subject to
// v^H G v <= power, eta - v^H Q v + 2 Re(c^T v) >= rate_target (skipped when
// rate_target <= 0) and |v_m| = 1. S, G and Q stack the sub-carrier Kronecker terms.
struct AnalogSubproblem {
  CMat sensing;   // sum_k R_k^T (x) A
  CMat gram;      // sum_k R_k^T (x) I
  CMat rate_quad; // (1/K) sum_k R_k^T (x) B1_k
  CVec rate_lin;  // (1/K) sum_k vec(B2_k^T)
  double eta = 0.0;
  double power = 0.0;
  double rate_target = 0.0;
  Eigen::Index n_tx = 0, n_rf = 0;

  double sensing_value(const CVec& v) const;
  double power_value(const CVec& v) const;
  double rate_value(const CVec& v) const;
  bool feasible(const CVec& v, double tol = 1e-9) const;
};

AnalogSubproblem make_analog_subproblem(const CMat& a_tilde, std::span<const CMat> r_bb,
                                        std::span<const WmmseAux> aux, double power,
                                        double rate_target, Eigen::Index n_tx);

// Cyclic exact phase updates: each entry maximizes the sensing term over the arc
// of phases that keeps the power and rate constraints. Never decreases the
// objective and keeps a feasible start feasible.
CMat coordinate_update_isac(const AnalogSubproblem& sub, const CMat& v_rf, int max_passes = 50,
                            double rel_tol = 1e-10);

// Stacked form: one covariance, aux and channel per sub-carrier.
FppScaResult fpp_sca_stacked(const CMat& a_tilde, std::span<const CMat> r_bb,
                             std::span<const WmmseAux> aux, double power, double rate_target,
                             const CMat& v_init, const FppScaOptions& options);

FppScaResult fpp_sca_vrf(const Scenario& scenario, const CMat& a_tilde, const CMat& r_bb,
                         const WmmseAux& aux, const CMat& v_init,
                         const FppScaOptions& options = {});

CMat optimal_rbb_isac(const CMat& a_tilde, const CMat& v_rf, const CMat& h, double power,
                      double rate_target, double noise);

struct IsacAoOptions {
  int max_iters = 100;
  double rel_tol = 1e-6;
  int n_rand = 10;
  std::uint64_t seed = 0;
  int wmmse_rounds = 1;
  FppScaOptions fpp;
  bool run_fpp = true;          // FPP-SCA after the exact phase pass
  double fpp_min_gain = 1e-2;   // FPP-SCA is dropped after an outer step gaining less than this
  int phase_passes = 50;
  bool rank1_shortcut = true;  // try the two-column exact factorization first
  TransmitMode transmit = TransmitMode::Hybrid;
  std::optional<CMat> fixed_v_rf;
  std::optional<double> point_angle;
  bool optimize_receive = true;
  std::optional<HybridDesign> initial;
};

// Best of n_rand random-phase realizations with the optimal digital part.
HybridDesign init_random_phase(const Scenario& scenario, int n_rand, std::uint64_t seed,
                               const IsacAoOptions& options = {});

// AO over sub-carriers 1..K of scenario.channel (shared by the narrowband and OFDM drivers).
AoReport ao_isac(const Scenario& scenario, const IsacAoOptions& options);

AoReport ao_p1(const Scenario& scenario, const IsacAoOptions& options = {});

// Average rate of a design over the scenario's sub-carriers.
double design_rate(const Scenario& scenario, const HybridDesign& design);

}  // namespace isac
