// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "isac/types.hpp"

namespace isac {

struct EigPair {
  double value = 0.0;
  CVec vector;
};

// Largest generalized eigenpair of (A, B) with x^H B x = 1. Ties inside the top
// eigenspace are broken by projecting the first coordinate axis that has a
// nonzero projection, and the phase is fixed so that the first significant
// entry is real positive.
EigPair top_generalized_eig(const CMat& a, const CMat& b);
EigPair top_eig(const CMat& a);

// x^T Q x + a^T x + b <= 0 with Q symmetric PSD.
struct QuadConstraint {
  Eigen::SparseMatrix<double> q;  // may be empty (0 x 0) for a linear constraint
  RVec a;
  double b = 0.0;
};

struct ConvexQcqp {
  int dim = 0;
  RVec objective;  // minimize objective^T x
  std::vector<QuadConstraint> constraints;
  std::vector<bool> nonnegative;  // optional, size dim when present
  std::optional<RVec> start;      // used directly when strictly feasible
};

struct SolverReport {
  RVec x;
  RVec multipliers;  // one per constraint, then one per nonnegative bound
  double objective = 0.0;
  double max_violation = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool success = false;
  std::string message;
};

// Primal-dual interior-point method on the log-barrier central path, with a
// phase-I search when no strictly feasible start is supplied.
SolverReport solve_convex_qcqp(const ConvexQcqp& problem, double tol = 1e-8, int max_iters = 200);

// log det(I + H X H^H / noise), nats.
double log_det_rate(const CMat& h, const CMat& x, double noise);
// (1/K) sum_k log det(I + H_k X_k H_k^H / noise).
double average_rate(std::span<const CMat> h, std::span<const CMat> x, double noise);

// Classic water-filling over scalar gains g_i: maximize sum log(1 + p_i g_i) / k_norm
// subject to sum p_i = power. Returns the powers.
RVec waterfill(const RVec& gains, double power);

struct DigitalSolution {
  std::vector<CMat> r;  // one per channel / sub-carrier
  double objective = 0.0;
  double rate = 0.0;
  double power = 0.0;
  double beta = 0.0;  // rate multiplier
  double mu = 0.0;    // power multiplier
  bool sensing_branch = false;
};

// Maximize sum_k tr(A R_k) s.t. sum_k tr(G R_k) <= P and
// (1/K) sum_k log det(I + H_k R_k H_k^H / noise) >= rate_target, R_k PSD.
// Throws InfeasibleError (carrying the capacity) when the rate target cannot be met.
DigitalSolution rate_constrained_trace_max(const CMat& a_eff, const CMat& gram,
                                           std::span<const CMat> h_eff, double power,
                                           double rate_target, double noise);

// Maximum of the average rate above (water-filling over all modes).
double capacity(const CMat& gram, std::span<const CMat> h_eff, double power, double noise);

}  // namespace isac
