// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isac {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cd kJ{0.0, 1.0};

// Thrown when a rate target cannot be met. Carries the best rate found
// (nats/s/Hz) so callers can report the gap.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double best_rate)
      : std::runtime_error(what), best_rate_(best_rate) {}
  double best_rate() const { return best_rate_; }

 private:
  double best_rate_;
};

// Internal numerical failure (iteration limit, non-finite values).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace isac
