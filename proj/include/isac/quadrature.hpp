// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <span>
#include <vector>

#include "isac/model.hpp"

namespace isac {

struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double lo = -kPi / 2;
  double hi = kPi / 2;
};

// Composite Gauss-Legendre grid with panels concentrated on +-8 sigma around
// every mixture component plus a uniform background split. The node count is
// close to (not exactly) total_points.
QuadratureGrid make_prior_grid(const GmmAnglePrior& prior, int total_points,
                               double lo = -kPi / 2, double hi = kPi / 2);

// Nodes with masses w_j * p(theta_j); a single node of mass 1 gives a point prior.
struct PriorMeasure {
  std::vector<double> theta;
  std::vector<double> mass;
};

PriorMeasure weight_by_prior(const QuadratureGrid& grid, const GmmAnglePrior& prior);
PriorMeasure point_measure(double theta);

// E[(d/dtheta ln p(theta))^2] over the grid.
double prior_fisher_theta(const GmmAnglePrior& prior, const QuadratureGrid& grid);

// Steering data cached on the nodes of a measure. All integrals over theta
// go through this class.
class SensingKernel {
 public:
  SensingKernel(int n_tx, int n_rx, PriorMeasure measure);

  int n_tx() const { return n_tx_; }
  int n_rx() const { return n_rx_; }
  const PriorMeasure& measure() const { return measure_; }

  // A1 = int Mdot^H W W^H Mdot p dtheta for combiner W (n_rx x n_rf).
  CMat a1(const CMat& combiner) const;
  // A2 = int M^H W W^H M p dtheta.
  CMat a2(const CMat& combiner) const;
  // Sum over k of int Mdot X_k Mdot^H p dtheta for transmit covariances X_k.
  CMat b(std::span<const CMat> tx_covariances) const;
  CMat b(const CMat& tx_covariance) const;

 private:
  int n_tx_, n_rx_;
  PriorMeasure measure_;
  CMat tx_pairs_;  // columns [a_j, adot_j]
  CMat rx_pairs_;  // columns [bdot_j, b_j]
};

std::pair<CMat, CMat> compute_A_matrices(const ArrayConfig& arrays, const GmmAnglePrior& prior,
                                         const CMat& combiner, const QuadratureGrid& grid);

CMat compute_B_matrix(const ArrayConfig& arrays, const GmmAnglePrior& prior, const CMat& v_rf,
                      std::span<const CMat> r_bb, const QuadratureGrid& grid);

}  // namespace isac
