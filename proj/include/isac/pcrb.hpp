// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cstdint>
#include <memory>

#include "isac/design.hpp"
#include "isac/quadrature.hpp"

namespace isac {

struct Pfim {
  double j_theta_theta = 0.0;
  Eigen::RowVector2d j_theta_alpha = Eigen::RowVector2d::Zero();
  Eigen::Matrix2d j_alpha_alpha = Eigen::Matrix2d::Zero();
  double f_p_theta = 0.0;
  Eigen::Matrix2d f_p_alpha = Eigen::Matrix2d::Zero();

  // Full 3x3 matrix ordered (theta, alpha_R, alpha_I).
  Eigen::Matrix3d assembled() const;
};

// Observation-only Fisher blocks from sampling, with per-entry standard errors.
struct PfimEstimate {
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d stderr = Eigen::Matrix3d::Zero();
};

// Scenario constants plus cached steering data. The optimization measure can
// differ from the prior (point mass for the most-probable-angle benchmark);
// f_p_theta always comes from the prior.
class PcrbModel {
 public:
  explicit PcrbModel(const Scenario& scenario);
  PcrbModel(const Scenario& scenario, PriorMeasure measure);

  const ArrayConfig& arrays() const { return arrays_; }
  const SensingKernel& kernel() const { return *kernel_; }
  double fisher_prior() const { return f_p_; }
  // 2 L gamma / (c sigma_S^2) for the given receiver.
  double gain(const RxDescriptor& rx) const;
  // sum_k tr(A1 X_k)
  double sensing_trace(const HybridDesign& design) const;
  double j_theta(const HybridDesign& design) const;
  double pcrb(const HybridDesign& design) const;
  Pfim pfim(const HybridDesign& design) const;

 private:
  ArrayConfig arrays_;
  double symbols_, gamma_, noise_;
  double f_p_;
  std::shared_ptr<const SensingKernel> kernel_;
};

Pfim assemble_pfim(const Scenario& scenario, const HybridDesign& design);
double pcrb_theta(const Pfim& pfim);
double pcrb_theta_full_inverse(const Pfim& pfim);
// Requires a DFT-selection receiver (W^H W = N_R I).
double pcrb_fully_connected(const Scenario& scenario, const HybridDesign& design);

PfimEstimate fim_oracle(const Scenario& scenario, const HybridDesign& design, int mc_samples,
                        double fd_step, std::uint64_t seed);

}  // namespace isac
