// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "isac/model.hpp"

namespace isac {

// Partially-connected receiver: d holds the phases of W^H, block m of d feeds RF chain m.
struct PartialPhases {
  CVec d;
};
// Fully-connected receiver built from DFT columns (0-based indices).
struct DftSelection {
  std::vector<int> q;
};
struct DigitalReceive {};

using RxDescriptor = std::variant<PartialPhases, DftSelection, DigitalReceive>;

struct HybridDesign {
  std::optional<CMat> v_rf;  // nullopt: fully-digital transmitter (identity)
  std::vector<CMat> r_bb;    // one covariance per sub-carrier
  RxDescriptor rx = DigitalReceive{};

  CMat analog_tx(int n_tx) const;
  std::vector<CMat> transmit_covariances(int n_tx) const;
  double transmit_power(int n_tx) const;
};

using OfdmDesign = HybridDesign;

// Analog combiner W (n_rx x n_rf_rx); the receiver applies W^H.
CMat combiner_matrix(const RxDescriptor& rx, const ArrayConfig& arrays);
// Constant c with W^H W = c I.
double combiner_noise_gain(const RxDescriptor& rx, const ArrayConfig& arrays);

CVec dft_column(int n, int index);

// Default receive descriptor for an architecture: all-ones phases, first
// n_rf_rx DFT columns, or identity.
RxDescriptor default_receive(const ArrayConfig& arrays);

// Structural checks (sizes, unit modulus, PSD, distinct indices). Throws on failure.
void validate_design(const ArrayConfig& arrays, const HybridDesign& design, int subcarriers);

struct AoReport {
  std::vector<double> trace;  // objective value after each outer iteration (index 0 = start)
  HybridDesign design;
  bool converged = false;
  bool feasible = true;
  int iterations = 0;
  double pcrb = 0.0;
  double rate = 0.0;  // nats/s/Hz (average over sub-carriers)
  double power = 0.0;
  double wall_ms = 0.0;
  double best_rate = 0.0;  // for infeasible outcomes
};

}  // namespace isac
