// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cstdint>
#include <optional>

#include "isac/pcrb.hpp"

namespace isac {

// R = P q q^H on the top eigenvector of A.
CMat solve_p0_fully_digital(const CMat& a, double power);

struct HybridFactor {
  CMat v_rf;  // n_tx x n_rf_tx, unit modulus
  CVec v_bb;  // n_rf_tx, zero weight on padding columns
};

// Two phase-shifter columns that reproduce any f exactly: V_RF v_bb = f.
HybridFactor hybrid_from_rank1(const CVec& f, int n_rf_tx);

// One ascending cyclic pass of closed-form phase alignment on x^H M x.
CVec coordinate_update_receive(const CVec& d, const CMat& pi);
CVec coordinate_update_transmit(const CVec& v, const CMat& a_tilde);

// Block-diagonal matrix with the transposed diagonal blocks of B, so that
// d^H Pi d = tr(B W W^H) for the partially-connected combiner.
CMat receive_phase_matrix(const CMat& b_tilde, const ArrayConfig& arrays);

// Indices (0-based, descending score) of the n_rf_rx largest diag(F^H B F);
// ties go to the lowest index.
std::vector<int> dft_select_fc(const CMat& b_tilde, int n_rf_rx);

// Receive-side block update for the architecture of `rx`. Returns the new
// descriptor (unchanged for a fully-digital receiver).
RxDescriptor update_receive(const ArrayConfig& arrays, const RxDescriptor& rx, const CMat& b_tilde);

enum class TransmitMode { Hybrid, FullyDigital, FixedAnalog };

struct SensingAoOptions {
  int max_iters = 200;
  double rel_tol = 1e-8;
  TransmitMode transmit = TransmitMode::Hybrid;
  std::optional<CMat> fixed_v_rf;       // for FixedAnalog
  std::optional<double> point_angle;    // optimize the CRB at one angle instead of the prior
  bool optimize_receive = true;
  int restarts = 0;                     // extra random-phase starts
  std::uint64_t seed = 0;
  std::optional<HybridDesign> initial;  // warm start (phases and receive descriptor)
};

AoReport ao_p0(const Scenario& scenario, const SensingAoOptions& options = {});

}  // namespace isac
