// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <span>

#include "isac/isac_opt.hpp"

namespace isac {

// PCRB of a wideband design: the observation term sums tr(A1 X_k) over sub-carriers.
double pcrb_ofdm_objective(const Scenario& scenario, const OfdmDesign& design);

// Per-sub-carrier digital covariances under a shared power budget and an
// average-rate target.
std::vector<CMat> optimal_rbb_ofdm(const CMat& a_tilde, const CMat& v_rf, std::span<const CMat> h,
                                   double power, double rate_target, double noise);

FppScaResult fpp_sca_vrf_ofdm(const Scenario& scenario, const CMat& a_tilde,
                              std::span<const CMat> r_bb, std::span<const WmmseAux> aux,
                              const CMat& v_init, const FppScaOptions& options = {});

// Wideband AO; a single sub-carrier is handed to ao_p1.
AoReport ao_p2(const Scenario& scenario, const IsacAoOptions& options = {});

}  // namespace isac
