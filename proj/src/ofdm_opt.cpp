// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/ofdm_opt.hpp"

namespace isac {

double pcrb_ofdm_objective(const Scenario& s, const OfdmDesign& d) {
  validate_design(s.arrays, d, static_cast<int>(d.r_bb.size()));
  if (d.r_bb.empty()) throw std::invalid_argument("an OFDM design needs at least one sub-carrier");
  return PcrbModel(s).pcrb(d);
}

std::vector<CMat> optimal_rbb_ofdm(const CMat& a_tilde, const CMat& v_rf, std::span<const CMat> h,
                                   double power, double rate_target, double noise) {
  std::vector<CMat> hv;
  hv.reserve(h.size());
  for (const auto& hk : h) hv.push_back(hk * v_rf);
  return rate_constrained_trace_max(v_rf.adjoint() * a_tilde * v_rf, v_rf.adjoint() * v_rf, hv,
                                    power, rate_target, noise)
      .r;
}

FppScaResult fpp_sca_vrf_ofdm(const Scenario& s, const CMat& a_tilde, std::span<const CMat> r_bb,
                              std::span<const WmmseAux> aux, const CMat& v_init,
                              const FppScaOptions& o) {
  return fpp_sca_stacked(a_tilde, r_bb, aux, s.power, s.rate_target, v_init, o);
}

AoReport ao_p2(const Scenario& s, const IsacAoOptions& o) {
  if (s.channel.subcarriers() < 2) return ao_p1(s, o);
  return ao_isac(s, o);
}

}  // namespace isac
