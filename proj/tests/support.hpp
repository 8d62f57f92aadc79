// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "isac/config.hpp"

namespace testkit {

using namespace isac;

inline CMat random_matrix(int rows, int cols, std::mt19937_64& eng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cd(n(eng), n(eng));
  return m;
}

inline CMat random_psd(int n, std::mt19937_64& eng, int rank = -1) {
  const CMat g = random_matrix(n, rank < 0 ? n : rank, eng);
  return g * g.adjoint();
}

inline CVec random_phases(int n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::polar(1.0, u(eng));
  return v;
}

// Random mixture with 1-4 components inside (-1.2, 1.2).
inline GmmAnglePrior random_prior(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> mean(-1.2, 1.2), logvar(-3.0, -1.5), w(0.2, 1.0);
  const int n = count(eng);
  std::vector<GaussianComponent> c(n);
  double total = 0.0;
  for (auto& g : c) {
    g = {w(eng), mean(eng), std::pow(10.0, logvar(eng))};
    total += g.weight;
  }
  for (auto& g : c) g.weight /= total;
  double s = 0.0;
  for (int i = 0; i + 1 < n; ++i) s += c[i].weight;
  c.back().weight = 1.0 - s;
  return GmmAnglePrior(c);
}

struct ScenarioShape {
  int n_tx = 4, n_rx = 4, n_user = 2, n_rf_tx = 2, n_rf_rx = 2;
  RxArchitecture rx = RxArchitecture::PartiallyConnected;
  double rate_bits = 0.0;
  int subcarriers = 1;
  int taps = 1;
  std::uint64_t seed = 1;
  int quadrature_points = 1024;
};

inline Scenario make_scenario(const ScenarioShape& sh) {
  Scenario s;
  s.arrays = {sh.n_tx, sh.n_rx, sh.n_user, sh.n_rf_tx, sh.n_rf_rx, sh.rx};
  s.angle_prior = reference_angle_prior();
  s.reflection.gamma = 2e-12;
  s.power = 1.0;
  s.noise_comm = 1e-12;
  s.noise_sense = 1e-12;
  s.symbols = 30;
  s.rate_target = sh.rate_bits * std::log(2.0);
  s.subcarriers = sh.subcarriers;
  s.quadrature_points = sh.quadrature_points;
  s.seed = sh.seed;
  if (sh.taps > 1) {
    s.channel_spec.model = ChannelSpec::Model::Wideband;
    s.channel_spec.taps = sh.taps;
  }
  s.channel = realize_channel(s, sh.seed);
  s.validate();
  return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testkit
