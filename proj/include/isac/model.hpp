// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "isac/types.hpp"

namespace isac {

enum class RxArchitecture { PartiallyConnected, FullyConnected, FullyDigital };

struct ArrayConfig {
  int n_tx = 1;
  int n_rx = 1;
  int n_user = 1;
  int n_rf_tx = 1;
  int n_rf_rx = 1;
  RxArchitecture rx_architecture = RxArchitecture::PartiallyConnected;

  void validate() const;
  // Antennas per receive RF chain (partially-connected layout).
  int rx_block_size() const { return n_rx / n_rf_rx; }
};

struct GaussianComponent {
  double weight;
  double mean;
  double variance;
};

// Gaussian mixture density of the target angle (radians).
class GmmAnglePrior {
 public:
  GmmAnglePrior() = default;
  explicit GmmAnglePrior(std::vector<GaussianComponent> components);

  void validate() const;
  double density(double theta) const;
  double log_density(double theta) const;
  // d/dtheta of log density, evaluated stably far in the tails.
  double score(double theta) const;
  // Most probable angle inside [lo, hi].
  double mode(double lo = -kPi / 2, double hi = kPi / 2) const;
  double sample(std::mt19937_64& eng) const;
  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  std::vector<GaussianComponent> components_;
};

struct ReflectionPrior {
  double gamma = 0.0;
};

struct CommChannel {
  enum class Kind { Narrowband, Wideband };
  Kind kind = Kind::Narrowband;
  std::vector<CMat> taps;      // narrowband: {H}
  std::vector<CMat> response;  // per sub-carrier H_k; narrowband: {H}

  static CommChannel narrowband(CMat h);
  static CommChannel wideband(std::vector<CMat> taps, int subcarriers);
  int subcarriers() const { return static_cast<int>(response.size()); }
};

// Parameters needed to regenerate the channel for a new seed.
struct ChannelSpec {
  enum class Model { Rician, Wideband };
  Model model = Model::Rician;
  double user_angle = 0.36;
  double user_distance = 400.0;
  double rician_factor = 0.1584893192461113;  // linear, -8 dB
  double beta0 = 1e-3;                        // linear, -30 dB
  double path_loss_exponent = 3.5;
  int taps = 8;
};

struct Scenario {
  ArrayConfig arrays;
  GmmAnglePrior angle_prior;
  ReflectionPrior reflection;
  ChannelSpec channel_spec;
  CommChannel channel;
  double power = 1.0;
  double noise_comm = 1e-12;
  double noise_sense = 1e-12;
  int symbols = 30;
  double rate_target = 0.0;  // nats/s/Hz
  int subcarriers = 1;
  int quadrature_points = 2048;
  std::uint64_t seed = 1;

  void validate() const;
};

// Seedable generator with deterministic named/indexed sub-streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng split(std::string_view name) const;
  Rng split(std::uint64_t index) const;
  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return eng_; }
  // Circular complex Gaussian with E|z|^2 = variance.
  cd complex_normal(double variance = 1.0);
  double uniform_phase();

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

CVec steering_vector(int n, double theta);
CVec steering_derivative(int n, double theta);

CMat gen_rician_channel(const ArrayConfig& arrays, double user_angle, double user_distance,
                        double rician_factor, double beta0, double path_loss_exponent,
                        std::uint64_t seed);

std::vector<CMat> wideband_taps(const ArrayConfig& arrays, int n_taps, double gain,
                                std::uint64_t seed);
std::vector<CMat> taps_to_subcarriers(const std::vector<CMat>& taps, int subcarriers);
std::vector<CMat> gen_wideband_channel(const ArrayConfig& arrays, int n_taps, int subcarriers,
                                       double gain, std::uint64_t seed);

// Draw the channel described by scenario.channel_spec for the given seed.
CommChannel realize_channel(const Scenario& scenario, std::uint64_t seed);

// Prior used in the reference experiments: four components, weights 0.31/0.24/0.28/0.17.
GmmAnglePrior reference_angle_prior();

}  // namespace isac
