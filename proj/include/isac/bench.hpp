// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isac/ofdm_opt.hpp"

namespace isac {

struct SchemeId {
  enum class Kind {
    FullyDigitalOptimal,
    FDReceive,
    FDTransmit,
    RandomPhase,
    DirectionAlignment,
    PartialPriorCrb,
    ProposedAO
  };
  Kind kind = Kind::ProposedAO;
  int n_rand = 10;  // RandomPhase only

  std::string name() const;
  // Accepts the names produced by name() and short CLI aliases
  // (fully-digital, fd-receive, fd-transmit, random-phase[:n], direction-alignment,
  // partial-prior, proposed).
  static SchemeId parse(const std::string& text);
  bool operator==(const SchemeId&) const = default;
};

struct SchemeOptions {
  SensingAoOptions sensing;
  IsacAoOptions isac;
};

// A scenario with rate_target <= 0 is treated as sensing-only.
AoReport run_scheme(const SchemeId& scheme, const Scenario& scenario,
                    const SchemeOptions& options = {});

// Analog transmit columns for the direction-alignment benchmark: the user
// direction, then mixture means by descending weight, padded with the user
// direction.
CMat direction_alignment_analog(const Scenario& scenario);

enum class SweepVariable { PowerDbm, RateBits, RfAllocation };
std::string sweep_variable_name(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& text);

struct SweepSpec {
  Scenario base;
  SweepVariable variable = SweepVariable::RateBits;
  std::vector<double> values;  // dBm, bps/Hz, or transmit RF chain count
  std::vector<SchemeId> schemes;
  int trials = 1;
  std::uint64_t seed = 1;
  int rf_total = 8;             // RfAllocation: n_rf_tx + n_rf_rx
  bool rf_sensing_only = false; // RfAllocation: ignore the rate target
  bool record_timing = false;   // wall_ms stays 0 unless set, keeping tables reproducible
  SchemeOptions options;

  void validate() const;
};

struct SweepRow {
  std::string sweep_var;
  double value = 0.0;
  std::string scheme;
  int trial = 0;
  double pcrb_theta = 0.0;  // NaN for infeasible rows
  double rate_nats = 0.0;   // best achieved rate for infeasible rows
  int iterations = 0;
  bool feasible = true;
  double wall_ms = 0.0;
};

// Scenario of one sweep cell: value applied, channel drawn for the trial.
Scenario sweep_scenario(const SweepSpec& spec, double value, int trial);
std::uint64_t trial_seed(std::uint64_t seed, int trial);

// One row per (value, scheme, trial) in that nesting order.
std::vector<SweepRow> sweep(const SweepSpec& spec);

struct AggregateRow {
  std::string sweep_var;
  double value = 0.0;
  std::string scheme;
  int trials = 0;
  int feasible = 0;
  double pcrb_mean = 0.0;
  double pcrb_stderr = 0.0;
  double rate_mean = 0.0;
  double rate_stderr = 0.0;
};

// Means and standard errors over feasible trials.
std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows);
std::vector<AggregateRow> mc_average(SweepSpec spec, int n_trials);

struct PatternPoint {
  double theta = 0.0;
  double power = 0.0;
};

std::vector<double> uniform_angle_grid(int points = 721);

// Expected received echo power versus target angle, summed over sub-carriers.
std::vector<PatternPoint> power_pattern(const Scenario& scenario, const HybridDesign& design,
                                        const std::vector<double>& grid);

// Share of the trapezoid-integrated pattern inside the union of
// [mean - width * sigma, mean + width * sigma] over mixture components.
double pattern_mass_near_means(const std::vector<PatternPoint>& curve, const GmmAnglePrior& prior,
                               double width = 3.0);

}  // namespace isac
