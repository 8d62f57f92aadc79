// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "isac/bench.hpp"

namespace isac {

// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The reference experiment: 8 transmit / 12 receive antennas, 6 user antennas,
// 3 + 6 RF chains, 30 dBm, -90 dBm noise, 4.5 bps/Hz, four-component prior.
Scenario reference_scenario(std::uint64_t seed = 1);

// Parse a scenario document. Power and noise are given in dBm, gains in dB and
// the rate target in bps/Hz; the returned Scenario is in watts and nats.
// `overrides` are key=value strings; a key is either a dotted path
// (arrays.n_rf_tx) or a leaf name that occurs exactly once (n_rf_tx).
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
Scenario parse_scenario(const std::string& json_text, const std::vector<std::string>& overrides = {});
std::string scenario_to_json(const Scenario& scenario);

std::string design_to_json(const HybridDesign& design);
HybridDesign design_from_json(const std::string& json_text);
HybridDesign load_design(const std::filesystem::path& path);

// Shortest round-trip decimal form (17 significant digits); "nan"/"inf" for non-finite values.
std::string format_double(double v);

enum class ExportFormat { Csv, Json };
ExportFormat parse_export_format(const std::string& text);

// Columns: sweep_var, value, scheme, trial, pcrb_theta, rate_nats, rate_bits,
// iterations, feasible, wall_ms.
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::string rows_to_json(const std::vector<SweepRow>& rows);
void export_rows(const std::vector<SweepRow>& rows, const std::filesystem::path& path, ExportFormat format);
std::vector<SweepRow> rows_from_csv(const std::string& csv_text);

std::string pattern_to_csv(const std::vector<PatternPoint>& curve);

}  // namespace isac
