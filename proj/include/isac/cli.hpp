// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isac/config.hpp"

namespace isac {

enum class Command { Pcrb, OptimizeSensing, OptimizeIsac, OptimizeOfdm, Sweep, Pattern, Benchmark };

Command parse_command(const std::string& text);
std::string command_name(Command c);

struct RunConfig {
  Command command = Command::Pcrb;
  std::string scenario;  // empty: built-in reference scenario
  std::string out;       // empty: standard output
  ExportFormat format = ExportFormat::Csv;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int trials = 1;

  std::string design;      // pcrb / pattern input
  std::string design_out;  // optimize-* : also write the design here
  std::string sweep_var = "rate_bps";
  std::vector<double> values;
  std::vector<std::string> schemes;
  int rf_total = 8;
  bool sensing_only = false;
  bool timing = false;
  bool fast = false;  // skip the FPP-SCA refinement in the ISAC engine
};

enum ExitCode : int { kExitOk = 0, kExitInfeasible = 1, kExitSolverFailure = 2 };

// Runs one command. Artifacts go to cfg.out (or `out`), diagnostics as JSON to `err`.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace isac
