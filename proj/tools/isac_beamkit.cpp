// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include <iostream>

#include <CLI11.hpp>

#include "isac/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-array ISAC beamforming toolkit"};
  app.require_subcommand(1);

  isac::RunConfig cfg;
  std::string format = "csv";
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", cfg.scenario, "scenario JSON (default: built-in reference)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out, "output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", cfg.overrides, "override a scenario key: key=value (repeatable)");
    sub->add_option("--seed", seed, "channel / initialization seed");
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials");
    sub->add_option("--scheme", cfg.schemes, "scheme name (repeatable, or comma separated)")->delimiter(',');
    sub->add_flag("--no-fpp", cfg.fast, "skip the FPP-SCA refinement in the ISAC engine");
    sub->add_flag("--timing", cfg.timing, "record wall_ms (otherwise 0 for reproducible tables)");
    sub->add_flag("--sensing-only", cfg.sensing_only, "ignore the rate target");
  };

  struct Entry {
    isac::Command cmd;
    const char* help;
  };
  const Entry entries[] = {
      {isac::Command::Pcrb, "evaluate the PCRB and PFIM blocks of a design"},
      {isac::Command::OptimizeSensing, "sensing-only hybrid beamforming"},
      {isac::Command::OptimizeIsac, "rate-constrained hybrid beamforming (narrowband)"},
      {isac::Command::OptimizeOfdm, "rate-constrained hybrid beamforming (OFDM)"},
      {isac::Command::Sweep, "parameter sweep over schemes and trials"},
      {isac::Command::Pattern, "expected echo power versus angle"},
      {isac::Command::Benchmark, "all benchmark schemes on one scenario"},
  };
  std::vector<std::pair<CLI::App*, isac::Command>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(isac::command_name(e.cmd), e.help);
    common(sub);
    subs.emplace_back(sub, e.cmd);
    if (e.cmd == isac::Command::Pcrb || e.cmd == isac::Command::Pattern)
      sub->add_option("--design", cfg.design, "design JSON")->check(CLI::ExistingFile);
    if (e.cmd == isac::Command::OptimizeSensing || e.cmd == isac::Command::OptimizeIsac ||
        e.cmd == isac::Command::OptimizeOfdm)
      sub->add_option("--design-out", cfg.design_out, "write the optimized design JSON here");
    if (e.cmd == isac::Command::Sweep) {
      sub->add_option("--var", cfg.sweep_var, "power_dbm, rate_bps or n_rf_tx");
      sub->add_option("--values", cfg.values, "sweep values (comma separated)")->delimiter(',')->required();
      sub->add_option("--rf-total", cfg.rf_total, "n_rf_tx + n_rf_rx for an n_rf_tx sweep");
    }
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    cfg.command = cmd;
    if (sub->count("--seed")) cfg.seed = seed;
  }
  cfg.format = format == "json" ? isac::ExportFormat::Json : isac::ExportFormat::Csv;
  return isac::execute(cfg, std::cout, std::cerr);
}
