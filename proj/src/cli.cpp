// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "isac/pcrb.hpp"

namespace isac {

using nlohmann::json;

namespace {

struct Failure {
  int code;
  json diag;
};

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); }

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(number(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

Scenario load(const RunConfig& cfg) {
  Scenario s;
  if (cfg.scenario.empty()) {
    s = cfg.overrides.empty() ? reference_scenario() : parse_scenario(scenario_to_json(reference_scenario()), cfg.overrides);
  } else {
    s = load_scenario(cfg.scenario, cfg.overrides);
  }
  if (cfg.seed) {
    s.seed = *cfg.seed;
    s.channel = realize_channel(s, s.seed);
  }
  return s;
}

SchemeOptions scheme_options(const RunConfig& cfg) {
  SchemeOptions o;
  o.isac.run_fpp = !cfg.fast;
  return o;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + cfg.out + "'");
  f << text;
  if (!f) throw ConfigError("failed writing '" + cfg.out + "'");
}

double fully_digital_capacity(const Scenario& s) {
  const CMat eye = CMat::Identity(s.arrays.n_tx, s.arrays.n_tx);
  return capacity(eye, s.channel.response, s.power, s.noise_comm);
}

json infeasible_diag(const Scenario& s, const std::string& message, double best_rate) {
  const double cap = fully_digital_capacity(s);
  return {{"status", "infeasible"},
          {"message", message},
          {"rate_target_nats", number(s.rate_target)},
          {"rate_target_bits", number(s.rate_target / std::log(2.0))},
          {"max_achievable_rate_nats", number(cap)},
          {"max_achievable_rate_bits", number(cap / std::log(2.0))},
          {"best_found_rate_nats", number(best_rate)}};
}

std::string report_json(const std::string& command, const std::string& scheme, const AoReport& r) {
  json trace = json::array();
  for (double v : r.trace) trace.push_back(number(v));
  json doc = {{"command", command},
              {"scheme", scheme},
              {"pcrb_theta", number(r.pcrb)},
              {"rate_nats", number(r.rate)},
              {"rate_bits", number(r.rate / std::log(2.0))},
              {"power", number(r.power)},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"feasible", r.feasible},
              {"trace", trace},
              {"design", json::parse(design_to_json(r.design))}};
  return doc.dump(2) + "\n";
}

int run_optimize(const RunConfig& cfg, std::ostream& out) {
  Scenario s = load(cfg);
  const SchemeOptions o = scheme_options(cfg);
  SchemeId scheme{SchemeId::Kind::ProposedAO};
  if (!cfg.schemes.empty()) scheme = SchemeId::parse(cfg.schemes.front());
  if (cfg.command == Command::OptimizeSensing) {
    s.rate_target = 0.0;
  } else if (cfg.command == Command::OptimizeIsac && s.channel.subcarriers() != 1) {
    throw ConfigError("optimize-isac needs a narrowband scenario (channel.subcarriers = 1); use optimize-ofdm");
  } else if (!(s.rate_target > 0.0)) {
    throw ConfigError("rate_target_bps must be positive for " + command_name(cfg.command));
  }
  AoReport rep;
  try {
    rep = run_scheme(scheme, s, o);
  } catch (const InfeasibleError& e) {
    throw Failure{kExitInfeasible, infeasible_diag(s, e.what(), e.best_rate())};
  }
  if (!rep.feasible)
    throw Failure{kExitInfeasible, infeasible_diag(s, "optimized design violates the rate or power constraint", rep.rate)};
  if (!cfg.design_out.empty()) {
    std::ofstream f(cfg.design_out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + cfg.design_out + "'");
    f << design_to_json(rep.design);
  }
  if (cfg.format == ExportFormat::Json) {
    emit(cfg, out, report_json(command_name(cfg.command), scheme.name(), rep));
  } else {
    SweepRow row;
    row.sweep_var = "none";
    row.value = 0.0;
    row.scheme = scheme.name();
    row.pcrb_theta = rep.pcrb;
    row.rate_nats = rep.rate;
    row.iterations = rep.iterations;
    row.feasible = rep.feasible;
    if (cfg.timing) row.wall_ms = rep.wall_ms;
    emit(cfg, out, rows_to_csv({row}));
  }
  return kExitOk;
}

HybridDesign input_design(const RunConfig& cfg, const Scenario& s) {
  if (!cfg.design.empty()) {
    HybridDesign d = load_design(cfg.design);
    try {
      validate_design(s.arrays, d, s.channel.subcarriers());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("design does not fit the scenario: ") + e.what());
    }
    return d;
  }
  return {};
}

int run_pcrb(const RunConfig& cfg, std::ostream& out) {
  const Scenario s = load(cfg);
  HybridDesign d;
  if (!cfg.design.empty()) {
    d = input_design(cfg, s);
  } else {
    // No design given: the best of ten random-phase realizations without the rate constraint.
    Scenario free = s;
    free.rate_target = 0.0;
    d = init_random_phase(free, 10, s.seed);
  }
  const PcrbModel model(s);
  const Pfim f = model.pfim(d);
  const double rate = design_rate(s, d);
  json doc = {{"pcrb_theta", number(pcrb_theta(f))},
              {"pfim",
               {{"j_theta_theta", number(f.j_theta_theta)},
                {"j_theta_alpha", matrix_json(f.j_theta_alpha)},
                {"j_alpha_alpha", matrix_json(f.j_alpha_alpha)},
                {"f_p_theta", number(f.f_p_theta)},
                {"f_p_alpha", matrix_json(f.f_p_alpha)}}},
              {"rate_nats", number(rate)},
              {"rate_bits", number(rate / std::log(2.0))},
              {"power", number(d.transmit_power(s.arrays.n_tx))}};
  emit(cfg, out, doc.dump(2) + "\n");
  return kExitOk;
}

std::vector<SchemeId> parse_schemes(const std::vector<std::string>& names) {
  std::vector<SchemeId> out;
  for (const auto& n : names) out.push_back(SchemeId::parse(n));
  return out;
}

int run_sweep(const RunConfig& cfg, std::ostream& out, bool benchmark) {
  const Scenario s = load(cfg);
  SweepSpec spec;
  spec.base = s;
  spec.trials = cfg.trials;
  spec.seed = cfg.seed.value_or(s.seed);
  spec.rf_total = cfg.rf_total;
  spec.rf_sensing_only = cfg.sensing_only;
  spec.record_timing = cfg.timing;
  spec.options = scheme_options(cfg);
  if (benchmark) {
    spec.variable = SweepVariable::RateBits;
    spec.values = {s.rate_target / std::log(2.0)};
    if (cfg.sensing_only) spec.values = {0.0};
    spec.schemes = cfg.schemes.empty()
                       ? std::vector<SchemeId>{{SchemeId::Kind::FullyDigitalOptimal}, {SchemeId::Kind::FDReceive},
                                               {SchemeId::Kind::FDTransmit},          {SchemeId::Kind::RandomPhase},
                                               {SchemeId::Kind::DirectionAlignment},  {SchemeId::Kind::PartialPriorCrb},
                                               {SchemeId::Kind::ProposedAO}}
                       : parse_schemes(cfg.schemes);
  } else {
    spec.variable = parse_sweep_variable(cfg.sweep_var);
    spec.values = cfg.values;
    spec.schemes = cfg.schemes.empty() ? std::vector<SchemeId>{{SchemeId::Kind::ProposedAO}}
                                       : parse_schemes(cfg.schemes);
    if (spec.variable == SweepVariable::RateBits && cfg.sensing_only)
      throw ConfigError("--sensing-only conflicts with a rate sweep");
    if (spec.variable == SweepVariable::PowerDbm && cfg.sensing_only) spec.base.rate_target = 0.0;
  }
  const auto rows = sweep(spec);
  emit(cfg, out, cfg.format == ExportFormat::Csv ? rows_to_csv(rows) : rows_to_json(rows));
  return kExitOk;
}

int run_pattern(const RunConfig& cfg, std::ostream& out) {
  const Scenario s = load(cfg);
  HybridDesign d;
  if (!cfg.design.empty()) {
    d = input_design(cfg, s);
  } else {
    SchemeId scheme{SchemeId::Kind::ProposedAO};
    if (!cfg.schemes.empty()) scheme = SchemeId::parse(cfg.schemes.front());
    Scenario run = s;
    if (cfg.sensing_only) run.rate_target = 0.0;
    try {
      d = run_scheme(scheme, run, scheme_options(cfg)).design;
    } catch (const InfeasibleError& e) {
      throw Failure{kExitInfeasible, infeasible_diag(run, e.what(), e.best_rate())};
    }
  }
  const auto curve = power_pattern(s, d, uniform_angle_grid());
  if (cfg.format == ExportFormat::Csv) {
    emit(cfg, out, pattern_to_csv(curve));
  } else {
    std::string text = "{\n  \"mass_within_3_sigma\": " + num(pattern_mass_near_means(curve, s.angle_prior)) +
                       ",\n  \"points\": [\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      text += "    {\"theta\": " + num(curve[i].theta) + ", \"power\": " + num(curve[i].power) + "}";
      text += i + 1 < curve.size() ? ",\n" : "\n";
    }
    text += "  ]\n}\n";
    emit(cfg, out, text);
  }
  return kExitOk;
}

}  // namespace

Command parse_command(const std::string& text) {
  if (text == "pcrb") return Command::Pcrb;
  if (text == "optimize-sensing") return Command::OptimizeSensing;
  if (text == "optimize-isac") return Command::OptimizeIsac;
  if (text == "optimize-ofdm") return Command::OptimizeOfdm;
  if (text == "sweep") return Command::Sweep;
  if (text == "pattern") return Command::Pattern;
  if (text == "benchmark") return Command::Benchmark;
  throw ConfigError("unknown command '" + text + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Pcrb: return "pcrb";
    case Command::OptimizeSensing: return "optimize-sensing";
    case Command::OptimizeIsac: return "optimize-isac";
    case Command::OptimizeOfdm: return "optimize-ofdm";
    case Command::Sweep: return "sweep";
    case Command::Pattern: return "pattern";
    case Command::Benchmark: return "benchmark";
  }
  return "";
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.trials < 1) throw ConfigError("--trials must be positive");
    switch (cfg.command) {
      case Command::Pcrb: return run_pcrb(cfg, out);
      case Command::OptimizeSensing:
      case Command::OptimizeIsac:
      case Command::OptimizeOfdm: return run_optimize(cfg, out);
      case Command::Sweep: return run_sweep(cfg, out, false);
      case Command::Benchmark: return run_sweep(cfg, out, true);
      case Command::Pattern: return run_pattern(cfg, out);
    }
    throw ConfigError("unhandled command");
  } catch (const Failure& f) {
    err << f.diag.dump(2) << "\n";
    return f.code;
  } catch (const InfeasibleError& e) {
    json d = {{"status", "infeasible"},
              {"message", e.what()},
              {"best_found_rate_nats", number(e.best_rate())}};
    err << d.dump(2) << "\n";
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    err << json{{"status", "invalid_config"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    err << json{{"status", "invalid_config"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << json{{"status", "solver_failure"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace isac
