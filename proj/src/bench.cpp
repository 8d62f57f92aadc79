// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace isac {

namespace {

using Kind = SchemeId::Kind;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

bool sensing_only(const Scenario& s) { return !(s.rate_target > 0.0); }

// Sensing-only schemes run the P0 engine; ISAC schemes the rate-constrained engine.
AoReport run_ao(const Scenario& s, const SchemeOptions& o, TransmitMode mode,
                std::optional<CMat> fixed, std::optional<double> point) {
  if (sensing_only(s)) {
    SensingAoOptions so = o.sensing;
    so.transmit = mode;
    so.fixed_v_rf = std::move(fixed);
    so.point_angle = point;
    so.seed = s.seed;
    return ao_p0(s, so);
  }
  IsacAoOptions io = o.isac;
  io.transmit = mode;
  io.fixed_v_rf = std::move(fixed);
  io.point_angle = point;
  io.seed = s.seed;
  return s.channel.subcarriers() > 1 ? ao_p2(s, io) : ao_p1(s, io);
}

AoReport finish(const Scenario& s, HybridDesign d) {
  AoReport rep;
  const PcrbModel model(s);
  rep.pcrb = model.pcrb(d);
  rep.trace = {rep.pcrb};
  rep.rate = design_rate(s, d);
  rep.power = d.transmit_power(s.arrays.n_tx);
  rep.feasible = rep.power <= s.power * (1.0 + 1e-10) + 1e-12 &&
                 (sensing_only(s) || rep.rate >= s.rate_target - 1e-6);
  rep.converged = true;
  rep.design = std::move(d);
  return rep;
}

}  // namespace

std::string SchemeId::name() const {
  switch (kind) {
    case Kind::FullyDigitalOptimal: return "FullyDigitalOptimal";
    case Kind::FDReceive: return "FDReceive";
    case Kind::FDTransmit: return "FDTransmit";
    case Kind::RandomPhase: return "RandomPhase(" + std::to_string(n_rand) + ")";
    case Kind::DirectionAlignment: return "DirectionAlignment";
    case Kind::PartialPriorCrb: return "PartialPriorCrb";
    case Kind::ProposedAO: return "ProposedAO";
  }
  return "unknown";
}

SchemeId SchemeId::parse(const std::string& text) {
  auto lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  SchemeId id;
  if (lower == "fullydigitaloptimal" || lower == "fully-digital") {
    id.kind = Kind::FullyDigitalOptimal;
  } else if (lower == "fdreceive" || lower == "fd-receive") {
    id.kind = Kind::FDReceive;
  } else if (lower == "fdtransmit" || lower == "fd-transmit") {
    id.kind = Kind::FDTransmit;
  } else if (lower.rfind("randomphase", 0) == 0 || lower.rfind("random-phase", 0) == 0) {
    id.kind = Kind::RandomPhase;
    const auto open = lower.find_first_of("(:");
    if (open != std::string::npos) {
      std::string num = lower.substr(open + 1);
      if (!num.empty() && num.back() == ')') num.pop_back();
      try {
        std::size_t used = 0;
        id.n_rand = std::stoi(num, &used);
        if (used != num.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::invalid_argument("bad realization count in scheme '" + text + "'");
      }
      if (id.n_rand < 1) throw std::invalid_argument("random-phase needs at least one realization");
    }
  } else if (lower == "directionalignment" || lower == "direction-alignment") {
    id.kind = Kind::DirectionAlignment;
  } else if (lower == "partialpriorcrb" || lower == "partial-prior") {
    id.kind = Kind::PartialPriorCrb;
  } else if (lower == "proposedao" || lower == "proposed") {
    id.kind = Kind::ProposedAO;
  } else {
    throw std::invalid_argument("unknown scheme '" + text + "'");
  }
  return id;
}

CMat direction_alignment_analog(const Scenario& s) {
  const auto& ar = s.arrays;
  std::vector<GaussianComponent> comps = s.angle_prior.components();
  std::stable_sort(comps.begin(), comps.end(),
                   [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight > b.weight; });
  CMat v(ar.n_tx, ar.n_rf_tx);
  const CVec user = steering_vector(ar.n_tx, s.channel_spec.user_angle);
  for (int c = 0; c < ar.n_rf_tx; ++c) {
    const std::size_t j = static_cast<std::size_t>(c);
    v.col(c) = (c == 0 || j > comps.size()) ? user : steering_vector(ar.n_tx, comps[j - 1].mean);
  }
  return v;
}

AoReport run_scheme(const SchemeId& scheme, const Scenario& s_in, const SchemeOptions& o) {
  const double t0 = now_ms();
  Scenario s = s_in;
  AoReport rep;
  switch (scheme.kind) {
    case Kind::FullyDigitalOptimal: {
      s.arrays.rx_architecture = RxArchitecture::FullyDigital;
      s.arrays.n_rf_rx = s.arrays.n_rx;
      s.arrays.n_rf_tx = s.arrays.n_tx;
      const PcrbModel model(s);
      HybridDesign d;
      d.rx = DigitalReceive{};
      const CMat a = model.kernel().a1(CMat::Identity(s.arrays.n_rx, s.arrays.n_rx));
      if (sensing_only(s)) {
        d.r_bb = {solve_p0_fully_digital(a, s.power)};
        for (int k = 1; k < s.channel.subcarriers(); ++k)
          d.r_bb.push_back(CMat::Zero(s.arrays.n_tx, s.arrays.n_tx));
      } else {
        const CMat eye = CMat::Identity(s.arrays.n_tx, s.arrays.n_tx);
        d.r_bb = rate_constrained_trace_max(a, eye, s.channel.response, s.power, s.rate_target,
                                            s.noise_comm)
                     .r;
      }
      rep = finish(s, std::move(d));
      break;
    }
    case Kind::FDReceive:
      s.arrays.rx_architecture = RxArchitecture::FullyDigital;
      s.arrays.n_rf_rx = s.arrays.n_rx;
      rep = run_ao(s, o, TransmitMode::Hybrid, std::nullopt, std::nullopt);
      break;
    case Kind::FDTransmit:
      s.arrays.n_rf_tx = s.arrays.n_tx;
      rep = run_ao(s, o, TransmitMode::FullyDigital, std::nullopt, std::nullopt);
      break;
    case Kind::RandomPhase: {
      IsacAoOptions io = o.isac;
      io.transmit = TransmitMode::Hybrid;
      if (sensing_only(s)) s.rate_target = 0.0;
      rep = finish(s, init_random_phase(s, scheme.n_rand, s.seed, io));
      break;
    }
    case Kind::DirectionAlignment:
      rep = run_ao(s, o, TransmitMode::FixedAnalog, direction_alignment_analog(s), std::nullopt);
      break;
    case Kind::PartialPriorCrb:
      rep = run_ao(s, o, TransmitMode::Hybrid, std::nullopt, s.angle_prior.mode());
      break;
    case Kind::ProposedAO:
      rep = run_ao(s, o, TransmitMode::Hybrid, std::nullopt, std::nullopt);
      break;
  }
  rep.wall_ms = now_ms() - t0;
  return rep;
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::PowerDbm: return "power_dbm";
    case SweepVariable::RateBits: return "rate_bps";
    case SweepVariable::RfAllocation: return "n_rf_tx";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(const std::string& text) {
  if (text == "power_dbm" || text == "power") return SweepVariable::PowerDbm;
  if (text == "rate_bps" || text == "rate") return SweepVariable::RateBits;
  if (text == "n_rf_tx" || text == "rf") return SweepVariable::RfAllocation;
  throw std::invalid_argument("unknown sweep variable '" + text + "' (power_dbm, rate_bps, n_rf_tx)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep value list is empty");
  if (!std::is_sorted(values.begin(), values.end()))
    throw std::invalid_argument("sweep values must be sorted ascending");
  if (schemes.empty()) throw std::invalid_argument("sweep needs at least one scheme");
  if (trials < 1) throw std::invalid_argument("sweep needs at least one trial");
  if (variable == SweepVariable::RfAllocation) {
    for (double v : values)
      if (v != std::floor(v) || v < 1) throw std::invalid_argument("RF chain counts must be positive integers");
    if (rf_total < 2) throw std::invalid_argument("rf_total must be at least 2");
  }
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return mix_seed(seed, static_cast<std::uint64_t>(trial));
}

Scenario sweep_scenario(const SweepSpec& spec, double value, int trial) {
  Scenario s = spec.base;
  switch (spec.variable) {
    case SweepVariable::PowerDbm:
      s.power = dbm_to_watts(value);
      break;
    case SweepVariable::RateBits:
      s.rate_target = value * std::log(2.0);
      break;
    case SweepVariable::RfAllocation:
      s.arrays.n_rf_tx = static_cast<int>(value);
      s.arrays.n_rf_rx = spec.rf_total - s.arrays.n_rf_tx;
      if (spec.rf_sensing_only) s.rate_target = 0.0;
      break;
  }
  s.seed = trial_seed(spec.seed, trial);
  s.arrays.validate();
  s.channel = realize_channel(s, s.seed);
  s.validate();
  return s;
}

namespace {

int thread_count(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("ISAC_BEAMKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  n = std::max(1u, n);
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

SweepRow run_cell(const SweepSpec& spec, double value, const SchemeId& scheme, int trial) {
  SweepRow row;
  row.sweep_var = sweep_variable_name(spec.variable);
  row.value = value;
  row.scheme = scheme.name();
  row.trial = trial;
  try {
    const Scenario s = sweep_scenario(spec, value, trial);
    const AoReport rep = run_scheme(scheme, s, spec.options);
    row.pcrb_theta = rep.pcrb;
    row.rate_nats = rep.rate;
    row.iterations = rep.iterations;
    row.feasible = rep.feasible;
    if (spec.record_timing) row.wall_ms = rep.wall_ms;
  } catch (const InfeasibleError& e) {
    row.pcrb_theta = std::numeric_limits<double>::quiet_NaN();
    row.rate_nats = e.best_rate();
    row.feasible = false;
  } catch (const std::invalid_argument&) {
    // Architecture not realizable for this value (for example RF chains that do
    // not divide the receive array).
    row.pcrb_theta = std::numeric_limits<double>::quiet_NaN();
    row.rate_nats = 0.0;
    row.feasible = false;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  struct Job {
    double value;
    std::size_t scheme;
    int trial;
  };
  std::vector<Job> jobs;
  for (double v : spec.values)
    for (std::size_t k = 0; k < spec.schemes.size(); ++k)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({v, k, t});
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        rows[i] = run_cell(spec, jobs[i].value, spec.schemes[jobs[i].scheme], jobs[i].trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = thread_count(jobs.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<AggregateRow> out;
  auto find = [&](const SweepRow& r) -> AggregateRow& {
    for (auto& a : out)
      if (a.sweep_var == r.sweep_var && a.value == r.value && a.scheme == r.scheme) return a;
    AggregateRow a;
    a.sweep_var = r.sweep_var;
    a.value = r.value;
    a.scheme = r.scheme;
    out.push_back(a);
    return out.back();
  };
  std::vector<std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    AggregateRow& a = find(r);
    const std::size_t idx = static_cast<std::size_t>(&a - out.data());
    if (groups.size() <= idx) groups.resize(idx + 1);
    groups[idx].push_back(&r);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& a = out[i];
    std::vector<double> p, q;
    for (const SweepRow* r : groups[i]) {
      ++a.trials;
      if (!r->feasible) continue;
      ++a.feasible;
      p.push_back(r->pcrb_theta);
      q.push_back(r->rate_nats);
    }
    auto stats = [](const std::vector<double>& x, double& mean, double& se) {
      const double n = static_cast<double>(x.size());
      mean = n > 0 ? std::accumulate(x.begin(), x.end(), 0.0) / n : std::numeric_limits<double>::quiet_NaN();
      se = 0.0;
      if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / (n - 1.0) / n);
      }
    };
    stats(p, a.pcrb_mean, a.pcrb_stderr);
    stats(q, a.rate_mean, a.rate_stderr);
  }
  return out;
}

std::vector<AggregateRow> mc_average(SweepSpec spec, int n_trials) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
  spec.trials = n_trials;
  return aggregate(sweep(spec));
}

std::vector<double> uniform_angle_grid(int points) {
  if (points < 2) throw std::invalid_argument("angle grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = -kPi / 2 + kPi * i / (points - 1);
  return g;
}

std::vector<PatternPoint> power_pattern(const Scenario& s, const HybridDesign& d,
                                        const std::vector<double>& grid) {
  const auto& ar = s.arrays;
  const CMat w = combiner_matrix(d.rx, ar);
  const auto x = d.transmit_covariances(ar.n_tx);
  std::vector<PatternPoint> out;
  out.reserve(grid.size());
  for (double th : grid) {
    const CVec a = steering_vector(ar.n_tx, th);
    const CVec b = steering_vector(ar.n_rx, th);
    double tx = 0.0;
    for (const auto& xk : x) tx += a.dot(xk * a).real();
    const double rx = (w.adjoint() * b).squaredNorm();
    out.push_back({th, s.reflection.gamma * rx * std::max(0.0, tx)});
  }
  return out;
}

double pattern_mass_near_means(const std::vector<PatternPoint>& c, const GmmAnglePrior& prior,
                               double width) {
  auto inside = [&](double th) {
    for (const auto& g : prior.components())
      if (std::abs(th - g.mean) <= width * std::sqrt(g.variance)) return true;
    return false;
  };
  double total = 0.0, near = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double h = c[i].theta - c[i - 1].theta;
    const double seg = 0.5 * h * (c[i].power + c[i - 1].power);
    total += seg;
    // A segment counts toward the window when both end points lie inside it.
    if (inside(c[i].theta) && inside(c[i - 1].theta)) near += seg;
  }
  return total > 0.0 ? near / total : 0.0;
}

}  // namespace isac
