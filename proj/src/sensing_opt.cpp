// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/sensing_opt.hpp"

#include <chrono>
#include <cmath>

#include "isac/cvxkit.hpp"

namespace isac {

CMat solve_p0_fully_digital(const CMat& a, double power) {
  const EigPair e = top_eig(a);
  return power * e.vector * e.vector.adjoint();
}

HybridFactor hybrid_from_rank1(const CVec& f, int n_rf_tx) {
  if (n_rf_tx < 2) throw std::invalid_argument("rank-1 hybrid factorization needs two RF chains");
  const double fmax = f.cwiseAbs().maxCoeff();
  if (!(fmax > 0.0)) throw std::invalid_argument("cannot factor a zero beamformer");
  const double c = fmax / 2.0;
  const Eigen::Index n = f.size();
  HybridFactor h;
  h.v_rf = CMat::Ones(n, n_rf_tx);
  h.v_bb = CVec::Zero(n_rf_tx);
  h.v_bb[0] = c;
  h.v_bb[1] = c;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double phase = std::arg(f[m]);
    const double spread = std::acos(std::clamp(std::abs(f[m]) / (2.0 * c), 0.0, 1.0));
    h.v_rf(m, 0) = std::polar(1.0, phase + spread);
    h.v_rf(m, 1) = std::polar(1.0, phase - spread);
  }
  return h;
}

namespace {

CVec phase_pass(CVec x, const CMat& m) {
  const Eigen::Index n = x.size();
  if (m.rows() != n || m.cols() != n) throw std::invalid_argument("phase matrix size mismatch");
  for (Eigen::Index k = 0; k < n; ++k) {
    cd s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != k) s += m(k, i) * x[i];
    const double a = std::abs(s);
    x[k] = a > 0.0 ? s / a : cd(1.0, 0.0);
  }
  return x;
}

}  // namespace

CVec coordinate_update_receive(const CVec& d, const CMat& pi) { return phase_pass(d, pi); }
CVec coordinate_update_transmit(const CVec& v, const CMat& a_tilde) { return phase_pass(v, a_tilde); }

CMat receive_phase_matrix(const CMat& b, const ArrayConfig& arrays) {
  const int m = arrays.rx_block_size();
  CMat pi = CMat::Zero(arrays.n_rx, arrays.n_rx);
  for (int c = 0; c < arrays.n_rf_rx; ++c)
    pi.block(c * m, c * m, m, m) = b.block(c * m, c * m, m, m).transpose();
  return pi;
}

std::vector<int> dft_select_fc(const CMat& b, int n_rf_rx) {
  const int n = static_cast<int>(b.rows());
  if (n_rf_rx < 1 || n_rf_rx > n) throw std::invalid_argument("invalid receive RF chain count");
  std::vector<double> score(n);
  double smax = 0.0;
  for (int k = 0; k < n; ++k) {
    const CVec f = dft_column(n, k);
    score[k] = f.dot(b * f).real();
    smax = std::max(smax, std::abs(score[k]));
  }
  const double tie = 1e-12 * std::max(1.0, smax);
  std::vector<int> q;
  std::vector<char> used(n, 0);
  for (int r = 0; r < n_rf_rx; ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k)
      if (!used[k]) best = std::max(best, score[k]);
    for (int k = 0; k < n; ++k) {
      if (!used[k] && score[k] >= best - tie) {
        q.push_back(k);
        used[k] = 1;
        break;
      }
    }
  }
  return q;
}

RxDescriptor update_receive(const ArrayConfig& arrays, const RxDescriptor& rx, const CMat& b) {
  if (const auto* p = std::get_if<PartialPhases>(&rx))
    return PartialPhases{coordinate_update_receive(p->d, receive_phase_matrix(b, arrays))};
  if (std::holds_alternative<DftSelection>(rx))
    return DftSelection{dft_select_fc(b, arrays.n_rf_rx)};
  return rx;
}

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

CVec random_phases(Rng& rng, Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::polar(1.0, rng.uniform_phase());
  return v;
}

// Transmit block for a fixed combiner: returns (V, R) maximizing tr(A V R V^H).
void transmit_block(const Scenario& s, const SensingAoOptions& o, const CMat& a,
                    HybridDesign& d) {
  const auto& ar = s.arrays;
  switch (o.transmit) {
    case TransmitMode::FullyDigital:
      d.v_rf.reset();
      d.r_bb = {solve_p0_fully_digital(a, s.power)};
      return;
    case TransmitMode::FixedAnalog: {
      const CMat& v = *d.v_rf;
      const CMat dummy = CMat::Zero(1, v.cols());
      auto sol = rate_constrained_trace_max(v.adjoint() * a * v, v.adjoint() * v,
                                            std::span<const CMat>(&dummy, 1), s.power, 0.0, 1.0);
      d.r_bb = {sol.r[0]};
      return;
    }
    case TransmitMode::Hybrid:
      break;
  }
  if (ar.n_rf_tx == 1) {
    CVec v = d.v_rf->col(0);
    v = coordinate_update_transmit(v, a);
    d.v_rf = CMat(v);
    d.r_bb = {CMat::Constant(1, 1, cd(s.power / ar.n_tx, 0.0))};
    return;
  }
  const EigPair e = top_eig(a);
  const CVec f = std::sqrt(s.power) * e.vector;
  HybridFactor h = hybrid_from_rank1(f, ar.n_rf_tx);
  d.v_rf = h.v_rf;
  d.r_bb = {h.v_bb * h.v_bb.adjoint()};
}

HybridDesign initial_design(const Scenario& s, const SensingAoOptions& o, Rng* rng) {
  const auto& ar = s.arrays;
  HybridDesign d;
  d.rx = default_receive(ar);
  if (rng) {
    if (auto* p = std::get_if<PartialPhases>(&d.rx)) p->d = random_phases(*rng, ar.n_rx);
  }
  switch (o.transmit) {
    case TransmitMode::FullyDigital:
      d.r_bb = {CMat::Identity(ar.n_tx, ar.n_tx) * cd(s.power / ar.n_tx, 0.0)};
      break;
    case TransmitMode::FixedAnalog: {
      if (!o.fixed_v_rf) throw std::invalid_argument("fixed analog mode needs a transmit matrix");
      d.v_rf = *o.fixed_v_rf;
      const double g = (d.v_rf->col(0)).squaredNorm();
      CMat r = CMat::Zero(d.v_rf->cols(), d.v_rf->cols());
      r(0, 0) = s.power / g;
      d.r_bb = {r};
      break;
    }
    case TransmitMode::Hybrid: {
      CMat v = CMat::Ones(ar.n_tx, ar.n_rf_tx);
      if (rng) {
        for (int c = 0; c < ar.n_rf_tx; ++c) v.col(c) = random_phases(*rng, ar.n_tx);
      }
      d.v_rf = v;
      CMat r = CMat::Zero(ar.n_rf_tx, ar.n_rf_tx);
      r(0, 0) = s.power / ar.n_tx;
      d.r_bb = {r};
      break;
    }
  }
  if (o.initial) {
    if (o.initial->v_rf && o.transmit == TransmitMode::Hybrid) d.v_rf = o.initial->v_rf;
    d.rx = o.initial->rx;
    if (!o.initial->r_bb.empty() && o.initial->r_bb[0].rows() == d.r_bb[0].rows())
      d.r_bb = {o.initial->r_bb[0]};
  }
  return d;
}

AoReport run_once(const Scenario& s, const SensingAoOptions& o, const PcrbModel& opt,
                  HybridDesign d) {
  AoReport rep;
  auto objective = [&](const HybridDesign& x) { return opt.pcrb(x); };
  double cur = objective(d);
  rep.trace.push_back(cur);
  for (int it = 1; it <= o.max_iters; ++it) {
    HybridDesign cand = d;
    const CMat a = opt.kernel().a1(combiner_matrix(cand.rx, s.arrays));
    transmit_block(s, o, a, cand);
    double val = objective(cand);
    if (val <= cur) {
      d = cand;
      cur = val;
    }
    if (o.optimize_receive && !std::holds_alternative<DigitalReceive>(d.rx)) {
      cand = d;
      const CMat b = opt.kernel().b(cand.transmit_covariances(s.arrays.n_tx));
      cand.rx = update_receive(s.arrays, cand.rx, b);
      val = objective(cand);
      if (val <= cur) {
        d = cand;
        cur = val;
      }
    }
    const double prev = rep.trace.back();
    rep.trace.push_back(cur);
    rep.iterations = it;
    if (prev - cur <= o.rel_tol * prev) {
      rep.converged = true;
      break;
    }
  }
  rep.design = std::move(d);
  return rep;
}

}  // namespace

AoReport ao_p0(const Scenario& s, const SensingAoOptions& o) {
  const double t0 = now_ms();
  const PcrbModel truth(s);
  const PcrbModel opt = o.point_angle ? PcrbModel(s, point_measure(*o.point_angle)) : truth;
  HybridDesign start = initial_design(s, o, nullptr);
  AoReport best;
  if (!(s.power > 0.0)) {
    for (auto& r : start.r_bb) r.setZero();
    best.design = start;
    best.trace = {1.0 / truth.fisher_prior()};
    best.converged = true;
  } else {
    best = run_once(s, o, opt, start);
    Rng rng = Rng(o.seed).split("sensing-restarts");
    for (int r = 0; r < o.restarts; ++r) {
      Rng sub = rng.split(static_cast<std::uint64_t>(r));
      AoReport rep = run_once(s, o, opt, initial_design(s, o, &sub));
      if (rep.trace.back() < best.trace.back()) best = std::move(rep);
    }
  }
  best.pcrb = truth.pcrb(best.design);
  best.power = best.design.transmit_power(s.arrays.n_tx);
  best.rate = 0.0;
  if (s.channel.subcarriers() == 1 && s.channel.response[0].cols() == s.arrays.n_tx) {
    const auto x = best.design.transmit_covariances(s.arrays.n_tx);
    best.rate = log_det_rate(s.channel.response[0], x[0], s.noise_comm);
  }
  best.feasible = true;
  best.wall_ms = now_ms() - t0;
  return best;
}

}  // namespace isac
