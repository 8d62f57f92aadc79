// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/isac_opt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace isac {

CMat digital_factor(const CMat& r, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(r));
  const double tr = std::max(0.0, r.trace().real());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;)
    if (es.eigenvalues()[i] > rel_tol * tr && es.eigenvalues()[i] > 0.0) keep.push_back(i);
  CMat f(r.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    f.col(j) = es.eigenvectors().col(keep[j]) * std::sqrt(es.eigenvalues()[keep[j]]);
  return f;
}

WmmseAux wmmse_update(const CMat& h, const CMat& v_rf, const CMat& v_bb, double noise) {
  if (!(noise > 0.0)) throw std::invalid_argument("noise power must be positive");
  const Eigen::Index nu = h.rows(), ns = v_bb.cols();
  WmmseAux aux;
  aux.v_bb = v_bb;
  if (ns == 0) {
    aux.q = CMat::Zero(nu, 0);
    aux.u = CMat::Zero(0, 0);
    aux.b1 = CMat::Zero(h.cols(), h.cols());
    aux.b2 = CMat::Zero(0, h.cols());
    return aux;
  }
  const CMat g = h * v_rf * v_bb;
  const CMat j = noise * CMat::Identity(nu, nu) + g * g.adjoint();
  aux.q = j.ldlt().solve(g);
  const CMat d = aux.q.adjoint() * g - CMat::Identity(ns, ns);
  const CMat e = hermitian_part(noise * aux.q.adjoint() * aux.q + d * d.adjoint());
  Eigen::LLT<CMat> llt(e);
  if (llt.info() != Eigen::Success) throw SolverError("WMMSE error matrix is not positive definite");
  aux.u = hermitian_part(llt.solve(CMat::Identity(ns, ns)));
  double logdet_u = 0.0;
  const CMat l = llt.matrixL();
  for (Eigen::Index i = 0; i < ns; ++i) logdet_u -= 2.0 * std::log(l(i, i).real());
  const double tr_u = aux.u.trace().real();
  aux.eta = logdet_u + double(ns) - tr_u - noise * (aux.u * aux.q.adjoint() * aux.q).trace().real();
  aux.b1 = hermitian_part(h.adjoint() * aux.q * aux.u * aux.q.adjoint() * h);
  aux.b2 = v_bb * aux.u * aux.q.adjoint() * h;
  aux.xi = logdet_u - (aux.u * e).trace().real() + double(ns);
  return aux;
}

double wmmse_surrogate(const WmmseAux& aux, const CMat& v_rf) {
  if (aux.v_bb.cols() == 0) return 0.0;
  const CMat r = aux.v_bb * aux.v_bb.adjoint();
  return aux.eta - (v_rf.adjoint() * aux.b1 * v_rf * r).trace().real() +
         2.0 * (aux.b2 * v_rf).trace().real();
}

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

CMat kron(const CMat& a, const CMat& b) {
  CMat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Real symmetric lift of a Hermitian form: x^T L x = v^H M v with x = [Re v; Im v].
Eigen::SparseMatrix<double> lift(const CMat& m, int dim) {
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = 0.5 * (m(i, j).real() + m(j, i).real());
      const double im = 0.5 * (m(i, j).imag() - m(j, i).imag());
      if (re != 0.0) {
        t.emplace_back(i, j, re);
        t.emplace_back(n + i, n + j, re);
      }
      if (im != 0.0) {
        t.emplace_back(i, n + j, -im);
        t.emplace_back(n + i, j, im);
      }
    }
  Eigen::SparseMatrix<double> s(dim, dim);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

CVec vec(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMat>(v.data(), rows, cols);
}

CVec project_unit(const CVec& v) {
  CVec z(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    z[i] = a > 0.0 ? v[i] / a : cd(1.0, 0.0);
  }
  return z;
}

}  // namespace

double AnalogSubproblem::sensing_value(const CVec& v) const { return v.dot(sensing * v).real(); }
double AnalogSubproblem::power_value(const CVec& v) const { return v.dot(gram * v).real(); }
double AnalogSubproblem::rate_value(const CVec& v) const {
  return eta - v.dot(rate_quad * v).real() + 2.0 * (rate_lin.transpose() * v)(0).real();
}
bool AnalogSubproblem::feasible(const CVec& v, double tol) const {
  if (power_value(v) > power * (1.0 + tol)) return false;
  if (rate_target > 0.0 && rate_value(v) < rate_target - tol) return false;
  return true;
}

AnalogSubproblem make_analog_subproblem(const CMat& a_tilde, std::span<const CMat> r_bb,
                                        std::span<const WmmseAux> aux, double power,
                                        double rate_target, Eigen::Index n_tx) {
  if (r_bb.empty()) throw std::invalid_argument("at least one digital covariance is required");
  const bool with_rate = rate_target > 0.0;
  if (with_rate && aux.size() != r_bb.size())
    throw std::invalid_argument("one WMMSE aux per sub-carrier is required");
  const Eigen::Index nrf = r_bb[0].rows();
  const Eigen::Index n = n_tx * nrf;
  const double kk = static_cast<double>(r_bb.size());
  AnalogSubproblem sub;
  sub.n_tx = n_tx;
  sub.n_rf = nrf;
  sub.power = power;
  sub.rate_target = rate_target;
  sub.sensing = CMat::Zero(n, n);
  sub.gram = CMat::Zero(n, n);
  sub.rate_quad = CMat::Zero(n, n);
  sub.rate_lin = CVec::Zero(n);
  const CMat eye = CMat::Identity(n_tx, n_tx);
  for (std::size_t k = 0; k < r_bb.size(); ++k) {
    const CMat rt = r_bb[k].transpose();
    sub.sensing += kron(rt, a_tilde);
    sub.gram += kron(rt, eye);
    if (with_rate && aux[k].v_bb.cols() > 0) {
      const CMat rk = aux[k].v_bb * aux[k].v_bb.adjoint();
      sub.rate_quad += kron(rk.transpose(), aux[k].b1) / kk;
      sub.rate_lin += vec(aux[k].b2.transpose()) / kk;
      sub.eta += aux[k].eta / kk;
    }
  }
  sub.sensing = hermitian_part(sub.sensing);
  sub.gram = hermitian_part(sub.gram);
  sub.rate_quad = hermitian_part(sub.rate_quad);
  return sub;
}

CMat coordinate_update_isac(const AnalogSubproblem& sub, const CMat& v_rf, int max_passes,
                            double rel_tol) {
  CVec v = vec(v_rf);
  const Eigen::Index n = v.size();
  if (n != sub.sensing.rows()) throw std::invalid_argument("analog matrix does not match subproblem");
  const bool with_rate = sub.rate_target > 0.0;
  double pw = sub.power_value(v);
  double rt = with_rate ? sub.rate_value(v) : 0.0;
  double obj = sub.sensing_value(v);
  const double pw_cap = std::max(sub.power, pw);
  for (int pass = 0; pass < max_passes; ++pass) {
    const double obj_start = obj;
    for (Eigen::Index m = 0; m < n; ++m) {
      const cd z0 = v[m];
      v[m] = 0.0;
      const cd s1 = sub.sensing.row(m) * v;
      const cd s2 = sub.gram.row(m) * v;
      const cd u = with_rate ? cd(std::conj(sub.rate_lin[m]) - cd(sub.rate_quad.row(m) * v)) : cd(0.0);
      v[m] = z0;
      auto lin = [](cd z, cd s) { return 2.0 * (std::conj(z) * s).real(); };
      // Power: lin(z, s2) <= bp; rate: lin(z, u) >= br.
      const double bp = lin(z0, s2) + pw_cap - pw;
      const double br = with_rate ? lin(z0, u) + std::min(sub.rate_target, rt) - rt : 0.0;
      std::vector<double> cand = {std::arg(s1), std::arg(z0)};
      auto ends = [&](cd s, double level) {
        const double r = 2.0 * std::abs(s);
        if (r <= 0.0 || std::abs(level) > r) return;
        const double w = std::acos(std::clamp(level / r, -1.0, 1.0));
        cand.push_back(std::arg(s) + w);
        cand.push_back(std::arg(s) - w);
      };
      ends(s2, bp);
      if (with_rate) ends(u, br);
      const double tol_p = 1e-12 * (std::abs(bp) + 2.0 * std::abs(s2) + sub.power);
      const double tol_r = 1e-12 * (std::abs(br) + 2.0 * std::abs(u) + 1.0);
      cd best = z0;
      double best_val = lin(z0, s1);
      for (double phi : cand) {
        const cd z = std::polar(1.0, phi);
        if (lin(z, s2) > bp + tol_p) continue;
        if (with_rate && lin(z, u) < br - tol_r) continue;
        const double val = lin(z, s1);
        if (val > best_val) {
          best_val = val;
          best = z;
        }
      }
      if (best != z0) {
        obj += best_val - lin(z0, s1);
        pw += lin(best, s2) - lin(z0, s2);
        if (with_rate) rt += lin(best, u) - lin(z0, u);
        v[m] = best;
      }
    }
    if (obj - obj_start <= rel_tol * std::abs(obj)) break;
  }
  return unvec(v, sub.n_tx, sub.n_rf);
}

FppScaResult fpp_sca_stacked(const CMat& a_tilde, std::span<const CMat> r_bb,
                             std::span<const WmmseAux> aux, double power, double rate_target,
                             const CMat& v_init, const FppScaOptions& o) {
  const Eigen::Index nt = v_init.rows(), nrf = v_init.cols();
  const AnalogSubproblem sub = make_analog_subproblem(a_tilde, r_bb, aux, power, rate_target, nt);
  const Eigen::Index n = nt * nrf;
  const int nn = static_cast<int>(n);
  const bool with_rate = rate_target > 0.0;
  auto acceptable = [&](const CVec& v) { return sub.feasible(v, 1e-6); };

  const int dim = 4 * nn + 2;
  const int it_t = 2 * nn, it_r = 2 * nn + 1, it_p = 2 * nn + 2, it_w = 3 * nn + 2;

  FppScaResult res;
  CVec vbar = vec(v_init);
  // The sensing form is normalized by its value at the start so that the
  // penalty weight does not depend on the physical scale of A.
  const double f_init = sub.sensing_value(vbar);
  const double scale = f_init > 0.0 ? 1.0 / f_init : 1.0;
  const CMat ups1 = sub.sensing * scale;
  CVec best = project_unit(vbar);
  double best_obj = acceptable(best) ? sub.sensing_value(best) : -std::numeric_limits<double>::infinity();
  double eps = o.epsilon;
  bool bumped = false;
  double prev_obj = f_init * scale;

  const Eigen::SparseMatrix<double> q_pow = lift(sub.gram, dim);
  const Eigen::SparseMatrix<double> q_rate = with_rate ? lift(sub.rate_quad, dim) : Eigen::SparseMatrix<double>();

  for (int it = 0; it < o.max_iters; ++it) {
    ConvexQcqp qp;
    qp.dim = dim;
    qp.objective = RVec::Zero(dim);
    qp.objective[it_t] = -1.0;
    qp.objective[it_r] = eps;
    for (int m = 0; m < nn; ++m) {
      qp.objective[it_p + m] = eps;
      qp.objective[it_w + m] = eps;
    }
    const CVec g = ups1 * vbar;
    const double f0 = vbar.dot(g).real();
    {
      QuadConstraint c;
      c.a = RVec::Zero(dim);
      c.a.segment(0, nn) = -2.0 * g.real();
      c.a.segment(nn, nn) = -2.0 * g.imag();
      c.a[it_t] = 1.0;
      c.a[it_r] = -1.0;
      c.b = f0;
      qp.constraints.push_back(std::move(c));
    }
    {
      QuadConstraint c;
      c.q = q_pow;
      c.a = RVec::Zero(dim);
      c.b = -power;
      qp.constraints.push_back(std::move(c));
    }
    if (with_rate) {
      QuadConstraint c;
      c.q = q_rate;
      c.a = RVec::Zero(dim);
      c.a.segment(0, nn) = -2.0 * sub.rate_lin.real();
      c.a.segment(nn, nn) = 2.0 * sub.rate_lin.imag();
      c.b = rate_target - sub.eta;
      qp.constraints.push_back(std::move(c));
    }
    for (int m = 0; m < nn; ++m) {
      QuadConstraint up;
      std::vector<Eigen::Triplet<double>> t = {{m, m, 1.0}, {nn + m, nn + m, 1.0}};
      up.q.resize(dim, dim);
      up.q.setFromTriplets(t.begin(), t.end());
      up.a = RVec::Zero(dim);
      up.a[it_p + m] = -1.0;
      up.b = -1.0;
      qp.constraints.push_back(std::move(up));
      QuadConstraint lo;
      lo.a = RVec::Zero(dim);
      lo.a[m] = -2.0 * vbar[m].real();
      lo.a[nn + m] = -2.0 * vbar[m].imag();
      lo.a[it_w + m] = -1.0;
      lo.b = 1.0 + std::norm(vbar[m]);
      qp.constraints.push_back(std::move(lo));
    }
    qp.nonnegative.assign(dim, false);
    qp.nonnegative[it_r] = true;
    for (int m = 0; m < nn; ++m) {
      qp.nonnegative[it_p + m] = true;
      qp.nonnegative[it_w + m] = true;
    }
    RVec x0 = RVec::Zero(dim);
    x0.segment(0, nn) = vbar.real();
    x0.segment(nn, nn) = vbar.imag();
    x0[it_t] = f0 - 1.0;
    x0[it_r] = 1.0;
    x0.segment(it_p, nn).setOnes();
    x0.segment(it_w, nn).setOnes();
    qp.start = x0;

    const SolverReport rep = solve_convex_qcqp(qp, o.qcqp_tol, 200);
    res.iterations = it + 1;
    if (!rep.success && rep.max_violation > 1e-6 * (1.0 + power)) {
      res.solver_failed = true;
      break;
    }
    CVec v(n);
    for (int m = 0; m < nn; ++m) v[m] = cd(rep.x[m], rep.x[nn + m]);
    const double slack = rep.x[it_r] + rep.x.segment(it_p, nn).sum() + rep.x.segment(it_w, nn).sum();
    const CVec z = project_unit(v);
    if (acceptable(z)) {
      const double val = sub.sensing_value(z);
      if (val > best_obj) {
        best_obj = val;
        best = z;
      }
    }
    res.objective_trace.push_back(best_obj);
    res.slack_trace.push_back(slack);
    const double obj = v.dot(ups1 * v).real();
    const bool flat = std::abs(obj - prev_obj) <= o.objective_tol * std::max(1.0, std::abs(obj));
    prev_obj = obj;
    vbar = v;
    if (slack < o.slack_tol && flat) {
      res.slacks_vanished = true;
      break;
    }
    if (!bumped && it + 1 >= o.max_iters / 2 && slack >= o.slack_tol) {
      eps *= 10.0;
      bumped = true;
    }
  }
  if (!res.slack_trace.empty() && res.slack_trace.back() < o.slack_tol) res.slacks_vanished = true;
  res.v_rf = unvec(best, nt, nrf);
  return res;
}

FppScaResult fpp_sca_vrf(const Scenario& s, const CMat& a_tilde, const CMat& r_bb,
                         const WmmseAux& aux, const CMat& v_init, const FppScaOptions& o) {
  return fpp_sca_stacked(a_tilde, std::span<const CMat>(&r_bb, 1),
                         std::span<const WmmseAux>(&aux, 1), s.power, s.rate_target, v_init, o);
}

CMat optimal_rbb_isac(const CMat& a_tilde, const CMat& v_rf, const CMat& h, double power,
                      double rate_target, double noise) {
  const CMat hv = h * v_rf;
  return rate_constrained_trace_max(v_rf.adjoint() * a_tilde * v_rf, v_rf.adjoint() * v_rf,
                                    std::span<const CMat>(&hv, 1), power, rate_target, noise)
      .r[0];
}

double design_rate(const Scenario& s, const HybridDesign& d) {
  const auto x = d.transmit_covariances(s.arrays.n_tx);
  return average_rate(s.channel.response, x, s.noise_comm);
}

namespace {

struct Engine {
  const Scenario& s;
  const IsacAoOptions& o;
  const PcrbModel& opt;
  std::vector<CMat> h;

  CMat tx(const HybridDesign& d) const { return d.analog_tx(s.arrays.n_tx); }

  // Optimal digital covariances for the analog part of d; throws InfeasibleError.
  std::vector<CMat> solve_digital(const CMat& a, const HybridDesign& d) const {
    const CMat v = tx(d);
    std::vector<CMat> hv;
    for (const auto& hk : h) hv.push_back(hk * v);
    return rate_constrained_trace_max(v.adjoint() * a * v, v.adjoint() * v, hv, s.power,
                                      s.rate_target, s.noise_comm)
        .r;
  }

  bool feasible(const HybridDesign& d) const {
    if (d.transmit_power(s.arrays.n_tx) > s.power * (1.0 + 1e-10) + 1e-12) return false;
    if (s.rate_target > 0.0 && design_rate(s, d) < s.rate_target - 1e-6) return false;
    return true;
  }

  double objective(const HybridDesign& d) const { return opt.pcrb(d); }
};

CVec random_phases(Rng& rng, Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::polar(1.0, rng.uniform_phase());
  return v;
}

HybridDesign random_realization(const Scenario& s, const IsacAoOptions& o, Rng& rng) {
  const auto& ar = s.arrays;
  HybridDesign d;
  switch (o.transmit) {
    case TransmitMode::Hybrid: {
      CMat v(ar.n_tx, ar.n_rf_tx);
      for (int c = 0; c < ar.n_rf_tx; ++c) v.col(c) = random_phases(rng, ar.n_tx);
      d.v_rf = v;
      break;
    }
    case TransmitMode::FixedAnalog:
      if (!o.fixed_v_rf) throw std::invalid_argument("fixed analog mode needs a transmit matrix");
      d.v_rf = *o.fixed_v_rf;
      break;
    case TransmitMode::FullyDigital:
      break;
  }
  switch (ar.rx_architecture) {
    case RxArchitecture::PartiallyConnected:
      d.rx = PartialPhases{random_phases(rng, ar.n_rx)};
      break;
    case RxArchitecture::FullyConnected: {
      std::vector<int> idx(ar.n_rx);
      for (int i = 0; i < ar.n_rx; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng.engine());
      idx.resize(ar.n_rf_rx);
      std::sort(idx.begin(), idx.end());
      d.rx = DftSelection{idx};
      break;
    }
    case RxArchitecture::FullyDigital:
      d.rx = DigitalReceive{};
      break;
  }
  return d;
}

// Phase-only projection of the strongest right singular directions of the
// pooled channel; used as one extra AO starting candidate.
CMat channel_matched_analog(const Scenario& s) {
  const auto& ar = s.arrays;
  CMat gram = CMat::Zero(ar.n_tx, ar.n_tx);
  for (const auto& h : s.channel.response) gram += h.adjoint() * h;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(gram));
  CMat v(ar.n_tx, ar.n_rf_tx);
  for (int c = 0; c < ar.n_rf_tx; ++c) {
    const CVec u = es.eigenvectors().col(ar.n_tx - 1 - (c % ar.n_tx));
    for (int i = 0; i < ar.n_tx; ++i) v(i, c) = std::abs(u[i]) > 0.0 ? u[i] / std::abs(u[i]) : cd(1.0);
  }
  return v;
}

HybridDesign init_impl(const Scenario& s, int n_rand, std::uint64_t seed, const IsacAoOptions& o,
                       const PcrbModel& opt, bool channel_matched = false) {
  if (n_rand < 1) throw std::invalid_argument("n_rand must be at least 1");
  Engine eng{s, o, opt, s.channel.response};
  Rng rng = Rng(seed).split("random-phase-init");
  std::optional<HybridDesign> best;
  double best_val = std::numeric_limits<double>::infinity();
  double best_rate = 0.0;
  for (int i = 0; i < n_rand; ++i) {
    HybridDesign d = random_realization(s, o, rng);
    const CMat a = opt.kernel().a1(combiner_matrix(d.rx, s.arrays));
    try {
      d.r_bb = eng.solve_digital(a, d);
    } catch (const InfeasibleError& e) {
      best_rate = std::max(best_rate, e.best_rate());
      continue;
    }
    const double val = eng.objective(d);
    if (val < best_val) {
      best_val = val;
      best = std::move(d);
    }
  }
  if (channel_matched && o.transmit == TransmitMode::Hybrid) {
    // Channel eigen-beams, and the same with the first column steered by the
    // principal sensing direction.
    const HybridDesign base = best ? *best : random_realization(s, o, rng);
    const CMat a = opt.kernel().a1(combiner_matrix(base.rx, s.arrays));
    const CMat matched = channel_matched_analog(s);
    CMat mixed = matched;
    const CVec u = top_eig(a).vector;
    for (int i = 0; i < s.arrays.n_tx; ++i) mixed(i, 0) = std::abs(u[i]) > 0.0 ? u[i] / std::abs(u[i]) : cd(1.0);
    for (const CMat* v : {&matched, static_cast<const CMat*>(&mixed)}) {
      HybridDesign d = base;
      d.v_rf = *v;
      try {
        d.r_bb = eng.solve_digital(a, d);
        const double val = eng.objective(d);
        if (val < best_val) {
          best_val = val;
          best = std::move(d);
        }
      } catch (const InfeasibleError& e) {
        best_rate = std::max(best_rate, e.best_rate());
      }
    }
  }
  if (!best) {
    throw InfeasibleError("no starting realization meets the rate target (best achievable " +
                              std::to_string(best_rate) + " nats/s/Hz)",
                          best_rate);
  }
  return *best;
}

}  // namespace

HybridDesign init_random_phase(const Scenario& s, int n_rand, std::uint64_t seed,
                               const IsacAoOptions& o) {
  const PcrbModel opt = o.point_angle ? PcrbModel(s, point_measure(*o.point_angle)) : PcrbModel(s);
  return init_impl(s, n_rand, seed, o, opt);
}

AoReport ao_isac(const Scenario& s, const IsacAoOptions& o) {
  const double t0 = now_ms();
  const PcrbModel truth(s);
  const PcrbModel opt = o.point_angle ? PcrbModel(s, point_measure(*o.point_angle)) : truth;
  Engine eng{s, o, opt, s.channel.response};
  const auto& ar = s.arrays;
  const int kk = s.channel.subcarriers();

  HybridDesign d;
  if (o.initial) {
    d = *o.initial;
    if (o.transmit == TransmitMode::FullyDigital) d.v_rf.reset();
    if (o.transmit == TransmitMode::FixedAnalog) d.v_rf = *o.fixed_v_rf;
    if (static_cast<int>(d.r_bb.size()) != kk || !eng.feasible(d)) {
      const CMat a = opt.kernel().a1(combiner_matrix(d.rx, ar));
      d.r_bb = eng.solve_digital(a, d);
    }
  } else {
    d = init_impl(s, o.n_rand, o.seed, o, opt, true);
  }

  AoReport rep;
  double cur = eng.objective(d);
  rep.trace.push_back(cur);
  auto try_commit = [&](HybridDesign& cand) {
    const double val = eng.objective(cand);
    if (val <= cur && eng.feasible(cand)) {
      d = std::move(cand);
      cur = val;
      return true;
    }
    return false;
  };

  bool use_fpp = o.run_fpp;
  for (int it = 1; it <= o.max_iters; ++it) {
    CMat a = opt.kernel().a1(combiner_matrix(d.rx, ar));
    const double start = cur;

    if (o.transmit == TransmitMode::Hybrid) {
      bool done = false;
      if (ar.n_rf_tx >= 2 && o.rank1_shortcut) {
        const EigPair e = top_eig(a);
        const HybridFactor hf = hybrid_from_rank1(std::sqrt(s.power) * e.vector, ar.n_rf_tx);
        HybridDesign cand = d;
        cand.v_rf = hf.v_rf;
        try {
          cand.r_bb = eng.solve_digital(a, cand);
          // The exact factorization reaches the fully-digital sensing optimum; if it
          // also meets the rate target nothing else can beat it for this combiner.
          const double ceiling = s.power * e.value;
          const bool sensing_opt = opt.sensing_trace(cand) >= ceiling * (1.0 - 1e-9);
          if (try_commit(cand) && sensing_opt) done = true;
        } catch (const InfeasibleError&) {
        }
      }
      if (!done && s.rate_target <= 0.0 && ar.n_rf_tx == 1) {
        HybridDesign cand = d;
        cand.v_rf = CMat(coordinate_update_transmit(d.v_rf->col(0), a));
        cand.r_bb.assign(kk, CMat::Zero(1, 1));
        cand.r_bb[0](0, 0) = s.power / ar.n_tx;
        try_commit(cand);
        done = true;
      }
      if (!done) {
        for (int round = 0; round < o.wmmse_rounds; ++round) {
          std::vector<WmmseAux> aux;
          for (int k = 0; k < kk; ++k)
            aux.push_back(wmmse_update(eng.h[k], *d.v_rf, digital_factor(d.r_bb[k]), s.noise_comm));
          const AnalogSubproblem sub =
              make_analog_subproblem(a, d.r_bb, aux, s.power, s.rate_target, ar.n_tx);
          HybridDesign cand = d;
          cand.v_rf = coordinate_update_isac(sub, *d.v_rf, o.phase_passes);
          if (use_fpp)
            cand.v_rf = fpp_sca_stacked(a, d.r_bb, aux, s.power, s.rate_target, *cand.v_rf, o.fpp).v_rf;
          try {
            cand.r_bb = eng.solve_digital(a, cand);
          } catch (const InfeasibleError&) {
            break;
          }
          const double before = cur;
          if (!try_commit(cand) || before - cur <= o.rel_tol * 1e-3 * before) break;
        }
        // Once FPP-SCA stops paying for itself, finish with the coordinate pass alone.
        if (use_fpp && start - cur < o.fpp_min_gain * start) use_fpp = false;
      }
    }

    {
      HybridDesign cand = d;
      try {
        cand.r_bb = eng.solve_digital(a, cand);
        try_commit(cand);
      } catch (const InfeasibleError&) {
      }
    }

    if (o.optimize_receive && !std::holds_alternative<DigitalReceive>(d.rx)) {
      HybridDesign cand = d;
      const CMat b = opt.kernel().b(cand.transmit_covariances(ar.n_tx));
      cand.rx = update_receive(ar, cand.rx, b);
      try_commit(cand);
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
  rep.pcrb = truth.pcrb(rep.design);
  rep.rate = design_rate(s, rep.design);
  rep.power = rep.design.transmit_power(ar.n_tx);
  rep.feasible = eng.feasible(rep.design);
  rep.wall_ms = now_ms() - t0;
  return rep;
}

AoReport ao_p1(const Scenario& s, const IsacAoOptions& o) {
  if (s.subcarriers != 1) throw std::invalid_argument("ao_p1 needs a narrowband scenario");
  return ao_isac(s, o);
}

}  // namespace isac
