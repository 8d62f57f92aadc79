// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/cvxkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

namespace isac {

namespace {

void fix_phase(CVec& x) {
  const double scale = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-8 * scale) {
      x *= std::conj(x[i]) / std::abs(x[i]);
      return;
    }
  }
}

// Columns of x span the top eigenspace and satisfy x^H b x = I.
CVec pick_in_eigenspace(const CMat& x, const CMat& b) {
  if (x.cols() == 1) {
    CVec v = x.col(0);
    fix_phase(v);
    return v;
  }
  const Eigen::Index n = x.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    CVec v = x * (x.adjoint() * b.col(k));  // B-orthogonal projection of e_k
    const double nrm = std::sqrt(std::max(0.0, v.dot(b * v).real()));
    if (nrm > 1e-8) {
      v /= nrm;
      fix_phase(v);
      return v;
    }
  }
  CVec v = x.col(0);
  fix_phase(v);
  return v;
}

}  // namespace

EigPair top_generalized_eig(const CMat& a, const CMat& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n)
    throw std::invalid_argument("generalized eigenproblem needs square matrices of equal size");
  Eigen::SelfAdjointEigenSolver<CMat> eb(hermitian_part(b), Eigen::EigenvaluesOnly);
  const double bmax = eb.eigenvalues().maxCoeff();
  if (!(eb.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, bmax)))
    throw std::invalid_argument("B is not positive definite");
  Eigen::LLT<CMat> llt(hermitian_part(b));
  const CMat l = llt.matrixL();
  CMat c = l.triangularView<Eigen::Lower>().solve(hermitian_part(a));
  c = l.triangularView<Eigen::Lower>().solve(CMat(c.adjoint()));
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(c));
  const RVec& ev = es.eigenvalues();
  const double top = ev[n - 1];
  const double tie = 1e-9 * std::max(1.0, std::abs(top));
  Eigen::Index first = n - 1;
  while (first > 0 && ev[first - 1] >= top - tie) --first;
  const CMat y = es.eigenvectors().rightCols(n - first);
  const CMat x = l.adjoint().triangularView<Eigen::Upper>().solve(y);
  return {top, pick_in_eigenspace(x, b)};
}

EigPair top_eig(const CMat& a) {
  return top_generalized_eig(a, CMat::Identity(a.rows(), a.cols()));
}

// ---------------------------------------------------------------------------
// Interior-point QCQP solver

namespace {

struct Con {
  Eigen::SparseMatrix<double> q;
  bool quad = false;
  RVec a;
  double b = 0.0;
  std::vector<int> supp;
};

struct Problem {
  int d = 0;
  RVec c;
  std::vector<Con> cons;
};

Con make_con(const QuadConstraint& qc, int d, int extra_dim) {
  Con k;
  const int n = d + extra_dim;
  k.a = RVec::Zero(n);
  if (qc.a.size() != 0) {
    if (qc.a.size() != d) throw std::invalid_argument("constraint linear term has wrong length");
    k.a.head(d) = qc.a;
  }
  k.b = qc.b;
  std::vector<char> mark(n, 0);
  for (int j = 0; j < d; ++j)
    if (k.a[j] != 0.0) mark[j] = 1;
  if (qc.q.rows() != 0 && qc.q.nonZeros() > 0) {
    if (qc.q.rows() != d || qc.q.cols() != d) throw std::invalid_argument("constraint quadratic term has wrong size");
    k.quad = true;
    k.q.resize(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < qc.q.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(qc.q, col); it; ++it) {
        trip.emplace_back(it.row(), it.col(), it.value());
        mark[it.row()] = 1;
        mark[it.col()] = 1;
      }
    k.q.setFromTriplets(trip.begin(), trip.end());
  }
  for (int j = 0; j < n; ++j)
    if (mark[j]) k.supp.push_back(j);
  return k;
}

double con_value(const Con& k, const RVec& x) {
  double v = k.b;
  for (int j : k.supp) v += k.a[j] * x[j];
  if (k.quad) v += x.dot(k.q * x);
  return v;
}

RVec con_grad(const Con& k, const RVec& x) {
  RVec g = k.a;
  if (k.quad) g += 2.0 * (k.q * x);
  return g;
}

struct IpmOut {
  RVec x, lam;
  int iters = 0;
  bool converged = false;
  bool stopped_early = false;
  std::string message;
};

double inf_norm(const RVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

IpmOut primal_dual(const Problem& pb, RVec x, double tol, int max_iters,
                   const std::function<bool(const RVec&, const RVec&)>& early_stop) {
  const int m = static_cast<int>(pb.cons.size());
  const int d = pb.d;
  IpmOut out;
  RVec f(m), lam(m);
  for (int i = 0; i < m; ++i) {
    f[i] = con_value(pb.cons[i], x);
    if (!(f[i] < 0.0)) {
      out.x = x;
      out.lam = RVec::Zero(m);
      out.message = "start is not strictly feasible";
      return out;
    }
    lam[i] = 1.0 / (-f[i]);
  }
  const double mu = 10.0, alpha = 0.01, shrink = 0.5;
  const double cnorm = 1.0 + inf_norm(pb.c);
  std::vector<RVec> g(m);
  double best_merit = std::numeric_limits<double>::infinity();
  int since_progress = 0;

  auto residual = [&](const RVec& xx, const RVec& ll, double t, RVec& ff, std::vector<RVec>& gg) {
    RVec rd = pb.c;
    double rc2 = 0.0;
    for (int i = 0; i < m; ++i) {
      ff[i] = con_value(pb.cons[i], xx);
      gg[i] = con_grad(pb.cons[i], xx);
      rd += ll[i] * gg[i];
      const double rc = -ll[i] * ff[i] - 1.0 / t;
      rc2 += rc * rc;
    }
    return std::sqrt(rd.squaredNorm() + rc2);
  };

  for (int it = 0; it < max_iters; ++it) {
    out.iters = it;
    for (int i = 0; i < m; ++i) g[i] = con_grad(pb.cons[i], x);
    const double eta = -f.dot(lam);
    RVec rd = pb.c;
    for (int i = 0; i < m; ++i) rd += lam[i] * g[i];
    const double obj = pb.c.dot(x);
    const double merit = std::max(inf_norm(rd) / cnorm, eta / (1.0 + std::abs(obj)));
    if (merit <= tol) {
      out.converged = true;
      break;
    }
    // Stop once the residuals sit at the rounding floor instead of burning the
    // iteration budget on steps that no longer change them.
    if (merit < 0.5 * best_merit) {
      best_merit = merit;
      since_progress = 0;
    } else if (++since_progress >= 10) {
      out.message = "residuals stagnated at " + std::to_string(merit);
      break;
    }
    const double t = mu * m / eta;

    RMat h = RMat::Zero(d, d);
    RVec rhs = -pb.c;
    for (int i = 0; i < m; ++i) {
      const Con& k = pb.cons[i];
      if (k.quad) {
        for (int col = 0; col < k.q.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator q(k.q, col); q; ++q)
            h(q.row(), q.col()) += 2.0 * lam[i] * q.value();
      }
      const double w = lam[i] / (-f[i]);
      for (int p : k.supp) {
        const double gp = w * g[i][p];
        if (gp == 0.0) continue;
        for (int q : k.supp) h(p, q) += gp * g[i][q];
      }
      const double coef = 1.0 / (t * f[i]);
      for (int p : k.supp) rhs[p] += coef * g[i][p];
    }
    RVec dx;
    {
      Eigen::LDLT<RMat> ldlt(h);
      dx = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        const double ridge = 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
        dx = (h + ridge * RMat::Identity(d, d)).ldlt().solve(rhs);
      }
      if (!dx.allFinite()) {
        out.message = "Newton system is singular";
        break;
      }
    }
    RVec dlam(m);
    for (int i = 0; i < m; ++i) {
      const double rc = -lam[i] * f[i] - 1.0 / t;
      dlam[i] = (rc - lam[i] * g[i].dot(dx)) / f[i];
    }
    double smax = 1.0;
    for (int i = 0; i < m; ++i)
      if (dlam[i] < 0.0) smax = std::min(smax, -lam[i] / dlam[i]);
    double s = 0.99 * smax;
    RVec xn(d), ln(m), fn(m);
    for (int bt = 0; bt < 100; ++bt) {
      xn = x + s * dx;
      bool ok = true;
      for (int i = 0; i < m && ok; ++i) ok = con_value(pb.cons[i], xn) < 0.0;
      if (ok) break;
      s *= shrink;
    }
    std::vector<RVec> gn(m);
    const double r0 = residual(x, lam, t, fn, gn);
    for (int bt = 0; bt < 60; ++bt) {
      xn = x + s * dx;
      ln = lam + s * dlam;
      const double r1 = residual(xn, ln, t, fn, gn);
      bool feas = true;
      for (int i = 0; i < m && feas; ++i) feas = fn[i] < 0.0;
      if (feas && r1 <= (1.0 - alpha * s) * r0) break;
      s *= shrink;
    }
    xn = x + s * dx;
    ln = lam + s * dlam;
    for (int i = 0; i < m; ++i) fn[i] = con_value(pb.cons[i], xn);
    bool feas = true;
    for (int i = 0; i < m && feas; ++i) feas = fn[i] < 0.0;
    if (!feas || s < 1e-14) {
      out.message = "line search stalled";
      out.iters = it + 1;
      break;
    }
    x = xn;
    lam = ln.cwiseMax(1e-300);
    f = fn;
    out.iters = it + 1;
    if (early_stop && early_stop(x, f)) {
      out.stopped_early = true;
      break;
    }
  }
  if (!out.converged && !out.stopped_early && out.message.empty())
    out.message = "iteration limit reached";
  out.x = x;
  out.lam = lam;
  return out;
}

}  // namespace

SolverReport solve_convex_qcqp(const ConvexQcqp& qp, double tol, int max_iters) {
  const int d = qp.dim;
  if (d < 1 || qp.objective.size() != d) throw std::invalid_argument("QCQP objective has wrong length");
  std::vector<QuadConstraint> all = qp.constraints;
  for (int j = 0; j < d && j < static_cast<int>(qp.nonnegative.size()); ++j) {
    if (!qp.nonnegative[j]) continue;
    QuadConstraint bnd;
    bnd.a = RVec::Zero(d);
    bnd.a[j] = -1.0;
    all.push_back(bnd);
  }
  const int m = static_cast<int>(all.size());

  Problem pb;
  pb.d = d;
  pb.c = qp.objective;
  for (const auto& qc : all) pb.cons.push_back(make_con(qc, d, 0));

  SolverReport rep;
  RVec x = qp.start ? *qp.start : RVec(RVec::Zero(d));
  if (x.size() != d) throw std::invalid_argument("QCQP start has wrong length");
  int iters = 0;

  // A start that sits on (or within rounding of) a constraint boundary gives huge
  // initial multipliers and stalls the Newton steps, so such starts are first
  // pushed inward by phase I.
  std::vector<double> margin(m);
  for (int i = 0; i < m; ++i) margin[i] = 1e-6 * (1.0 + std::abs(pb.cons[i].b));
  double fmax = -std::numeric_limits<double>::infinity();
  bool centred = true;
  for (int i = 0; i < m; ++i) {
    const double fi = con_value(pb.cons[i], x);
    fmax = std::max(fmax, fi);
    if (!(fi < -margin[i])) centred = false;
  }
  if (m == 0) {
    rep.x = x;
    rep.message = "no constraints: objective unbounded unless zero";
    rep.success = pb.c.norm() == 0.0;
    return rep;
  }
  if (!centred) {
    // Phase I: minimize s s.t. f_i(x) <= s, s >= -1.
    Problem p1;
    p1.d = d + 1;
    p1.c = RVec::Zero(d + 1);
    p1.c[d] = 1.0;
    for (const auto& qc : all) {
      Con k = make_con(qc, d, 1);
      k.a[d] = -1.0;
      k.supp.push_back(d);
      p1.cons.push_back(std::move(k));
    }
    {
      Con k;
      k.a = RVec::Zero(d + 1);
      k.a[d] = -1.0;
      k.b = -1.0;
      k.supp = {d};
      p1.cons.push_back(std::move(k));
    }
    RVec x1(d + 1);
    x1.head(d) = x;
    x1[d] = fmax + 1.0;
    auto inside = [&](const RVec& xx) {
      for (int i = 0; i < m; ++i)
        if (!(con_value(pb.cons[i], xx.head(d)) < -margin[i])) return false;
      return true;
    };
    auto stop = [&](const RVec& xx, const RVec&) { return inside(xx); };
    IpmOut ph1 = primal_dual(p1, x1, tol, max_iters, stop);
    iters += ph1.iters;
    bool strictly = ph1.stopped_early;
    if (!strictly) {
      strictly = true;
      for (const auto& k : pb.cons) strictly = strictly && con_value(k, ph1.x.head(d)) < 0.0;
    }
    if (!strictly && fmax < 0.0) {
      ph1.x.head(d) = x;  // phase I made no progress; keep the original interior start
      strictly = true;
    }
    if (!strictly) {
      rep.x = ph1.x.head(d);
      rep.multipliers = RVec::Zero(m);
      rep.iterations = iters;
      rep.objective = pb.c.dot(rep.x);
      double viol = 0.0;
      for (const auto& k : pb.cons) viol = std::max(viol, con_value(k, rep.x));
      rep.max_violation = viol;
      rep.kkt_residual = std::numeric_limits<double>::infinity();
      rep.message = "no strictly feasible point found";
      return rep;
    }
    x = ph1.x.head(d);
  }

  IpmOut ph2 = primal_dual(pb, x, tol, max_iters, {});
  iters += ph2.iters;
  rep.x = ph2.x;
  rep.multipliers = ph2.lam;
  rep.iterations = iters;
  rep.objective = pb.c.dot(ph2.x);
  RVec stat = pb.c;
  double viol = 0.0, comp = 0.0;
  for (int i = 0; i < m; ++i) {
    const double fi = con_value(pb.cons[i], ph2.x);
    viol = std::max(viol, fi);
    comp += std::abs(ph2.lam[i] * fi);
    stat += ph2.lam[i] * con_grad(pb.cons[i], ph2.x);
  }
  rep.max_violation = std::max(0.0, viol);
  rep.kkt_residual = std::max(inf_norm(stat) / (1.0 + inf_norm(pb.c)),
                              comp / (1.0 + std::abs(rep.objective)));
  rep.success = ph2.converged && rep.max_violation <= tol && rep.kkt_residual <= tol;
  rep.message = rep.success ? "converged" : (ph2.message.empty() ? "tolerance not met" : ph2.message);
  return rep;
}

// ---------------------------------------------------------------------------
// Rates, water-filling and the dual digital-beamforming solver

double log_det_rate(const CMat& h, const CMat& x, double noise) {
  const Eigen::Index n = h.rows();
  CMat m = CMat::Identity(n, n) + h * x * h.adjoint() / noise;
  Eigen::LDLT<CMat> ldlt(hermitian_part(m));
  double r = 0.0;
  const auto dvec = ldlt.vectorD();
  for (Eigen::Index i = 0; i < dvec.size(); ++i) r += std::log(dvec[i].real());
  return r;
}

double average_rate(std::span<const CMat> h, std::span<const CMat> x, double noise) {
  if (h.size() != x.size()) throw std::invalid_argument("channel and covariance counts differ");
  double r = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) r += log_det_rate(h[k], x[k], noise);
  return r / static_cast<double>(h.size());
}

RVec waterfill(const RVec& gains, double power) {
  const Eigen::Index n = gains.size();
  RVec p = RVec::Zero(n);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (gains[i] > 0.0) idx.push_back(i);
  if (idx.empty() || power <= 0.0) return p;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return gains[a] > gains[b]; });
  double inv_sum = 0.0, level = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    inv_sum += 1.0 / gains[idx[k]];
    const double nu = (power + inv_sum) / double(k + 1);
    if (nu > 1.0 / gains[idx[k]]) {
      level = nu;
      active = k + 1;
    } else {
      break;
    }
  }
  for (std::size_t k = 0; k < active; ++k) p[idx[k]] = std::max(0.0, level - 1.0 / gains[idx[k]]);
  return p;
}

namespace {

struct Reduced {
  CMat t;                  // original = t * reduced
  CMat abar;               // t^H A t
  std::vector<CMat> hbar;  // H_k t
};

Reduced reduce(const CMat& a_eff, const CMat& gram, std::span<const CMat> h_eff) {
  const Eigen::Index r = gram.rows();
  if (gram.cols() != r || a_eff.rows() != r || a_eff.cols() != r)
    throw std::invalid_argument("A_eff and G_eff must be square of equal size");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(gram));
  const double gmax = es.eigenvalues().maxCoeff();
  if (!(gmax > 0.0)) throw std::invalid_argument("G_eff has no positive eigenvalue");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < r; ++i)
    if (es.eigenvalues()[i] > 1e-10 * gmax) keep.push_back(i);
  Reduced rd;
  rd.t.resize(r, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    rd.t.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
  rd.abar = hermitian_part(rd.t.adjoint() * a_eff * rd.t);
  for (const auto& h : h_eff) {
    if (h.cols() != r) throw std::invalid_argument("H_eff columns must match G_eff size");
    rd.hbar.push_back(h * rd.t);
  }
  return rd;
}

// Water-filling over all eigenmodes of all sub-carrier channels in the reduced space.
std::vector<CMat> capacity_solution(const Reduced& rd, double power, double noise, double* rate) {
  const std::size_t kk = rd.hbar.size();
  const Eigen::Index s = rd.t.cols();
  std::vector<Eigen::SelfAdjointEigenSolver<CMat>> es;
  RVec gains(static_cast<Eigen::Index>(kk) * s);
  for (std::size_t k = 0; k < kk; ++k) {
    es.emplace_back(hermitian_part(rd.hbar[k].adjoint() * rd.hbar[k]));
    for (Eigen::Index i = 0; i < s; ++i)
      gains[k * s + i] = std::max(0.0, es[k].eigenvalues()[i]) / noise;
  }
  const RVec p = waterfill(gains, power);
  std::vector<CMat> out;
  double r = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    const RVec pk = p.segment(k * s, s);
    out.push_back(es[k].eigenvectors() * pk.asDiagonal() * es[k].eigenvectors().adjoint());
    for (Eigen::Index i = 0; i < s; ++i) r += std::log1p(pk[i] * gains[k * s + i]);
  }
  if (rate) *rate = r / double(kk);
  return out;
}

struct DualPoint {
  std::vector<CMat> s;
  double trace = 0.0;
  double rate = 0.0;
};

class DualSolver {
 public:
  DualSolver(const Reduced& rd, double noise) : rd_(rd), noise_(noise) {
    Eigen::SelfAdjointEigenSolver<CMat> es(rd.abar);
    lam_ = es.eigenvalues();
    u_ = es.eigenvectors();
    top_ = lam_[lam_.size() - 1];
  }
  double top() const { return top_; }

  // Stationary point of the Lagrangian for rate weight beta and mu = top + delta.
  DualPoint eval(double beta, double delta) const {
    const double w = beta / double(rd_.hbar.size());
    const Eigen::Index n = lam_.size();
    RVec dq(n);
    for (Eigen::Index i = 0; i < n; ++i) dq[i] = std::sqrt(w / ((top_ - lam_[i]) + delta));
    const CMat qh = u_ * dq.asDiagonal() * u_.adjoint();
    DualPoint dp;
    for (const auto& h : rd_.hbar) {
      const CMat kq = h * qh;
      Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(kq.adjoint() * kq));
      RVec sp(n);
      double r = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ht = es.eigenvalues()[i];
        sp[i] = ht > noise_ ? 1.0 - noise_ / ht : 0.0;
        if (ht > noise_) r += std::log(ht / noise_);
      }
      CMat s = qh * es.eigenvectors() * sp.asDiagonal() * es.eigenvectors().adjoint() * qh;
      dp.trace += s.trace().real();
      dp.rate += r;
      dp.s.push_back(std::move(s));
    }
    dp.rate /= double(rd_.hbar.size());
    return dp;
  }

  // Power-feasible point for a given beta: sum_k tr S_k = power.
  DualPoint at_power(double beta, double power) const {
    const double scale = 1.0 + std::abs(top_);
    const double floor = 1e-15 * scale;
    double hi = 1e-3 * scale;
    while (eval(beta, hi).trace > power && hi < 1e300) hi *= 10.0;
    double lo = std::min(hi, 1e-3 * scale);
    while (lo > floor && eval(beta, lo).trace < power) lo /= 10.0;
    DualPoint dp = eval(beta, std::max(lo, floor));
    if (dp.trace < power) {
      // The top sensing direction is invisible to the channel; park the rest there.
      const CVec u1 = u_.col(u_.cols() - 1);
      dp.s[0] += (power - dp.trace) * (u1 * u1.adjoint());
      dp.trace = power;
      mu_ = top_;
      return dp;
    }
    if (lo == hi) return dp;
    auto fn = [&](double logd) { return eval(beta, std::exp(logd)).trace - power; };
    boost::uintmax_t iters = 200;
    const auto br = boost::math::tools::toms748_solve(
        fn, std::log(lo), std::log(hi), boost::math::tools::eps_tolerance<double>(52), iters);
    // Lower delta end gives trace >= power; scale down to exactly power.
    const double d = std::exp(br.first);
    dp = eval(beta, d);
    if (dp.trace > power) {
      const double f = power / dp.trace;
      for (auto& s : dp.s) s *= f;
      dp.trace = power;
      // The rate decreases slightly after scaling; recompute below by caller.
    }
    mu_ = top_ + d;
    return dp;
  }

  double last_mu() const { return mu_; }

 private:
  const Reduced& rd_;
  double noise_;
  RVec lam_;
  CMat u_;
  double top_;
  mutable double mu_ = 0.0;
};

double reduced_rate(const Reduced& rd, const std::vector<CMat>& s, double noise) {
  return average_rate(rd.hbar, s, noise);
}

}  // namespace

double capacity(const CMat& gram, std::span<const CMat> h_eff, double power, double noise) {
  const Reduced rd = reduce(CMat::Zero(gram.rows(), gram.cols()), gram, h_eff);
  double r = 0.0;
  capacity_solution(rd, power, noise, &r);
  return r;
}

DigitalSolution rate_constrained_trace_max(const CMat& a_eff, const CMat& gram,
                                           std::span<const CMat> h_eff, double power,
                                           double rate_target, double noise) {
  if (!(power > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (!(noise > 0.0)) throw std::invalid_argument("noise power must be positive");
  if (h_eff.empty()) throw std::invalid_argument("at least one channel is required");
  const Reduced rd = reduce(a_eff, gram, h_eff);
  const std::size_t kk = rd.hbar.size();
  const Eigen::Index s = rd.t.cols();

  auto finish = [&](std::vector<CMat> red, double beta, double mu, bool sensing) {
    DigitalSolution sol;
    for (auto& x : red) sol.r.push_back(hermitian_part(rd.t * x * rd.t.adjoint()));
    sol.power = 0.0;
    sol.objective = 0.0;
    for (const auto& r : sol.r) {
      sol.power += (gram * r).trace().real();
      sol.objective += (a_eff * r).trace().real();
    }
    if (sol.power > power) {
      const double f = power / sol.power;
      for (auto& r : sol.r) r *= f;
      sol.objective *= f;
      sol.power = power;
    }
    sol.rate = average_rate(h_eff, sol.r, noise);
    sol.beta = beta;
    sol.mu = mu;
    sol.sensing_branch = sensing;
    return sol;
  };

  auto zero_list = [&]() {
    return std::vector<CMat>(kk, CMat::Zero(s, s));
  };

  if (rd.abar.norm() == 0.0) {
    double cap = 0.0;
    auto red = capacity_solution(rd, power, noise, &cap);
    if (cap < rate_target)
      throw InfeasibleError("rate target exceeds the achievable rate", cap);
    return finish(std::move(red), 0.0, 0.0, false);
  }

  const EigPair top = top_eig(rd.abar);
  const CMat u1u1 = top.vector * top.vector.adjoint();
  {
    auto red = zero_list();
    red[0] = power * u1u1;
    if (rate_target <= 0.0 || reduced_rate(rd, red, noise) >= rate_target)
      return finish(std::move(red), 0.0, top.value, true);
    if (kk > 1) {
      RVec g(static_cast<Eigen::Index>(kk));
      for (std::size_t k = 0; k < kk; ++k) g[k] = (rd.hbar[k] * top.vector).squaredNorm() / noise;
      const RVec p = waterfill(g, power);
      double r = 0.0;
      for (std::size_t k = 0; k < kk; ++k) r += std::log1p(p[k] * g[k]);
      if (r / double(kk) >= rate_target) {
        for (std::size_t k = 0; k < kk; ++k) red[k] = p[k] * u1u1;
        return finish(std::move(red), 0.0, top.value, true);
      }
    }
  }

  double cap = 0.0;
  auto cap_sol = capacity_solution(rd, power, noise, &cap);
  if (cap < rate_target) throw InfeasibleError("rate target exceeds the achievable rate", cap);

  DualSolver ds(rd, noise);
  const double b0 = 1.0 + std::abs(ds.top());
  auto rate_at = [&](double beta) {
    DualPoint dp = ds.at_power(beta, power);
    return reduced_rate(rd, dp.s, noise);
  };
  double lo = b0, hi = b0;
  int guard = 0;
  while (rate_at(lo) > rate_target && guard++ < 80) lo /= 10.0;
  guard = 0;
  while (rate_at(hi) < rate_target && guard++ < 80) hi *= 10.0;
  if (rate_at(hi) < rate_target) return finish(std::move(cap_sol), 0.0, 0.0, false);
  if (rate_at(lo) >= rate_target) {
    DualPoint dp = ds.at_power(lo, power);
    return finish(std::move(dp.s), lo, ds.last_mu(), false);
  }
  auto fn = [&](double logb) { return rate_at(std::exp(logb)) - rate_target; };
  boost::uintmax_t iters = 300;
  const auto br = boost::math::tools::toms748_solve(
      fn, std::log(lo), std::log(hi), boost::math::tools::eps_tolerance<double>(52), iters);
  const double beta = std::exp(br.second);
  DualPoint dp = ds.at_power(beta, power);
  return finish(std::move(dp.s), beta, ds.last_mu(), false);
}

}  // namespace isac
