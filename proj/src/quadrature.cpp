// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace isac {

namespace {

constexpr int kOrder = 20;

void gauss_rule(std::vector<double>& x, std::vector<double>& w) {
  using rule = boost::math::quadrature::gauss<double, kOrder>;
  const auto& ax = rule::abscissa();
  const auto& wt = rule::weights();
  x.clear();
  w.clear();
  for (std::size_t i = ax.size(); i-- > 0;) {
    if (ax[i] == 0.0) continue;
    x.push_back(-ax[i]);
    w.push_back(wt[i]);
  }
  for (std::size_t i = 0; i < ax.size(); ++i) {
    x.push_back(ax[i]);
    w.push_back(wt[i]);
  }
}

}  // namespace

QuadratureGrid make_prior_grid(const GmmAnglePrior& prior, int total_points, double lo,
                               double hi) {
  if (!(hi > lo)) throw std::invalid_argument("quadrature domain is empty");
  const int panels = std::max(4, total_points / kOrder);
  const auto& comps = prior.components();
  const int background = std::max(2, panels / 4);
  const int per_comp = std::max(2, (panels - background) / static_cast<int>(comps.size()));

  std::vector<double> brk;
  for (int i = 0; i <= background; ++i) brk.push_back(lo + (hi - lo) * i / background);
  for (const auto& c : comps) {
    const double s = std::sqrt(c.variance);
    const double a = std::max(lo, c.mean - 8.0 * s), b = std::min(hi, c.mean + 8.0 * s);
    if (!(b > a)) continue;
    for (int i = 0; i <= per_comp; ++i) brk.push_back(a + (b - a) * i / per_comp);
  }
  std::sort(brk.begin(), brk.end());
  std::vector<double> uniq;
  for (double v : brk)
    if (uniq.empty() || v - uniq.back() > 1e-12 * (hi - lo)) uniq.push_back(v);
  uniq.back() = hi;

  std::vector<double> gx, gw;
  gauss_rule(gx, gw);
  QuadratureGrid g;
  g.lo = lo;
  g.hi = hi;
  for (std::size_t p = 0; p + 1 < uniq.size(); ++p) {
    const double a = uniq[p], b = uniq[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      g.nodes.push_back(mid + half * gx[i]);
      g.weights.push_back(half * gw[i]);
    }
  }
  return g;
}

PriorMeasure weight_by_prior(const QuadratureGrid& grid, const GmmAnglePrior& prior) {
  PriorMeasure m;
  m.theta = grid.nodes;
  m.mass.resize(grid.nodes.size());
  for (std::size_t j = 0; j < grid.nodes.size(); ++j)
    m.mass[j] = grid.weights[j] * prior.density(grid.nodes[j]);
  return m;
}

PriorMeasure point_measure(double theta) { return PriorMeasure{{theta}, {1.0}}; }

double prior_fisher_theta(const GmmAnglePrior& prior, const QuadratureGrid& grid) {
  double f = 0.0;
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    const double p = prior.density(grid.nodes[j]);
    if (p == 0.0) continue;
    const double s = prior.score(grid.nodes[j]);
    const double term = grid.weights[j] * p * s * s;
    if (!std::isfinite(term)) throw std::domain_error("prior Fisher integrand is not finite");
    f += term;
  }
  return f;
}

SensingKernel::SensingKernel(int n_tx, int n_rx, PriorMeasure measure)
    : n_tx_(n_tx), n_rx_(n_rx), measure_(std::move(measure)) {
  const auto n = static_cast<Eigen::Index>(measure_.theta.size());
  tx_pairs_.resize(n_tx, 2 * n);
  rx_pairs_.resize(n_rx, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = measure_.theta[j];
    tx_pairs_.col(2 * j) = steering_vector(n_tx, t);
    tx_pairs_.col(2 * j + 1) = steering_derivative(n_tx, t);
    rx_pairs_.col(2 * j) = steering_derivative(n_rx, t);
    rx_pairs_.col(2 * j + 1) = steering_vector(n_rx, t);
  }
}

CMat SensingKernel::a1(const CMat& combiner) const {
  if (combiner.rows() != n_rx_) throw std::invalid_argument("combiner row count must equal n_rx");
  const CMat g = combiner.adjoint() * rx_pairs_;  // [W^H bdot, W^H b] per node
  const auto n = static_cast<Eigen::Index>(measure_.theta.size());
  CMat t(n_tx_, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = measure_.mass[j];
    const auto g1 = g.col(2 * j), g0 = g.col(2 * j + 1);
    const cd c11 = w * g1.squaredNorm(), c22 = w * g0.squaredNorm();
    const cd c12 = w * g1.dot(g0);  // g1^H g0
    const auto a = tx_pairs_.col(2 * j), ad = tx_pairs_.col(2 * j + 1);
    t.col(2 * j) = a * c11 + ad * std::conj(c12);
    t.col(2 * j + 1) = a * c12 + ad * c22;
  }
  return hermitian_part(t * tx_pairs_.adjoint());
}

CMat SensingKernel::a2(const CMat& combiner) const {
  if (combiner.rows() != n_rx_) throw std::invalid_argument("combiner row count must equal n_rx");
  const auto n = static_cast<Eigen::Index>(measure_.theta.size());
  CMat t(n_tx_, n), a(n_tx_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g = (combiner.adjoint() * rx_pairs_.col(2 * j + 1)).squaredNorm();
    a.col(j) = tx_pairs_.col(2 * j);
    t.col(j) = a.col(j) * (measure_.mass[j] * g);
  }
  return hermitian_part(t * a.adjoint());
}

CMat SensingKernel::b(std::span<const CMat> tx_covariances) const {
  CMat x = CMat::Zero(n_tx_, n_tx_);
  for (const auto& xk : tx_covariances) {
    if (xk.rows() != n_tx_ || xk.cols() != n_tx_)
      throw std::invalid_argument("transmit covariance must be n_tx x n_tx");
    x += xk;
  }
  return b(x);
}

CMat SensingKernel::b(const CMat& x) const {
  if (x.rows() != n_tx_ || x.cols() != n_tx_)
    throw std::invalid_argument("transmit covariance must be n_tx x n_tx");
  const CMat xy = x * tx_pairs_;
  const auto n = static_cast<Eigen::Index>(measure_.theta.size());
  CMat t(n_rx_, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = measure_.mass[j];
    const auto a = tx_pairs_.col(2 * j), ad = tx_pairs_.col(2 * j + 1);
    const cd c11 = w * a.dot(xy.col(2 * j));       // a^H X a
    const cd c12 = w * a.dot(xy.col(2 * j + 1));   // a^H X adot
    const cd c22 = w * ad.dot(xy.col(2 * j + 1));  // adot^H X adot
    const auto bd = rx_pairs_.col(2 * j), bb = rx_pairs_.col(2 * j + 1);
    t.col(2 * j) = bd * c11 + bb * std::conj(c12);
    t.col(2 * j + 1) = bd * c12 + bb * c22;
  }
  return hermitian_part(t * rx_pairs_.adjoint());
}

std::pair<CMat, CMat> compute_A_matrices(const ArrayConfig& arrays, const GmmAnglePrior& prior,
                                         const CMat& combiner, const QuadratureGrid& grid) {
  SensingKernel k(arrays.n_tx, arrays.n_rx, weight_by_prior(grid, prior));
  return {k.a1(combiner), k.a2(combiner)};
}

CMat compute_B_matrix(const ArrayConfig& arrays, const GmmAnglePrior& prior, const CMat& v_rf,
                      std::span<const CMat> r_bb, const QuadratureGrid& grid) {
  if (v_rf.rows() != arrays.n_tx) throw std::invalid_argument("V_RF must have n_tx rows");
  SensingKernel k(arrays.n_tx, arrays.n_rx, weight_by_prior(grid, prior));
  std::vector<CMat> x;
  for (const auto& r : r_bb) {
    if (r.rows() != v_rf.cols() || r.cols() != v_rf.cols())
      throw std::invalid_argument("R_BB size must match V_RF columns");
    x.push_back(v_rf * r * v_rf.adjoint());
  }
  return k.b(x);
}

}  // namespace isac
