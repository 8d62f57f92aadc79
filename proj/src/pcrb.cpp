// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/pcrb.hpp"

#include <cmath>

namespace isac {

Eigen::Matrix3d Pfim::assembled() const {
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  f(0, 0) = j_theta_theta + f_p_theta;
  f.block<1, 2>(0, 1) = j_theta_alpha;
  f.block<2, 1>(1, 0) = j_theta_alpha.transpose();
  f.block<2, 2>(1, 1) = j_alpha_alpha + f_p_alpha;
  return f;
}

double pcrb_theta(const Pfim& p) {
  if (p.j_theta_alpha.cwiseAbs().maxCoeff() == 0.0) {
    const double f = p.f_p_theta + p.j_theta_theta;
    if (!(f > 0.0)) throw std::domain_error("posterior Fisher information is singular");
    return 1.0 / f;
  }
  return pcrb_theta_full_inverse(p);
}

double pcrb_theta_full_inverse(const Pfim& p) {
  const Eigen::Matrix3d f = p.assembled();
  Eigen::FullPivLU<Eigen::Matrix3d> lu(f);
  if (!lu.isInvertible()) throw std::domain_error("posterior Fisher information is singular");
  return lu.inverse()(0, 0);
}

PcrbModel::PcrbModel(const Scenario& s)
    : PcrbModel(s, weight_by_prior(make_prior_grid(s.angle_prior, s.quadrature_points),
                                   s.angle_prior)) {}

PcrbModel::PcrbModel(const Scenario& s, PriorMeasure measure)
    : arrays_(s.arrays),
      symbols_(s.symbols),
      gamma_(s.reflection.gamma),
      noise_(s.noise_sense) {
  f_p_ = prior_fisher_theta(s.angle_prior, make_prior_grid(s.angle_prior, s.quadrature_points));
  kernel_ = std::make_shared<SensingKernel>(s.arrays.n_tx, s.arrays.n_rx, std::move(measure));
}

double PcrbModel::gain(const RxDescriptor& rx) const {
  return 2.0 * symbols_ * gamma_ / (combiner_noise_gain(rx, arrays_) * noise_);
}

double PcrbModel::sensing_trace(const HybridDesign& d) const {
  const CMat a1 = kernel_->a1(combiner_matrix(d.rx, arrays_));
  double t = 0.0;
  for (const auto& x : d.transmit_covariances(arrays_.n_tx)) t += (a1 * x).trace().real();
  return t;
}

double PcrbModel::j_theta(const HybridDesign& d) const { return gain(d.rx) * sensing_trace(d); }

double PcrbModel::pcrb(const HybridDesign& d) const { return 1.0 / (f_p_ + j_theta(d)); }

Pfim PcrbModel::pfim(const HybridDesign& d) const {
  const CMat w = combiner_matrix(d.rx, arrays_);
  const CMat a1 = kernel_->a1(w), a2 = kernel_->a2(w);
  double t1 = 0.0, t2 = 0.0;
  for (const auto& x : d.transmit_covariances(arrays_.n_tx)) {
    t1 += (a1 * x).trace().real();
    t2 += (a2 * x).trace().real();
  }
  const double c = combiner_noise_gain(d.rx, arrays_);
  Pfim p;
  p.j_theta_theta = gain(d.rx) * t1;
  p.j_alpha_alpha = (2.0 * symbols_ / (c * noise_) * t2) * Eigen::Matrix2d::Identity();
  p.f_p_theta = f_p_;
  p.f_p_alpha = gamma_ > 0.0 ? Eigen::Matrix2d((2.0 / gamma_) * Eigen::Matrix2d::Identity())
                             : Eigen::Matrix2d(Eigen::Matrix2d::Constant(0.0));
  return p;
}

Pfim assemble_pfim(const Scenario& s, const HybridDesign& d) {
  validate_design(s.arrays, d, static_cast<int>(d.r_bb.size()));
  return PcrbModel(s).pfim(d);
}

double pcrb_fully_connected(const Scenario& s, const HybridDesign& d) {
  if (!std::holds_alternative<DftSelection>(d.rx))
    throw std::invalid_argument("fully-connected PCRB needs a DFT-selection receiver");
  const CMat w = combiner_matrix(d.rx, s.arrays);
  const CMat g = w.adjoint() * w;
  if ((g - s.arrays.n_rx * CMat::Identity(g.rows(), g.cols())).norm() > 1e-9 * s.arrays.n_rx)
    throw std::invalid_argument("combiner columns are not orthogonal with norm^2 n_rx");
  return PcrbModel(s).pcrb(d);
}

PfimEstimate fim_oracle(const Scenario& s, const HybridDesign& d, int mc_samples, double fd_step,
                        std::uint64_t seed) {
  if (mc_samples < 1000) throw std::invalid_argument("fim_oracle needs at least 1e3 samples");
  if (!(fd_step > 0.0 && fd_step <= 1e-3)) throw std::invalid_argument("fd_step must be in (0, 1e-3]");
  const auto& ar = s.arrays;
  const CMat wh = combiner_matrix(d.rx, ar).adjoint();
  const double c = combiner_noise_gain(d.rx, ar);
  CMat x = CMat::Zero(ar.n_tx, ar.n_tx);
  for (const auto& xk : d.transmit_covariances(ar.n_tx)) x += xk;
  const double scale = 2.0 * s.symbols / (c * s.noise_sense);

  Rng rng = Rng(seed).split("fim-oracle");
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero(), sum2 = Eigen::Matrix3d::Zero();
  auto steer_m = [&](double t) -> CMat {
    const double tc = std::clamp(t, -kPi / 2, kPi / 2);
    return steering_vector(ar.n_rx, tc) * steering_vector(ar.n_tx, tc).adjoint();
  };
  for (int i = 0; i < mc_samples; ++i) {
    const double theta = s.angle_prior.sample(rng.engine());
    const cd alpha = rng.complex_normal(s.reflection.gamma);
    const CMat m0 = wh * steer_m(theta);
    const CMat md = wh * ((steer_m(theta + fd_step) - steer_m(theta - fd_step)) / (2.0 * fd_step));
    const CMat du[3] = {alpha * md, m0, kJ * m0};
    CMat dux[3];
    for (int a = 0; a < 3; ++a) dux[a] = du[a] * x;
    Eigen::Matrix3d f;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        f(a, b) = scale * (dux[a].cwiseProduct(du[b].conjugate())).sum().real();
    sum += f;
    sum2 += f.cwiseProduct(f);
  }
  PfimEstimate e;
  const double n = mc_samples;
  e.mean = sum / n;
  const Eigen::Matrix3d var = (sum2 / n - e.mean.cwiseProduct(e.mean)) * (n / (n - 1.0));
  e.stderr = (var.cwiseMax(0.0) / n).cwiseSqrt();
  return e;
}

}  // namespace isac
