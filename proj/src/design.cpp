// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace isac {

CMat HybridDesign::analog_tx(int n_tx) const {
  return v_rf ? *v_rf : CMat(CMat::Identity(n_tx, n_tx));
}

std::vector<CMat> HybridDesign::transmit_covariances(int n_tx) const {
  std::vector<CMat> x;
  if (v_rf) {
    for (const auto& r : r_bb) x.push_back(*v_rf * r * v_rf->adjoint());
  } else {
    for (const auto& r : r_bb) {
      if (r.rows() != n_tx) throw std::invalid_argument("R_BB must be n_tx x n_tx without V_RF");
      x.push_back(r);
    }
  }
  return x;
}

double HybridDesign::transmit_power(int n_tx) const {
  double p = 0.0;
  for (const auto& x : transmit_covariances(n_tx)) p += x.trace().real();
  return p;
}

CVec dft_column(int n, int index) {
  CVec f(n);
  for (int j = 0; j < n; ++j) f[j] = std::polar(1.0, -2.0 * kPi * double(index) * double(j) / n);
  return f;
}

CMat combiner_matrix(const RxDescriptor& rx, const ArrayConfig& arrays) {
  const int n_rx = arrays.n_rx;
  if (const auto* p = std::get_if<PartialPhases>(&rx)) {
    if (p->d.size() != n_rx) throw std::invalid_argument("receive phase vector must have n_rx entries");
    const int m = arrays.rx_block_size();
    CMat w = CMat::Zero(n_rx, arrays.n_rf_rx);
    for (int c = 0; c < arrays.n_rf_rx; ++c)
      for (int i = 0; i < m; ++i) w(c * m + i, c) = std::conj(p->d[c * m + i]);
    return w;
  }
  if (const auto* s = std::get_if<DftSelection>(&rx)) {
    CMat w(n_rx, static_cast<Eigen::Index>(s->q.size()));
    for (std::size_t i = 0; i < s->q.size(); ++i) w.col(i) = dft_column(n_rx, s->q[i]);
    return w;
  }
  return CMat::Identity(n_rx, n_rx);
}

double combiner_noise_gain(const RxDescriptor& rx, const ArrayConfig& arrays) {
  if (std::holds_alternative<PartialPhases>(rx)) return arrays.rx_block_size();
  if (std::holds_alternative<DftSelection>(rx)) return arrays.n_rx;
  return 1.0;
}

RxDescriptor default_receive(const ArrayConfig& arrays) {
  switch (arrays.rx_architecture) {
    case RxArchitecture::PartiallyConnected:
      return PartialPhases{CVec::Ones(arrays.n_rx)};
    case RxArchitecture::FullyConnected: {
      DftSelection s;
      for (int i = 0; i < arrays.n_rf_rx; ++i) s.q.push_back(i);
      return s;
    }
    case RxArchitecture::FullyDigital:
      return DigitalReceive{};
  }
  return DigitalReceive{};
}

void validate_design(const ArrayConfig& arrays, const HybridDesign& d, int subcarriers) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  const int cols = d.v_rf ? static_cast<int>(d.v_rf->cols()) : arrays.n_tx;
  if (d.v_rf) {
    if (d.v_rf->rows() != arrays.n_tx) fail("v_rf must have n_tx rows");
    for (Eigen::Index i = 0; i < d.v_rf->size(); ++i)
      if (std::abs(std::abs((*d.v_rf)(i)) - 1.0) > 1e-9) fail("v_rf entries must be unit modulus");
  }
  if (static_cast<int>(d.r_bb.size()) != subcarriers) fail("r_bb must hold one matrix per sub-carrier");
  for (const auto& r : d.r_bb) {
    if (r.rows() != cols || r.cols() != cols) fail("r_bb size must match the transmit RF chains");
    if ((r - r.adjoint()).norm() > 1e-8 * (1.0 + r.norm())) fail("r_bb must be Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(r), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + r.norm())) fail("r_bb must be PSD");
  }
  if (const auto* p = std::get_if<PartialPhases>(&d.rx)) {
    if (p->d.size() != arrays.n_rx) fail("receive phase vector must have n_rx entries");
    for (Eigen::Index i = 0; i < p->d.size(); ++i)
      if (std::abs(std::abs(p->d[i]) - 1.0) > 1e-9) fail("receive phases must be unit modulus");
  } else if (const auto* s = std::get_if<DftSelection>(&d.rx)) {
    std::set<int> u(s->q.begin(), s->q.end());
    if (u.size() != s->q.size()) fail("DFT indices must be distinct");
    for (int q : s->q)
      if (q < 0 || q >= arrays.n_rx) fail("DFT index out of range");
  }
}

}  // namespace isac
