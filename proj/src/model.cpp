// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isac {

void ArrayConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (n_tx < 1) fail("arrays.n_tx must be positive");
  if (n_rx < 1) fail("arrays.n_rx must be positive");
  if (n_user < 1) fail("arrays.n_user must be positive");
  if (n_rf_tx < 1) fail("arrays.n_rf_tx must be positive");
  if (n_rf_rx < 1) fail("arrays.n_rf_rx must be positive");
  if (n_rf_tx > n_tx) fail("arrays.n_rf_tx must not exceed arrays.n_tx");
  if (n_rf_rx > n_rx) fail("arrays.n_rf_rx must not exceed arrays.n_rx");
  if (rx_architecture == RxArchitecture::PartiallyConnected && n_rx % n_rf_rx != 0) {
    std::ostringstream os;
    os << "arrays.n_rx (" << n_rx << ") must be divisible by arrays.n_rf_rx (" << n_rf_rx
       << ") for a partially-connected receiver";
    fail(os.str());
  }
}

GmmAnglePrior::GmmAnglePrior(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  validate();
}

void GmmAnglePrior::validate() const {
  if (components_.empty()) throw std::invalid_argument("angle_prior needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("angle_prior weights must be nonnegative");
    if (!(c.variance > 0.0)) throw std::invalid_argument("angle_prior variances must be positive");
    if (!(c.mean >= -kPi / 2 && c.mean < kPi / 2))
      throw std::invalid_argument("angle_prior means must lie in [-pi/2, pi/2)");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("angle_prior weights must sum to 1");
}

namespace {

// log of w_i N(theta; mu_i, s_i^2) for every component.
void component_logs(const std::vector<GaussianComponent>& comps, double theta,
                    std::vector<double>& out) {
  out.resize(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    const double d = theta - c.mean;
    out[i] = (c.weight > 0.0 ? std::log(c.weight) : -std::numeric_limits<double>::infinity()) -
             0.5 * std::log(2.0 * kPi * c.variance) - 0.5 * d * d / c.variance;
  }
}

}  // namespace

double GmmAnglePrior::density(double theta) const {
  double p = 0.0;
  for (const auto& c : components_) {
    const double d = theta - c.mean;
    p += c.weight * std::exp(-0.5 * d * d / c.variance) / std::sqrt(2.0 * kPi * c.variance);
  }
  return p;
}

double GmmAnglePrior::log_density(double theta) const {
  std::vector<double> l;
  component_logs(components_, theta, l);
  const double m = *std::max_element(l.begin(), l.end());
  double s = 0.0;
  for (double v : l) s += std::exp(v - m);
  return m + std::log(s);
}

double GmmAnglePrior::score(double theta) const {
  std::vector<double> l;
  component_logs(components_, theta, l);
  const double m = *std::max_element(l.begin(), l.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double r = std::exp(l[i] - m);
    const auto& c = components_[i];
    num += r * (c.mean - theta) / c.variance;
    den += r;
  }
  return num / den;
}

double GmmAnglePrior::mode(double lo, double hi) const {
  // Coarse scan, then golden-section refinement around the best cell.
  const int n = 20001;
  double best_t = lo, best_v = -std::numeric_limits<double>::infinity();
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double t = lo + i * h;
    const double v = log_density(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - h), b = std::min(hi, best_t + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = log_density(x1), f2 = log_density(x2);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = log_density(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = log_density(x1);
    }
  }
  return 0.5 * (a + b);
}

double GmmAnglePrior::sample(std::mt19937_64& eng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(eng);
  std::size_t k = 0;
  for (; k + 1 < components_.size(); ++k) {
    if (r < components_[k].weight) break;
    r -= components_[k].weight;
  }
  std::normal_distribution<double> n(components_[k].mean, std::sqrt(components_[k].variance));
  return n(eng);
}

CommChannel CommChannel::narrowband(CMat h) {
  CommChannel c;
  c.kind = Kind::Narrowband;
  c.taps = {h};
  c.response = {std::move(h)};
  return c;
}

CommChannel CommChannel::wideband(std::vector<CMat> taps, int subcarriers) {
  CommChannel c;
  c.kind = Kind::Wideband;
  c.response = taps_to_subcarriers(taps, subcarriers);
  c.taps = std::move(taps);
  return c;
}

void Scenario::validate() const {
  arrays.validate();
  angle_prior.validate();
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(reflection.gamma >= 0.0)) fail("reflection.gamma must be nonnegative");
  if (!(power > 0.0)) fail("power must be positive");
  if (!(noise_comm > 0.0)) fail("noise_comm must be positive");
  if (!(noise_sense > 0.0)) fail("noise_sense must be positive");
  if (symbols < 1) fail("symbols must be positive");
  if (!(rate_target >= 0.0)) fail("rate_target must be nonnegative");
  if (subcarriers < 1) fail("subcarriers must be at least 1");
  if (quadrature_points < 64) fail("quadrature_points must be at least 64");
  if (channel.subcarriers() != subcarriers)
    fail("channel sub-carrier count does not match subcarriers");
  for (const auto& h : channel.response)
    if (h.rows() != arrays.n_user || h.cols() != arrays.n_tx)
      fail("channel dimensions must be n_user x n_tx");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // SplitMix64 finalizer over the combined word.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), eng_(mix_seed(seed, 0)) {}

Rng Rng::split(std::string_view name) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return Rng(mix_seed(seed_, h));
}

Rng Rng::split(std::uint64_t index) const { return Rng(mix_seed(seed_ ^ 0x5bd1e995ULL, index)); }

cd Rng::complex_normal(double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(eng_);
  const double im = n(eng_);
  return {re, im};
}

double Rng::uniform_phase() {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return u(eng_);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

void check_angle(int n, double theta) {
  if (n < 1) throw std::invalid_argument("steering vector needs at least one antenna");
  // The closed endpoint +pi/2 is accepted so that uniform pattern grids can include it.
  if (!(theta >= -kPi / 2 && theta <= kPi / 2))
    throw std::domain_error("steering angle outside [-pi/2, pi/2]");
}

}  // namespace

CVec steering_vector(int n, double theta) {
  check_angle(n, theta);
  CVec a(n);
  const double s = std::sin(theta);
  for (int i = 0; i < n; ++i) {
    const double m = i - 0.5 * (n - 1);
    a[i] = std::polar(1.0, kPi * m * s);
  }
  return a;
}

CVec steering_derivative(int n, double theta) {
  check_angle(n, theta);
  CVec d(n);
  const double s = std::sin(theta), c = std::cos(theta);
  for (int i = 0; i < n; ++i) {
    const double m = i - 0.5 * (n - 1);
    d[i] = kJ * (kPi * m * c) * std::polar(1.0, kPi * m * s);
  }
  return d;
}

CMat gen_rician_channel(const ArrayConfig& arrays, double user_angle, double user_distance,
                        double rician_factor, double beta0, double path_loss_exponent,
                        std::uint64_t seed) {
  if (!(user_distance > 0.0) || !(beta0 > 0.0))
    throw std::invalid_argument("Rician channel needs positive distance and reference gain");
  if (!(rician_factor >= 0.0)) throw std::invalid_argument("Rician factor must be nonnegative");
  const double beta_c = beta0 / std::pow(user_distance, path_loss_exponent);
  const CMat los =
      steering_vector(arrays.n_user, user_angle) * steering_vector(arrays.n_tx, user_angle).adjoint();
  Rng rng = Rng(seed).split("rician-nlos");
  CMat nlos(arrays.n_user, arrays.n_tx);
  for (int j = 0; j < arrays.n_tx; ++j)
    for (int i = 0; i < arrays.n_user; ++i) nlos(i, j) = rng.complex_normal();
  return std::sqrt(beta_c / (rician_factor + 1.0)) * (std::sqrt(rician_factor) * los + nlos);
}

std::vector<CMat> wideband_taps(const ArrayConfig& arrays, int n_taps, double gain,
                                std::uint64_t seed) {
  if (n_taps < 1) throw std::invalid_argument("wideband channel needs at least one tap");
  Rng rng = Rng(seed).split("wideband-taps");
  std::vector<CMat> taps;
  for (int l = 0; l < n_taps; ++l) {
    CMat t(arrays.n_user, arrays.n_tx);
    for (int j = 0; j < arrays.n_tx; ++j)
      for (int i = 0; i < arrays.n_user; ++i) t(i, j) = rng.complex_normal(gain / n_taps);
    taps.push_back(std::move(t));
  }
  return taps;
}

std::vector<CMat> taps_to_subcarriers(const std::vector<CMat>& taps, int subcarriers) {
  const int n_taps = static_cast<int>(taps.size());
  if (n_taps < 1 || n_taps > subcarriers)
    throw std::invalid_argument("tap count must satisfy 1 <= taps <= subcarriers");
  std::vector<CMat> out;
  for (int k = 0; k < subcarriers; ++k) {
    CMat h = CMat::Zero(taps[0].rows(), taps[0].cols());
    for (int l = 0; l < n_taps; ++l)
      h += taps[l] * std::polar(1.0, -2.0 * kPi * double(k) * double(l) / subcarriers);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<CMat> gen_wideband_channel(const ArrayConfig& arrays, int n_taps, int subcarriers,
                                       double gain, std::uint64_t seed) {
  if (n_taps < 1 || n_taps > subcarriers)
    throw std::invalid_argument("tap count must satisfy 1 <= taps <= subcarriers");
  return taps_to_subcarriers(wideband_taps(arrays, n_taps, gain, seed), subcarriers);
}

CommChannel realize_channel(const Scenario& s, std::uint64_t seed) {
  const auto& cs = s.channel_spec;
  if (cs.model == ChannelSpec::Model::Rician) {
    CMat h = gen_rician_channel(s.arrays, cs.user_angle, cs.user_distance, cs.rician_factor,
                                cs.beta0, cs.path_loss_exponent, seed);
    if (s.subcarriers == 1) return CommChannel::narrowband(std::move(h));
    return CommChannel::wideband({h}, s.subcarriers);
  }
  const double gain = cs.beta0 / std::pow(cs.user_distance, cs.path_loss_exponent);
  auto taps = wideband_taps(s.arrays, cs.taps, gain, seed);
  if (s.subcarriers == 1) {
    CMat h = CMat::Zero(s.arrays.n_user, s.arrays.n_tx);
    for (const auto& t : taps) h += t;
    return CommChannel::narrowband(std::move(h));
  }
  return CommChannel::wideband(std::move(taps), s.subcarriers);
}

GmmAnglePrior reference_angle_prior() {
  return GmmAnglePrior({{0.31, -0.74, std::pow(10.0, -2.5)},
                        {0.24, -0.54, 1e-2},
                        {0.28, -0.75, 1e-2},
                        {0.17, 0.95, std::pow(10.0, -2.5)}});
}

}  // namespace isac
