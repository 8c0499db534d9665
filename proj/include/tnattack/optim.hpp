#pragma once

// Adam, SPSA directions and the hyperspherical lift used by the variational
// engines.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "tnattack/linalg.hpp"
#include "tnattack/rng.hpp"

namespace tnattack {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  // Returns params - lr * m_hat / (sqrt(v_hat) + eps). Moments are resized
  // (and cleared) when the parameter count changes.
  VectorR step(const VectorR& params, const VectorR& grad) {
    if (m_.size() != params.size()) reset(params.size());
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const VectorR m_hat = m_ / c1;
    const VectorR v_hat = v_ / c2;
    return params - cfg_.learning_rate * (m_hat.array() / (v_hat.array().sqrt() + cfg_.epsilon)).matrix();
  }

  void reset(Eigen::Index n = 0) {
    m_ = VectorR::Zero(n);
    v_ = VectorR::Zero(n);
    t_ = 0;
  }

  long steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }

 private:
  AdamConfig cfg_;
  VectorR m_;
  VectorR v_;
  long t_ = 0;
};

// Random +-1 direction.
inline VectorR rademacher(Eigen::Index n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  VectorR d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = coin(rng) ? 1.0 : -1.0;
  return d;
}

// Two-sided simultaneous-perturbation estimate: the finite difference along
// `delta`, spread back over every coordinate (1/delta_i == delta_i for +-1).
inline VectorR spsa_gradient(double f_plus, double f_minus, double c, const VectorR& delta) {
  return ((f_plus - f_minus) / (2.0 * c)) * delta;
}

// Point [x_1..x_n, f] of R^(n+1) in spherical coordinates: r is the Euclidean
// norm, angles 1..n-1 are arccos(v_k / ||v_k..||) and the last angle is
// atan2(v_{n+1}, v_n). Angles whose tail norm vanishes are 0.
struct HypersphericalPoint {
  VectorR angles;  // n entries
  double radius = 0.0;
};

inline HypersphericalPoint to_hyperspherical(const VectorR& x, double f) {
  const Eigen::Index n = x.size();
  VectorR v(n + 1);
  v.head(n) = x;
  v[n] = f;
  HypersphericalPoint p;
  p.radius = v.norm();
  p.angles = VectorR::Zero(n);
  if (n == 0 || p.radius == 0.0) return p;
  // tail[k] = ||v_k..v_n||
  VectorR tail(n + 1);
  double acc = 0.0;
  for (Eigen::Index k = n; k >= 0; --k) {
    acc += v[k] * v[k];
    tail[k] = std::sqrt(acc);
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    p.angles[k] = tail[k] > 0.0 ? std::acos(std::clamp(v[k] / tail[k], -1.0, 1.0)) : 0.0;
  }
  p.angles[n - 1] = std::atan2(v[n], v[n - 1]);
  return p;
}

// Inverse of to_hyperspherical; returns (x, f-coordinate).
inline std::pair<VectorR, double> from_hyperspherical(const HypersphericalPoint& p) {
  const Eigen::Index n = p.angles.size();
  VectorR v(n + 1);
  double sin_prod = p.radius;
  for (Eigen::Index k = 0; k < n; ++k) {
    v[k] = sin_prod * std::cos(p.angles[k]);
    sin_prod *= std::sin(p.angles[k]);
  }
  v[n] = sin_prod;
  return {v.head(n), v[n]};
}

}  // namespace tnattack
