#pragma once

// Non-orthogonal state frames: k unit vectors in C^(2^N) chosen to minimise
// ||A^H A - I||_F, with column 0 pinned to |0...0>. Frame index i stands for
// the bit group given by i in binary, MSB-first.

#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tnattack/bitstring.hpp"
#include "tnattack/linalg.hpp"
#include "tnattack/rng.hpp"

namespace tnattack {

inline constexpr std::size_t kMaxFrameQubits = 6;
inline constexpr std::size_t kMaxFrameStates = 256;

struct StateFrame {
  std::size_t dim = 0;
  std::size_t k = 0;
  std::size_t bits_per_group = 0;
  MatrixC columns;         // dim x k
  double objective = 0.0;  // ||A^H A - I||_F

  std::size_t qubits() const { return static_cast<std::size_t>(std::countr_zero(dim)); }
};

struct FrameOptions {
  int restarts = 8;
  int max_iterations = 20000;
  double gradient_tolerance = 1e-9;
};

struct FrameBuild {
  StateFrame frame;
  std::vector<double> history;  // objective per accepted step of the winning restart
  bool converged = false;
};

class FrameOptimizationError : public std::runtime_error {
 public:
  FrameOptimizationError(const std::string& what, StateFrame best) : std::runtime_error(what), best_(std::move(best)) {}
  const StateFrame& best() const noexcept { return best_; }

 private:
  StateFrame best_;
};

namespace frame_detail {

inline double objective_squared(const MatrixC& a) {
  const MatrixC g = a.adjoint() * a - MatrixC::Identity(a.cols(), a.cols());
  return g.squaredNorm();
}

inline void normalize_columns(MatrixC& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j).normalize();
}

// Projected gradient descent with backtracking; each accepted step lowers the
// objective.
inline FrameBuild descend(MatrixC a, const FrameOptions& opt) {
  FrameBuild run;
  double f = objective_squared(a);
  double step = 0.1;
  run.history.push_back(std::sqrt(f));
  for (int it = 0; it < opt.max_iterations; ++it) {
    const MatrixC gram = a.adjoint() * a - MatrixC::Identity(a.cols(), a.cols());
    MatrixC grad = 4.0 * a * gram;
    grad.col(0).setZero();
    for (Eigen::Index j = 1; j < a.cols(); ++j) {
      const cplx radial = a.col(j).dot(grad.col(j));
      grad.col(j) -= std::real(radial) * a.col(j);
    }
    if (grad.norm() < opt.gradient_tolerance || f < 1e-24) {
      run.converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      MatrixC trial = a - step * grad;
      normalize_columns(trial);
      const double ft = objective_squared(trial);
      if (ft < f) {
        a = std::move(trial);
        f = ft;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent direction at machine precision: stationary point.
      run.converged = true;
      break;
    }
    run.history.push_back(std::sqrt(f));
  }
  const auto n = static_cast<std::size_t>(a.cols());
  run.frame = StateFrame{static_cast<std::size_t>(a.rows()), n, static_cast<std::size_t>(std::countr_zero(n)), a, std::sqrt(f)};
  return run;
}

}  // namespace frame_detail

inline FrameBuild build_frame_detailed(std::size_t n_qubits, std::size_t k, std::uint64_t seed, const FrameOptions& opt = {}) {
  if (n_qubits < 1 || n_qubits > kMaxFrameQubits) throw ShapeError("build_frame: qubit count must be in [1, 6]");
  if (k < 2 || k > kMaxFrameStates || !std::has_single_bit(k)) throw ShapeError("build_frame: k must be a power of two in [2, 256]");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  FrameBuild best;
  best.frame.objective = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixC a(dim, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cplx(gauss(rng), gauss(rng));
    a.col(0).setZero();
    a(0, 0) = 1.0;
    frame_detail::normalize_columns(a);
    FrameBuild run = frame_detail::descend(std::move(a), opt);
    any_converged = any_converged || run.converged;
    if (run.frame.objective < best.frame.objective - 1e-12 || (run.converged && !best.converged &&
                                                               run.frame.objective <= best.frame.objective + 1e-12))
      best = std::move(run);
  }
  if (!any_converged) throw FrameOptimizationError("build_frame: no restart converged", best.frame);
  return best;
}

inline StateFrame build_frame(std::size_t n_qubits, std::size_t k, std::uint64_t seed, const FrameOptions& opt = {}) {
  return build_frame_detailed(n_qubits, k, seed, opt).frame;
}

// Lower bound on ||A^H A - I||_F for k unit vectors in dimension d (zero when
// k <= d, attained by unit-norm tight frames otherwise).
inline double tight_frame_bound(std::size_t dim, std::size_t k) {
  if (k <= dim) return 0.0;
  const double kk = static_cast<double>(k);
  return std::sqrt(kk * kk / static_cast<double>(dim) - kk);
}

inline constexpr double kStateTolerance = 1e-8;
inline constexpr double kPsdTolerance = 1e-10;

inline void validate_density_matrix(const MatrixC& rho) {
  if (rho.rows() != rho.cols()) throw InvalidStateError("density matrix must be square");
  if (!is_hermitian(rho, kStateTolerance)) throw InvalidStateError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > kStateTolerance) throw InvalidStateError("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<MatrixC> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTolerance) throw InvalidStateError("density matrix is not positive semidefinite");
}

// Fidelities a_i^H rho a_i for every frame state.
inline std::vector<double> frame_fidelities(const MatrixC& rho, const StateFrame& frame) {
  if (static_cast<std::size_t>(rho.rows()) != frame.dim) throw ShapeError("decode_group: density matrix does not match the frame dimension");
  std::vector<double> f(frame.k);
  for (std::size_t i = 0; i < frame.k; ++i) {
    const auto col = frame.columns.col(static_cast<Eigen::Index>(i));
    f[i] = std::real(col.dot(rho * col));
  }
  return f;
}

// Most faithful frame state; fidelities within 1e-12 of the maximum tie and
// the lowest index wins.
inline std::size_t decode_group(const MatrixC& rho, const StateFrame& frame) {
  validate_density_matrix(rho);
  const auto f = frame_fidelities(rho, frame);
  double best = f[0];
  for (double x : f) best = std::max(best, x);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] >= best - 1e-12) return i;
  return 0;
}

inline std::vector<std::size_t> encode_key_groups(const BitString& key, std::size_t bits_per_group) {
  if (bits_per_group == 0 || key.size() % bits_per_group != 0)
    throw ShapeError("encode_key_groups: key length is not divisible by the group size");
  std::vector<std::size_t> out(key.size() / bits_per_group);
  for (std::size_t g = 0; g < out.size(); ++g) out[g] = key.slice(g * bits_per_group, bits_per_group).to_uint();
  return out;
}

inline BitString decode_key_groups(const std::vector<std::size_t>& indices, std::size_t bits_per_group) {
  BitString out;
  for (auto idx : indices) out = BitString::concat(out, BitString::from_uint(idx, bits_per_group));
  return out;
}

// Text form:
//   tnattack-frame 1
//   <dim> <k> <objective>
//   k lines of 2*dim numbers: re im pairs of one column
inline void write_frame(std::ostream& os, const StateFrame& frame) {
  os << "tnattack-frame 1\n" << frame.dim << ' ' << frame.k << ' ' << std::setprecision(17) << frame.objective << '\n';
  for (std::size_t j = 0; j < frame.k; ++j) {
    for (std::size_t i = 0; i < frame.dim; ++i) {
      const cplx z = frame.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      os << (i ? " " : "") << z.real() << ' ' << z.imag();
    }
    os << '\n';
  }
}

inline StateFrame read_frame(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "tnattack-frame" || version != 1) throw ShapeError("read_frame: bad header");
  StateFrame f;
  if (!(is >> f.dim >> f.k >> f.objective) || f.dim == 0 || !std::has_single_bit(f.dim) || f.k < 2 || !std::has_single_bit(f.k))
    throw ShapeError("read_frame: bad dimensions");
  f.bits_per_group = static_cast<std::size_t>(std::countr_zero(f.k));
  f.columns.resize(static_cast<Eigen::Index>(f.dim), static_cast<Eigen::Index>(f.k));
  for (std::size_t j = 0; j < f.k; ++j)
    for (std::size_t i = 0; i < f.dim; ++i) {
      double re = 0, im = 0;
      if (!(is >> re >> im)) throw ShapeError("read_frame: truncated column data");
      f.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cplx(re, im);
    }
  return f;
}

}  // namespace tnattack
