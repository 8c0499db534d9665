#pragma once

// Variational attacks on the flexible-PEPS backend.
//
// VQAA: a layered circuit of U(theta, phi, lambda) rotations (optionally
// followed by a CNOT ladder) is simulated, each qubit's reduced density
// matrix is decoded against a state frame and the groups are concatenated
// into a candidate key.
//
// VQAA-h: the parameters weight the generators of the same gate set in a
// Hamiltonian; imaginary-time evolution from |+...+> approximates its ground
// state, from which the key is read.
//
// Both optimise their parameters with Adam on SPSA estimates taken in the
// hyperspherical coordinates of the lifted point [x, cost(x)].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tnattack/cost.hpp"
#include "tnattack/fpeps.hpp"
#include "tnattack/frame.hpp"
#include "tnattack/optim.hpp"
#include "tnattack/record.hpp"

namespace tnattack {

struct CircuitAnsatz {
  std::size_t n_qubits = 1;
  std::size_t n_layers = 1;
  bool entangling = false;
  VectorR params;  // (theta, phi, lambda) per qubit per layer

  static std::size_t param_count(std::size_t n_qubits, std::size_t n_layers) { return 3 * n_qubits * n_layers; }

  void validate() const {
    if (n_qubits < 1 || n_layers < 1) throw ConfigError("CircuitAnsatz: need at least one qubit and one layer");
    if (static_cast<std::size_t>(params.size()) != param_count(n_qubits, n_layers))
      throw ShapeError("CircuitAnsatz: parameter count must be 3 * qubits * layers");
  }
};

inline std::vector<GateRecord> build_circuit(const CircuitAnsatz& a) {
  a.validate();
  std::vector<GateRecord> out;
  for (std::size_t l = 0; l < a.n_layers; ++l) {
    for (std::size_t q = 0; q < a.n_qubits; ++q) {
      const Eigen::Index base = static_cast<Eigen::Index>(3 * (l * a.n_qubits + q));
      out.push_back({"u", {static_cast<int>(q)}, {a.params[base], a.params[base + 1], a.params[base + 2]}, {}});
    }
    if (a.entangling)
      for (std::size_t q = 0; q + 1 < a.n_qubits; ++q) out.push_back({"cx", {static_cast<int>(q), static_cast<int>(q + 1)}, {}, {}});
  }
  return out;
}

inline FlexNetState simulate(const CircuitAnsatz& a, const SimConfig& sim) {
  return run_circuit(a.n_qubits, build_circuit(a), sim);
}

// Per-qubit frame decoding, concatenated with qubit 0 first.
inline BitString extract_key(const FlexNetState& s, const StateFrame& frame) {
  if (frame.dim != 2) throw ShapeError("extract_key: frame must act on one qubit");
  std::vector<std::size_t> groups(s.num_qubits());
  for (std::size_t q = 0; q < groups.size(); ++q) groups[q] = decode_group(reduced_density_matrix(s, static_cast<int>(q)), frame);
  return decode_key_groups(groups, frame.bits_per_group);
}

inline BitString extract_key(const FlexNetState& s, const StateFrame& frame, std::size_t n_groups) {
  if (n_groups != s.num_qubits()) throw ShapeError("extract_key: group count must equal the qubit count");
  return extract_key(s, frame);
}

// Generator weights for the circuit gate set: y_{3q..3q+2} weight X, Y, Z on
// qubit q; with entangling, y_{3n+q} weights |1><1| (x) Z on (q, q+1).
struct HamiltonianAnsatz {
  std::size_t n_qubits = 1;
  bool entangling = false;
  VectorR params;

  static std::size_t param_count(std::size_t n_qubits, bool entangling) {
    return 3 * n_qubits + (entangling ? n_qubits - 1 : 0);
  }

  void validate() const {
    if (n_qubits < 1) throw ConfigError("HamiltonianAnsatz: need at least one qubit");
    if (static_cast<std::size_t>(params.size()) != param_count(n_qubits, entangling))
      throw ShapeError("HamiltonianAnsatz: wrong parameter count");
  }

  std::vector<HamiltonianTerm> terms() const {
    validate();
    std::vector<HamiltonianTerm> out;
    const Eigen::Index n = static_cast<Eigen::Index>(n_qubits);
    for (Eigen::Index q = 0; q < n; ++q) {
      const MatrixC h = params[3 * q] * gates::pauli('X') + params[3 * q + 1] * gates::pauli('Y') + params[3 * q + 2] * gates::pauli('Z');
      out.push_back({{static_cast<int>(q)}, h});
    }
    if (entangling) {
      MatrixC p1 = MatrixC::Zero(2, 2);
      p1(1, 1) = 1.0;
      const MatrixC cz = gates::kron(p1, gates::pauli('Z'));
      for (Eigen::Index q = 0; q + 1 < n; ++q) out.push_back({{static_cast<int>(q), static_cast<int>(q + 1)}, params[3 * n + q] * cz});
    }
    return out;
  }
};

struct VariationalConfig {
  std::size_t layers = 1;
  bool entangling = false;
  std::size_t bits_per_qubit = 2;
  std::size_t qubits = 0;  // 0: key_bits / bits_per_qubit; else bits spread over this many qubits
  double learning_rate = 0.5;
  std::size_t max_iterations = 0;  // 0: instance budget, else 4 * 2^key_bits
  std::uint64_t seed = 0;
  SimConfig sim;
  double tau = 0.2;          // imaginary-time step
  int evolution_steps = 50;  // imaginary-time steps per ground-state estimate
  std::optional<VectorR> initial_params;

  void validate() const {
    if (layers < 1 || bits_per_qubit < 1 || bits_per_qubit > 8) throw ConfigError("variational: bad layers or bits_per_qubit");
    if (!(learning_rate > 0) || !(tau > 0) || evolution_steps < 0) throw ConfigError("variational: learning_rate and tau must be positive");
    sim.validate();
  }
};

// Frame for `bits_per_qubit` bits on one qubit, built with a fixed seed.
inline StateFrame default_frame(std::size_t bits_per_qubit) {
  return build_frame(1, std::size_t{1} << bits_per_qubit, 0x5eedf4a3e);
}

// Key bits carried by each qubit, qubit 0 first.
struct KeyLayout {
  std::vector<std::size_t> group_bits;

  std::size_t qubits() const { return group_bits.size(); }

  std::size_t key_bits() const {
    std::size_t n = 0;
    for (auto b : group_bits) n += b;
    return n;
  }

  bool uniform() const {
    return std::all_of(group_bits.begin(), group_bits.end(), [&](std::size_t b) { return b == group_bits.front(); });
  }

  // "2" for a uniform layout, "4,3,3" otherwise.
  std::string describe() const {
    if (uniform()) return std::to_string(group_bits.front());
    std::string out;
    for (auto b : group_bits) out += (out.empty() ? "" : ",") + std::to_string(b);
    return out;
  }

  static KeyLayout uniform(std::size_t key_bits, std::size_t bits_per_qubit) {
    if (bits_per_qubit == 0 || key_bits % bits_per_qubit != 0)
      throw ShapeError("variational: bits per qubit must divide the key length");
    return {std::vector<std::size_t>(key_bits / bits_per_qubit, bits_per_qubit)};
  }

  // The first key_bits % qubits qubits carry one bit more than the rest.
  static KeyLayout spread(std::size_t key_bits, std::size_t qubits) {
    if (qubits == 0 || qubits > key_bits) throw ShapeError("variational: qubit count must be in [1, key length]");
    std::vector<std::size_t> g(qubits, key_bits / qubits);
    for (std::size_t q = 0; q < key_bits % qubits; ++q) ++g[q];
    if (g.front() > 8) throw ShapeError("variational: at most 8 key bits per qubit");
    return {g};
  }
};

inline KeyLayout key_layout(std::size_t key_bits, const VariationalConfig& cfg) {
  return cfg.qubits ? KeyLayout::spread(key_bits, cfg.qubits) : KeyLayout::uniform(key_bits, cfg.bits_per_qubit);
}

// One frame per group size.
using FrameSet = std::map<std::size_t, StateFrame>;

inline FrameSet default_frames(const KeyLayout& layout) {
  FrameSet out;
  for (auto b : layout.group_bits)
    if (!out.count(b)) out.emplace(b, default_frame(b));
  return out;
}

inline BitString extract_key(const FlexNetState& s, const KeyLayout& layout, const FrameSet& frames) {
  if (layout.qubits() != s.num_qubits()) throw ShapeError("extract_key: layout does not match the qubit count");
  BitString out;
  for (std::size_t q = 0; q < layout.qubits(); ++q) {
    const auto it = frames.find(layout.group_bits[q]);
    if (it == frames.end()) throw ShapeError("extract_key: no frame for a group size");
    const std::size_t g = decode_group(reduced_density_matrix(s, static_cast<int>(q)), it->second);
    out = BitString::concat(out, BitString::from_uint(g, layout.group_bits[q]));
  }
  return out;
}

struct StepResult {
  std::size_t cost = 0;
  bool hit = false;
  bool exhausted = false;
  bool evaluated = false;  // the step's own sample was scored
  double gradient_norm = 0.0;
};

using CandidateFn = std::function<BitString(const VectorR&)>;

namespace variational_detail {

inline bool out_of_budget(const AttackInstance& inst, std::size_t limit) {
  return inst.exhausted() || (limit != 0 && inst.iterations() >= limit);
}

inline constexpr double kMinRadius = 1e-6;

}  // namespace variational_detail

// One optimisation step: evaluate x, then (unless it hit) move it by one
// Adam step along an SPSA estimate in hyperspherical coordinates, probe
// offset c = 0.1 * learning rate. Up to three cipher evaluations. With
// `angular`, projected parameters are reduced to [-pi, pi].
inline StepResult hyperspherical_step(VectorR& x, AttackInstance& inst, Adam& adam, double learning_rate, Rng& rng,
                                      const CandidateFn& candidate, std::size_t limit = 0, bool angular = true) {
  using variational_detail::out_of_budget;
  StepResult out;
  if (out_of_budget(inst, limit)) {
    out.exhausted = true;
    return out;
  }
  const Evaluation e = inst.evaluate(candidate(x), EvalKind::sample);
  out.evaluated = true;
  out.cost = e.cost;
  out.hit = e.hit;
  if (e.hit) return out;

  const HypersphericalPoint p = to_hyperspherical(x, static_cast<double>(e.cost));
  const Eigen::Index n = p.angles.size();
  VectorR coords(n + 1);
  coords << p.angles, p.radius;
  const double c = 0.1 * learning_rate;
  const VectorR delta = rademacher(n + 1, rng);
  auto project = [&](const VectorR& v) {
    HypersphericalPoint q{v.head(n), std::max(v[n], variational_detail::kMinRadius)};
    VectorR out = from_hyperspherical(q).first;
    if (angular)
      for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::remainder(out[i], 2 * M_PI);
    return out;
  };
  std::array<double, 2> probe{};
  for (int k = 0; k < 2; ++k) {
    if (out_of_budget(inst, limit)) {
      out.exhausted = true;
      return out;
    }
    const VectorR xs = project(coords + (k == 0 ? c : -c) * delta);
    const Evaluation pe = inst.evaluate(candidate(xs), EvalKind::probe);
    if (pe.hit) {
      x = xs;
      out.cost = 0;
      out.hit = true;
      return out;
    }
    probe[static_cast<std::size_t>(k)] = static_cast<double>(pe.cost);
  }
  const VectorR g = spsa_gradient(probe[0], probe[1], c, delta);
  out.gradient_norm = g.norm();
  x = project(adam.step(coords, g));
  return out;
}

inline StepResult vqaa_step(CircuitAnsatz& ansatz, AttackInstance& inst, const StateFrame& frame, Adam& adam,
                            const VariationalConfig& cfg, Rng& rng, std::size_t limit = 0) {
  if (inst.key_bits() % frame.bits_per_group != 0 || inst.key_bits() / frame.bits_per_group != ansatz.n_qubits)
    throw ShapeError("vqaa_step: frame grouping does not match the key and qubit count");
  CircuitAnsatz work = ansatz;
  const CandidateFn candidate = [&](const VectorR& x) {
    work.params = x;
    return extract_key(simulate(work, cfg.sim), frame);
  };
  return hyperspherical_step(ansatz.params, inst, adam, cfg.learning_rate, rng, candidate, limit);
}

// Ground-state estimate of H(y) from |+...+>.
inline FlexNetState ground_state(const HamiltonianAnsatz& h, const VariationalConfig& cfg) {
  FlexNetState s(h.n_qubits);
  for (std::size_t q = 0; q < h.n_qubits; ++q) apply_one_body(s, static_cast<int>(q), gates::hadamard());
  imaginary_time_evolve(s, h.terms(), cfg.tau, cfg.evolution_steps, cfg.sim);
  return s;
}

namespace variational_detail {

struct Loop {
  std::string engine;
  Hyperparameters hyperparameters;
  VectorR x;
  CandidateFn candidate;
  bool angular = true;
};

inline AttackRunRecord drive(AttackInstance& inst, const VariationalConfig& cfg, Rng& rng, Loop loop, const TraceSink& trace) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t limit = cfg.max_iterations ? cfg.max_iterations : (inst.budget() ? 0 : default_budget(inst.key_bits()));
  AttackRunRecord rec;
  rec.engine = loop.engine;
  rec.cipher = inst.cipher().name;
  rec.key_bits = inst.key_bits();
  rec.seed = cfg.seed;
  rec.hyperparameters = std::move(loop.hyperparameters);
  AdamConfig ac;
  ac.learning_rate = cfg.learning_rate;
  Adam adam(ac);
  while (true) {
    const StepResult r = hyperspherical_step(loop.x, inst, adam, cfg.learning_rate, rng, loop.candidate, limit, loop.angular);
    if (trace && r.evaluated) trace({inst.iterations(), -1, r.cost, true, r.gradient_norm, false});
    if (r.hit || r.exhausted || out_of_budget(inst, limit)) {
      rec.hit = r.hit;
      break;
    }
  }
  rec.iterations = inst.iterations();
  rec.probe_iterations = inst.probe_iterations();
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline VectorR initial_params(std::size_t count, const VariationalConfig& cfg, Rng& rng, double lo, double hi) {
  if (cfg.initial_params) {
    if (static_cast<std::size_t>(cfg.initial_params->size()) != count) throw ShapeError("variational: initial_params has the wrong size");
    return *cfg.initial_params;
  }
  std::uniform_real_distribution<double> u(lo, hi);
  VectorR x(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
  return x;
}

inline Hyperparameters common_hyperparameters(const VariationalConfig& cfg, const KeyLayout& layout) {
  return {{"bits_per_qubit", layout.describe()},
          {"qubits", std::to_string(layout.qubits())},
          {"entangling", cfg.entangling ? "true" : "false"},
          {"learning_rate", hyperparameter_value(cfg.learning_rate)},
          {"chi", std::to_string(cfg.sim.chi)},
          {"kappa", std::to_string(cfg.sim.kappa)}};
}

inline void check_layout(const AttackInstance& inst, const KeyLayout& layout) {
  if (layout.key_bits() != inst.key_bits()) throw ShapeError("variational: key layout does not cover the key");
}

}  // namespace variational_detail

// Initial angles are uniform in [0, 2 pi) unless cfg.initial_params is set.
inline AttackRunRecord run_vqaa(AttackInstance& inst, const KeyLayout& layout, const FrameSet& frames, const VariationalConfig& cfg,
                                const TraceSink& trace = {}) {
  cfg.validate();
  variational_detail::check_layout(inst, layout);
  Rng rng(cfg.seed);
  CircuitAnsatz ansatz{layout.qubits(), cfg.layers, cfg.entangling, {}};
  ansatz.params = variational_detail::initial_params(CircuitAnsatz::param_count(ansatz.n_qubits, ansatz.n_layers), cfg, rng, 0.0,
                                                     2 * M_PI);
  ansatz.validate();
  auto hp = variational_detail::common_hyperparameters(cfg, layout);
  hp["layers"] = std::to_string(cfg.layers);
  CandidateFn candidate = [ansatz, &layout, &frames, &cfg](const VectorR& x) mutable {
    ansatz.params = x;
    return extract_key(simulate(ansatz, cfg.sim), layout, frames);
  };
  return variational_detail::drive(inst, cfg, rng, {"vqaa", std::move(hp), ansatz.params, std::move(candidate)}, trace);
}

// Uniform layout with `frame.bits_per_group` bits per qubit.
inline AttackRunRecord run_vqaa(AttackInstance& inst, const StateFrame& frame, const VariationalConfig& cfg,
                                const TraceSink& trace = {}) {
  const KeyLayout layout = KeyLayout::uniform(inst.key_bits(), frame.bits_per_group);
  return run_vqaa(inst, layout, FrameSet{{frame.bits_per_group, frame}}, cfg, trace);
}

// One bit on every qubit: the key is sampled from the ground state.
// Otherwise the key is decoded from per-qubit fidelities, as in VQAA.
// Initial weights are uniform in [-1, 1).
inline AttackRunRecord run_vqaah(AttackInstance& inst, const KeyLayout& layout, const FrameSet& frames, const VariationalConfig& cfg,
                                 const TraceSink& trace = {}) {
  cfg.validate();
  variational_detail::check_layout(inst, layout);
  Rng rng(cfg.seed);
  HamiltonianAnsatz h{layout.qubits(), cfg.entangling, {}};
  h.params = variational_detail::initial_params(HamiltonianAnsatz::param_count(h.n_qubits, h.entangling), cfg, rng, -1.0, 1.0);
  h.validate();
  auto hp = variational_detail::common_hyperparameters(cfg, layout);
  hp["tau"] = hyperparameter_value(cfg.tau);
  hp["evolution_steps"] = std::to_string(cfg.evolution_steps);
  const bool sample = layout.uniform() && layout.group_bits.front() == 1;
  Rng sample_rng(derive_seed(cfg.seed, 1));
  CandidateFn candidate = [h, &layout, &frames, &cfg, &sample_rng, sample](const VectorR& y) mutable {
    h.params = y;
    const FlexNetState s = ground_state(h, cfg);
    return sample ? sample_bitstring(s, sample_rng) : extract_key(s, layout, frames);
  };
  return variational_detail::drive(inst, cfg, rng, {"vqaah", std::move(hp), h.params, std::move(candidate), false}, trace);
}

inline AttackRunRecord run_vqaah(AttackInstance& inst, const StateFrame& frame, const VariationalConfig& cfg,
                                 const TraceSink& trace = {}) {
  const KeyLayout layout = KeyLayout::uniform(inst.key_bits(), frame.bits_per_group);
  return run_vqaah(inst, layout, FrameSet{{frame.bits_per_group, frame}}, cfg, trace);
}

}  // namespace tnattack
