#pragma once

// Matrix product state key search.
//
// The MPS is real, open-boundary, physical dimension 2. Site k holds two
// matrices A[k][s] of shape (left bond) x (right bond); site 0 is the key's
// most significant bit. An attack alternates right-to-left and left-to-right
// sweeps; at each link the two site tensors are merged, perturbed, split by
// SVD and the change is accepted by a Metropolis test on the Hamming cost of
// a freshly sampled key, after which one Adam step (SPSA gradient) refines
// the merged tensor.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tnattack/cost.hpp"
#include "tnattack/linalg.hpp"
#include "tnattack/optim.hpp"
#include "tnattack/record.hpp"
#include "tnattack/rng.hpp"

namespace tnattack {

inline constexpr std::size_t kMaxMpsBondDim = 64;

enum class CanonicalForm { none, left, right };
enum class SweepDirection { left_to_right, right_to_left };

struct SweepConfig {
  std::size_t bond_dim = 1;
  double step_length = 1e-2;
  int steps = 1;
  double cutoff = 1e-8;
  double reset_value = 25.0;
  double temperature = 1.0;
  std::size_t max_iterations = 0;  // 0: 4 * 2^key_bits
  std::uint64_t seed = 0;
  int samples = 1;  // sampled keys per acceptance test; the lowest cost counts

  void validate() const {
    if (bond_dim < 1 || bond_dim > kMaxMpsBondDim) throw ConfigError("mps: bond_dim must be in [1, 64]");
    if (!(step_length > 0) || steps < 1 || !(cutoff > 0) || !(reset_value > 0) || temperature < 0 || samples < 1)
      throw ConfigError("mps: step_length, steps, cutoff, reset_value and samples must be positive, temperature >= 0");
  }
};

struct MpsState {
  using Site = std::array<MatrixR, 2>;
  std::vector<Site> sites;
  CanonicalForm form = CanonicalForm::none;

  std::size_t size() const noexcept { return sites.size(); }
  Eigen::Index left_dim(std::size_t k) const { return sites[k][0].rows(); }
  Eigen::Index right_dim(std::size_t k) const { return sites[k][0].cols(); }

  // Dimensions of the n-1 internal links.
  std::vector<std::size_t> bond_dims() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k + 1 < sites.size(); ++k) out.push_back(static_cast<std::size_t>(right_dim(k)));
    return out;
  }

  double amplitude(const BitString& bits) const {
    if (bits.size() != sites.size()) throw ShapeError("MpsState::amplitude: wrong number of bits");
    MatrixR acc = MatrixR::Identity(1, 1);
    for (std::size_t k = 0; k < sites.size(); ++k) acc = acc * sites[k][static_cast<std::size_t>(bits[k])];
    return acc(0, 0);
  }

  // Dense amplitudes indexed by the key read as an integer (site 0 = MSB).
  VectorR to_statevector() const {
    if (sites.size() > 24) throw ShapeError("MpsState::to_statevector: too many sites");
    const std::size_t n = sites.size();
    VectorR psi(static_cast<Eigen::Index>(std::size_t{1} << n));
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) psi[static_cast<Eigen::Index>(x)] = amplitude(BitString::from_uint(x, n));
    return psi;
  }

  double norm() const {
    MatrixR env = MatrixR::Identity(1, 1);
    for (const auto& site : sites) env = site[0].transpose() * env * site[0] + site[1].transpose() * env * site[1];
    return std::sqrt(std::max(env(0, 0), 0.0));
  }
};

// Link k (between sites k-1 and k) has dimension min(bond_dim, 2^k, 2^(n-k)).
inline MpsState init_random(std::size_t n_sites, std::size_t bond_dim, Rng& rng) {
  if (n_sites < 1) throw ShapeError("init_random: need at least one site");
  std::vector<Eigen::Index> dims(n_sites + 1, 1);
  for (std::size_t k = 1; k < n_sites; ++k) {
    const std::size_t left = k < 63 ? (std::size_t{1} << k) : bond_dim;
    const std::size_t right = n_sites - k < 63 ? (std::size_t{1} << (n_sites - k)) : bond_dim;
    dims[k] = static_cast<Eigen::Index>(std::min({bond_dim, left, right}));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  MpsState s;
  s.sites.resize(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k)
    for (auto& m : s.sites[k]) {
      m.resize(dims[k], dims[k + 1]);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
    }
  const double nrm = s.norm();
  if (nrm > 0) {
    const double scale = std::pow(nrm, -1.0 / static_cast<double>(n_sites));
    for (auto& site : s.sites)
      for (auto& m : site) m *= scale;
  }
  return s;
}

inline MpsState init_random(std::size_t n_sites, const SweepConfig& cfg) {
  Rng rng(cfg.seed);
  return init_random(n_sites, cfg.bond_dim, rng);
}

namespace mps_detail {

// (l, s) x r matrix of a site, row index l*2 + s.
inline MatrixR stack_left(const MpsState::Site& site) {
  const Eigen::Index dl = site[0].rows(), dr = site[0].cols();
  MatrixR m(dl * 2, dr);
  for (Eigen::Index l = 0; l < dl; ++l)
    for (int s = 0; s < 2; ++s) m.row(l * 2 + s) = site[static_cast<std::size_t>(s)].row(l);
  return m;
}

inline MpsState::Site unstack_left(const MatrixR& m) {
  const Eigen::Index dl = m.rows() / 2;
  MpsState::Site site{MatrixR(dl, m.cols()), MatrixR(dl, m.cols())};
  for (Eigen::Index l = 0; l < dl; ++l)
    for (int s = 0; s < 2; ++s) site[static_cast<std::size_t>(s)].row(l) = m.row(l * 2 + s);
  return site;
}

// l x (s, r) matrix of a site, column index s*Dr + r.
inline MatrixR stack_right(const MpsState::Site& site) {
  const Eigen::Index dl = site[0].rows(), dr = site[0].cols();
  MatrixR m(dl, 2 * dr);
  m.leftCols(dr) = site[0];
  m.rightCols(dr) = site[1];
  return m;
}

inline MpsState::Site unstack_right(const MatrixR& m) {
  const Eigen::Index dr = m.cols() / 2;
  return {m.leftCols(dr), m.rightCols(dr)};
}

// Thin QR with non-negative diag(R), so an isometry factors as (itself, I).
// Returns (Q, R); falls back to a cutoff SVD when R is numerically singular.
inline std::pair<MatrixR, MatrixR> positive_qr(const MatrixR& m, double cutoff) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixR> qr(m);
  MatrixR q = qr.householderQ() * MatrixR::Identity(m.rows(), k);
  MatrixR r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  bool singular = false;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(r(i, i)) < cutoff * scale) singular = true;
    if (r(i, i) < 0) {
      q.col(i) *= -1.0;
      r.row(i) *= -1.0;
    }
  }
  if (!singular) return {std::move(q), std::move(r)};
  auto svd = truncated_svd(m, static_cast<std::size_t>(k), cutoff);
  return {svd.u, svd.s.asDiagonal() * svd.v.transpose()};
}

}  // namespace mps_detail

// Left form: every site but the last is a left isometry and the last site
// carries unit norm. Right form mirrors this.
inline void canonicalize_in_place(MpsState& state, SweepDirection toward, double cutoff = 1e-14) {
  const std::size_t n = state.size();
  if (n == 0) throw InvalidStateError("canonicalize: empty MPS");
  if (toward == SweepDirection::left_to_right) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      auto [q, r] = mps_detail::positive_qr(mps_detail::stack_left(state.sites[k]), cutoff);
      state.sites[k] = mps_detail::unstack_left(q);
      for (auto& m : state.sites[k + 1]) m = r * m;
    }
    auto& last = state.sites[n - 1];
    const double nrm = std::sqrt(last[0].squaredNorm() + last[1].squaredNorm());
    if (!(nrm > 0)) throw InvalidStateError("canonicalize: state has zero norm");
    for (auto& m : last) m /= nrm;
    state.form = CanonicalForm::left;
  } else {
    for (std::size_t k = n - 1; k > 0; --k) {
      auto [q, r] = mps_detail::positive_qr(mps_detail::stack_right(state.sites[k]).transpose(), cutoff);
      state.sites[k] = mps_detail::unstack_right(q.transpose());
      for (auto& m : state.sites[k - 1]) m = m * r.transpose();
    }
    auto& first = state.sites[0];
    const double nrm = std::sqrt(first[0].squaredNorm() + first[1].squaredNorm());
    if (!(nrm > 0)) throw InvalidStateError("canonicalize: state has zero norm");
    for (auto& m : first) m /= nrm;
    state.form = CanonicalForm::right;
  }
}

enum class Canonical { left, right };

inline MpsState canonicalize(MpsState state, Canonical direction) {
  canonicalize_in_place(state, direction == Canonical::left ? SweepDirection::left_to_right : SweepDirection::right_to_left);
  return state;
}

// Max deviation of the sitewise isometry conditions for the given form.
inline double isometry_error(const MpsState& state, Canonical direction) {
  double err = 0.0;
  const std::size_t n = state.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (direction == Canonical::left && k + 1 < n) {
      const MatrixR m = mps_detail::stack_left(state.sites[k]);
      err = std::max(err, (m.transpose() * m - MatrixR::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff());
    }
    if (direction == Canonical::right && k > 0) {
      const MatrixR m = mps_detail::stack_right(state.sites[k]);
      err = std::max(err, (m * m.transpose() - MatrixR::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

// Draws one key from |amplitude|^2, sampling the last site first. Requires
// left-canonical form (the left environment of every site is the identity).
inline BitString sample_key(const MpsState& state, Rng& rng) {
  if (state.form != CanonicalForm::left) throw InvalidStateError("sample_key: MPS must be left-canonical");
  const std::size_t n = state.size();
  BitString key(n);
  VectorR v = VectorR::Ones(1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t k = n; k-- > 0;) {
    const VectorR w0 = state.sites[k][0] * v;
    const VectorR w1 = state.sites[k][1] * v;
    const double p0 = w0.squaredNorm(), p1 = w1.squaredNorm();
    const double total = p0 + p1;
    if (!(total > 0) || !std::isfinite(total)) throw InvalidStateError("sample_key: state has zero norm");
    const int bit = uni(rng) * total < p1 ? 1 : 0;
    key.set(k, bit);
    const VectorR& w = bit ? w1 : w0;
    v = w / w.norm();
  }
  return key;
}

// Merged two-site tensor for link k: rows (l, s_k), cols (s_{k+1}, r).
inline MatrixR merge_link(const MpsState& state, std::size_t k) {
  const auto& a = state.sites[k];
  const auto& b = state.sites[k + 1];
  const Eigen::Index dl = a[0].rows(), dr = b[0].cols();
  MatrixR theta(dl * 2, 2 * dr);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      const MatrixR block = a[static_cast<std::size_t>(s1)] * b[static_cast<std::size_t>(s2)];
      for (Eigen::Index l = 0; l < dl; ++l) theta.block(l * 2 + s1, s2 * dr, 1, dr) = block.row(l);
    }
  return theta;
}

struct SplitResult {
  MpsState::Site left;
  MpsState::Site right;
  double discarded = 0.0;
};

// SVD split of a merged tensor. The singular values go to the right site when
// sweeping left-to-right and to the left site otherwise.
inline SplitResult split_link(const MatrixR& theta, std::size_t bond_dim, double cutoff, SweepDirection dir) {
  auto svd = truncated_svd(theta, bond_dim, cutoff);
  MatrixR left = svd.u;
  MatrixR right = svd.v.transpose();
  if (dir == SweepDirection::left_to_right) right = svd.s.asDiagonal() * right;
  else left = left * svd.s.asDiagonal();
  return {mps_detail::unstack_left(left), mps_detail::unstack_right(right), svd.discarded};
}

// Metropolis test: always accept non-positive delta; otherwise accept with
// probability exp(-delta / temperature). Temperature 0 is greedy.
inline bool metropolis_accept(double delta, double temperature, Rng& rng) {
  if (delta <= 0) return true;
  if (temperature <= 0) return false;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return uni(rng) < std::exp(-delta / temperature);
}

// Per-link Adam state for the merged tensors.
struct MpsAdamState {
  AdamConfig config;
  std::map<std::size_t, Adam> per_link;

  Adam& at(std::size_t link) {
    auto it = per_link.find(link);
    if (it == per_link.end()) it = per_link.emplace(link, Adam(config)).first;
    return it->second;
  }
  void clear() { per_link.clear(); }
};

struct UpdateResult {
  bool accepted = false;
  bool hit = false;
  bool reset_requested = false;
  std::size_t cost = 0;
  double gradient_norm = 0.0;
  bool budget_exhausted = false;
};

namespace mps_detail {

inline bool out_of_budget(const AttackInstance& inst, std::size_t limit) {
  return inst.exhausted() || (limit != 0 && inst.iterations() >= limit);
}

// Installs a split merged tensor at link k, then brings the state to left form.
inline void install(MpsState& state, std::size_t k, const MatrixR& theta, const SweepConfig& cfg, SweepDirection dir) {
  auto split = split_link(theta / theta.norm(), cfg.bond_dim, cfg.cutoff, dir);
  state.sites[k] = std::move(split.left);
  state.sites[k + 1] = std::move(split.right);
  state.form = CanonicalForm::none;
  canonicalize_in_place(state, SweepDirection::left_to_right);
}

// Samples `samples` keys and evaluates them; returns the lowest cost seen.
inline Evaluation sample_and_score(const MpsState& state, AttackInstance& inst, const SweepConfig& cfg, Rng& rng,
                                   EvalKind kind, std::size_t limit, bool& exhausted) {
  Evaluation best{std::numeric_limits<std::size_t>::max(), false};
  for (int i = 0; i < cfg.samples; ++i) {
    if (out_of_budget(inst, limit)) {
      exhausted = true;
      break;
    }
    const Evaluation e = inst.evaluate(sample_key(state, rng), kind);
    if (e.cost < best.cost || e.hit) best = e;
    if (e.hit) break;
  }
  return best;
}

}  // namespace mps_detail

// One merged-tensor update at link k. `reference_cost` is the energy the
// Metropolis test compares against; it is lowered when an improving move is
// accepted.
inline UpdateResult merged_update(MpsState& state, std::size_t k, AttackInstance& inst, const SweepConfig& cfg, Rng& rng,
                                  MpsAdamState& adam, std::size_t& reference_cost, SweepDirection dir,
                                  std::size_t iteration_limit = 0) {
  if (k + 1 >= state.size()) throw ShapeError("merged_update: link index out of range");
  UpdateResult out;
  const MpsState before = state;

  // Perturb, renormalise, split.
  MatrixR theta = merge_link(state, k);
  std::normal_distribution<double> gauss(0.0, cfg.step_length);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] += gauss(rng);
  mps_detail::install(state, k, theta, cfg, dir);

  bool exhausted = false;
  const Evaluation e = mps_detail::sample_and_score(state, inst, cfg, rng, EvalKind::sample, iteration_limit, exhausted);
  if (exhausted && e.cost == std::numeric_limits<std::size_t>::max()) {
    state = before;
    out.budget_exhausted = true;
    return out;
  }
  out.cost = e.cost;
  if (e.hit) {
    out.hit = out.accepted = true;
    return out;
  }
  const double delta = static_cast<double>(e.cost) - static_cast<double>(reference_cost);
  out.accepted = metropolis_accept(delta, cfg.temperature, rng);
  if (out.accepted) reference_cost = std::min(reference_cost, e.cost);
  else state = before;
  if (exhausted) {
    out.budget_exhausted = true;
    return out;
  }

  // One Adam step on the merged tensor, gradient from an SPSA probe pair.
  const MatrixR current = merge_link(state, k);
  const double c = cfg.step_length;
  const VectorR delta_dir = rademacher(current.size(), rng);
  const Eigen::Map<const VectorR> flat(current.data(), current.size());
  std::array<std::size_t, 2> probe_cost{};
  for (int sign = 0; sign < 2; ++sign) {
    if (mps_detail::out_of_budget(inst, iteration_limit)) {
      out.budget_exhausted = true;
      return out;
    }
    VectorR shifted = flat + (sign == 0 ? c : -c) * delta_dir;
    MpsState probe = state;
    mps_detail::install(probe, k, Eigen::Map<const MatrixR>(shifted.data(), current.rows(), current.cols()), cfg, dir);
    bool probe_exhausted = false;
    const Evaluation pe = mps_detail::sample_and_score(probe, inst, cfg, rng, EvalKind::probe, iteration_limit, probe_exhausted);
    probe_cost[static_cast<std::size_t>(sign)] = pe.cost;
    if (pe.hit) {
      state = std::move(probe);
      out.hit = true;
      out.cost = 0;
      return out;
    }
    if (probe_exhausted) {
      out.budget_exhausted = true;
      return out;
    }
  }
  const VectorR grad = spsa_gradient(static_cast<double>(probe_cost[0]), static_cast<double>(probe_cost[1]), c, delta_dir);
  out.gradient_norm = grad.norm();
  VectorR updated = adam.at(k).step(flat, grad);
  mps_detail::install(state, k, Eigen::Map<const MatrixR>(updated.data(), current.rows(), current.cols()), cfg, dir);
  out.reset_requested = out.gradient_norm > cfg.reset_value;
  return out;
}

inline Hyperparameters mps_hyperparameters(const SweepConfig& cfg) {
  return {{"bond_dim", std::to_string(cfg.bond_dim)},   {"step_length", hyperparameter_value(cfg.step_length)},
          {"steps", std::to_string(cfg.steps)},         {"cutoff", hyperparameter_value(cfg.cutoff)},
          {"reset_value", hyperparameter_value(cfg.reset_value)}, {"temperature", hyperparameter_value(cfg.temperature)},
          {"samples", std::to_string(cfg.samples)}};
}

inline AttackRunRecord run_mps_attack(AttackInstance& inst, const SweepConfig& cfg, const TraceSink& trace = {}) {
  cfg.validate();
  const std::size_t n = inst.key_bits();
  if (n < 2) throw ShapeError("run_mps_attack: key must have at least 2 bits");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t limit = cfg.max_iterations ? cfg.max_iterations : (inst.budget() ? 0 : default_budget(n));

  AttackRunRecord rec;
  rec.engine = "mps";
  rec.cipher = inst.cipher().name;
  rec.key_bits = n;
  rec.seed = cfg.seed;
  rec.hyperparameters = mps_hyperparameters(cfg);

  Rng rng(cfg.seed);
  MpsAdamState adam;
  adam.config.learning_rate = cfg.step_length;
  auto finish = [&](bool hit) {
    rec.hit = hit;
    rec.iterations = inst.iterations();
    rec.probe_iterations = inst.probe_iterations();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
  };
  auto emit = [&](std::ptrdiff_t site, std::size_t cost, bool accepted, double gnorm, bool reset) {
    if (trace) trace({inst.iterations(), site, cost, accepted, gnorm, reset});
  };

  // Fresh random state, left-canonical, scored once.
  MpsState state;
  std::size_t current_cost = 0;
  auto restart = [&]() -> bool {
    state = init_random(n, cfg.bond_dim, rng);
    canonicalize_in_place(state, SweepDirection::left_to_right);
    adam.clear();
    bool exhausted = false;
    const Evaluation e = mps_detail::sample_and_score(state, inst, cfg, rng, EvalKind::sample, limit, exhausted);
    if (e.cost == std::numeric_limits<std::size_t>::max()) return false;
    current_cost = e.cost;
    emit(-1, e.cost, true, 0.0, false);
    return true;
  };

  if (mps_detail::out_of_budget(inst, limit) || !restart()) return finish(false);
  if (inst.solved()) return finish(true);

  SweepDirection dir = SweepDirection::right_to_left;
  while (true) {
    std::size_t reference = current_cost;
    bool reset = false;
    for (std::size_t i = 0; i + 1 < n && !reset; ++i) {
      const std::size_t k = dir == SweepDirection::right_to_left ? n - 2 - i : i;
      for (int step = 0; step < cfg.steps; ++step) {
        const UpdateResult u = merged_update(state, k, inst, cfg, rng, adam, reference, dir, limit);
        if (u.accepted) current_cost = u.cost;
        emit(static_cast<std::ptrdiff_t>(k), u.cost, u.accepted, u.gradient_norm, u.reset_requested);
        if (u.hit) return finish(true);
        if (u.budget_exhausted || mps_detail::out_of_budget(inst, limit)) return finish(false);
        if (u.reset_requested) {
          ++rec.resets;
          if (!restart()) return finish(false);
          if (inst.solved()) return finish(true);
          reset = true;
          break;
        }
      }
    }
    if (reset) {
      dir = SweepDirection::right_to_left;
      continue;
    }
    if (dir == SweepDirection::right_to_left) {
      canonicalize_in_place(state, SweepDirection::right_to_left);
      canonicalize_in_place(state, SweepDirection::left_to_right);
      dir = SweepDirection::left_to_right;
    } else {
      canonicalize_in_place(state, SweepDirection::left_to_right);
      dir = SweepDirection::right_to_left;
    }
  }
}

}  // namespace tnattack
