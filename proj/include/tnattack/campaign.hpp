#pragma once

// Campaign runner: attempts x engines over one cipher, each attempt with a
// fresh secret key and plaintext.
//
// Seeding: attempt a draws its secret and plaintext from
// derive_seed(seed, a); engine e on that attempt runs with
// derive_seed(derive_seed(seed, a), 1000 + e). Every engine sees the same
// instance on a given attempt, and results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnattack/bruteforce.hpp"
#include "tnattack/cipher.hpp"
#include "tnattack/cost.hpp"
#include "tnattack/mps.hpp"
#include "tnattack/record.hpp"
#include "tnattack/rng.hpp"
#include "tnattack/variational.hpp"

namespace tnattack {

inline const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names{"brute", "mps", "vqaa", "vqaah"};
  return names;
}

struct EngineConfig {
  std::string name = "mps";
  SweepConfig mps;
  VariationalConfig variational;
  BruteOrder order = BruteOrder::random_permutation;

  void validate() const {
    if (std::find(engine_names().begin(), engine_names().end(), name) == engine_names().end())
      throw ConfigError("unknown engine: " + name);
    if (name == "mps") mps.validate();
    if (name == "vqaa" || name == "vqaah") variational.validate();
  }
};

struct CampaignConfig {
  std::string cipher = "sdes";
  std::size_t fixed_bits = 0;  // leading key bits revealed to the attacker
  std::vector<EngineConfig> engines{EngineConfig{}};
  std::size_t attempts = 1;
  std::size_t budget = 0;  // 0: 4 * 2^free_bits
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  SuccessRule success = SuccessRule::zero_cost;
  bool debug_keys = false;  // write secret keys into the records

  CipherSpec base_cipher() const { return cipher_by_name(cipher); }

  std::size_t free_bits() const { return base_cipher().key_bits - fixed_bits; }

  void validate() const {
    CipherSpec base;
    try {
      base = base_cipher();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (attempts < 1) throw ConfigError("campaign: attempts must be at least 1");
    if (workers < 1) throw ConfigError("campaign: workers must be at least 1");
    if (engines.empty()) throw ConfigError("campaign: no engine selected");
    if (fixed_bits >= base.key_bits) throw ConfigError("campaign: fixed_bits must leave at least one free key bit");
    for (const auto& e : engines) {
      e.validate();
      if (e.name == "brute" && base.key_bits - fixed_bits > kMaxBruteForceBits)
        throw ConfigError("campaign: brute force needs at most 32 free key bits");
    }
  }
};

struct AttemptSetup {
  CipherSpec cipher;  // over the free bits
  BitString secret;   // full key
  BitString free_secret;
  BitString plaintext;
};

inline AttemptSetup setup_attempt(const CampaignConfig& cfg, std::size_t attempt) {
  const CipherSpec base = cfg.base_cipher();
  Rng rng(derive_seed(cfg.seed, attempt));
  AttemptSetup s;
  s.secret = random_bits(base.key_bits, rng);
  s.plaintext = random_bits(base.block_bits, rng);
  s.free_secret = s.secret.slice(cfg.fixed_bits, base.key_bits - cfg.fixed_bits);
  s.cipher = cfg.fixed_bits ? ReducedKeyspace(base, s.secret.slice(0, cfg.fixed_bits)).as_cipher() : base;
  return s;
}

inline std::uint64_t engine_seed(std::uint64_t campaign_seed, std::size_t attempt, std::size_t engine_index) {
  return derive_seed(derive_seed(campaign_seed, attempt), 1000 + engine_index);
}

inline AttackRunRecord run_engine(const EngineConfig& engine, AttackInstance& inst, std::uint64_t seed, const FrameSet* frames,
                                  const TraceSink& trace = {}) {
  if (engine.name == "brute") return run_bruteforce(inst, engine.order, seed, trace);
  if (engine.name == "mps") {
    SweepConfig c = engine.mps;
    c.seed = seed;
    return run_mps_attack(inst, c, trace);
  }
  VariationalConfig c = engine.variational;
  c.seed = seed;
  c.sim.seed = derive_seed(seed, 2);
  const KeyLayout layout = key_layout(inst.key_bits(), c);
  const FrameSet own = frames ? FrameSet{} : default_frames(layout);
  const FrameSet& f = frames ? *frames : own;
  return engine.name == "vqaa" ? run_vqaa(inst, layout, f, c, trace) : run_vqaah(inst, layout, f, c, trace);
}

// One attempt of one engine. Engine exceptions end up in record.error.
inline AttackRunRecord run_attempt(const CampaignConfig& cfg, std::size_t attempt, std::size_t engine_index,
                                   const FrameSet* frames = nullptr, const TraceSink& trace = {}) {
  const EngineConfig& engine = cfg.engines.at(engine_index);
  const AttemptSetup s = setup_attempt(cfg, attempt);
  const std::uint64_t seed = engine_seed(cfg.seed, attempt, engine_index);
  const std::size_t budget = cfg.budget ? cfg.budget : default_budget(s.cipher.key_bits);
  PlantedInstance planted = plant_instance(s.cipher, s.free_secret, s.plaintext, budget, cfg.success);
  const auto start = std::chrono::steady_clock::now();
  AttackRunRecord rec;
  try {
    rec = run_engine(engine, planted.instance, seed, frames, trace);
  } catch (const std::exception& e) {
    rec = AttackRunRecord{};
    rec.engine = engine.name;
    rec.cipher = s.cipher.name;
    rec.key_bits = s.cipher.key_bits;
    rec.seed = seed;
    rec.iterations = planted.instance.iterations();
    rec.probe_iterations = planted.instance.probe_iterations();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.error = e.what();
    if (rec.error.empty()) rec.error = "engine failure";
  }
  rec.attempt = attempt;
  if (cfg.fixed_bits) rec.hyperparameters["fixed_bits"] = std::to_string(cfg.fixed_bits);
  if (cfg.debug_keys) rec.secret_key_hex = s.secret.to_hex();
  return rec;
}

// Records ordered by (engine, attempt).
inline std::vector<AttackRunRecord> run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  // Frames are deterministic, so building them once per engine does not
  // change results. A layout that does not fit the key is left to fail in
  // every attempt, where it is recorded.
  std::vector<std::optional<FrameSet>> frames(cfg.engines.size());
  for (std::size_t e = 0; e < cfg.engines.size(); ++e) {
    if (cfg.engines[e].name != "vqaa" && cfg.engines[e].name != "vqaah") continue;
    try {
      frames[e] = default_frames(key_layout(cfg.free_bits(), cfg.engines[e].variational));
    } catch (const ShapeError&) {
    }
  }

  const std::size_t total = cfg.engines.size() * cfg.attempts;
  std::vector<AttackRunRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t e = i / cfg.attempts;
      records[i] = run_attempt(cfg, i % cfg.attempts, e, frames[e] ? &*frames[e] : nullptr);
    }
  };
  const std::size_t n_threads = std::min(cfg.workers, total);
  if (n_threads <= 1) {
    work();
    return records;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return records;
}

// ---- configuration documents ----
//
// A document is a JSON object whose keys mirror the command-line flags with
// dashes replaced by underscores:
//   cipher, fixed_bits, attempts, budget, seed, workers, success
//   ("zero_cost" | "exact_key"), debug_keys, out, format,
//   engine, order, bond_dim, step_length, steps, temperature, cutoff,
//   reset_value, samples, layers, entangling, bits_per_qubit, qubits, learning_rate,
//   chi, kappa, tau, evolution_steps.
// An optional "engines" array holds per-engine objects; each inherits the
// top-level engine keys and may override them.

namespace config_detail {

inline const std::vector<std::string>& engine_keys() {
  static const std::vector<std::string> keys{"engine",     "order",   "bond_dim", "step_length", "steps",          "temperature",
                                             "cutoff",     "reset_value", "samples", "layers",   "entangling",     "bits_per_qubit",
                                             "learning_rate", "chi", "kappa",       "tau",      "evolution_steps", "max_iterations", "qubits"};
  return keys;
}

inline const std::vector<std::string>& campaign_keys() {
  static const std::vector<std::string> keys{"cipher", "fixed_bits", "attempts", "budget", "seed",   "workers",
                                             "success", "debug_keys", "out",      "format", "engines", "trace"};
  return keys;
}

template <class T>
T get(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: bad value for '" + key + "'");
  }
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
    throw ConfigError("config: '" + key + "' must be a non-negative integer");
  return j.at(key).get<std::size_t>();
}

inline EngineConfig engine_from_json(const nlohmann::json& j) {
  for (const auto& [k, v] : j.items())
    if (std::find(engine_keys().begin(), engine_keys().end(), k) == engine_keys().end())
      throw ConfigError("config: unknown engine key '" + k + "'");
  EngineConfig e;
  e.name = get<std::string>(j, "engine", e.name);
  const std::string order = get<std::string>(j, "order", to_string(e.order));
  if (order != "sequential" && order != "random") throw ConfigError("config: order must be sequential or random");
  e.order = order == "sequential" ? BruteOrder::sequential : BruteOrder::random_permutation;

  SweepConfig& m = e.mps;
  m.bond_dim = get_count(j, "bond_dim", m.bond_dim);
  m.step_length = get<double>(j, "step_length", m.step_length);
  m.steps = static_cast<int>(get_count(j, "steps", static_cast<std::size_t>(m.steps)));
  m.temperature = get<double>(j, "temperature", m.temperature);
  m.cutoff = get<double>(j, "cutoff", m.cutoff);
  m.reset_value = get<double>(j, "reset_value", m.reset_value);
  m.samples = static_cast<int>(get_count(j, "samples", static_cast<std::size_t>(m.samples)));
  m.max_iterations = get_count(j, "max_iterations", m.max_iterations);

  VariationalConfig& v = e.variational;
  v.layers = get_count(j, "layers", v.layers);
  v.entangling = get<bool>(j, "entangling", v.entangling);
  v.bits_per_qubit = get_count(j, "bits_per_qubit", v.bits_per_qubit);
  v.qubits = get_count(j, "qubits", v.qubits);
  v.learning_rate = get<double>(j, "learning_rate", v.learning_rate);
  v.sim.chi = get_count(j, "chi", v.sim.chi);
  v.sim.kappa = get_count(j, "kappa", v.sim.kappa);
  v.tau = get<double>(j, "tau", v.tau);
  v.evolution_steps = static_cast<int>(get_count(j, "evolution_steps", static_cast<std::size_t>(v.evolution_steps)));
  v.max_iterations = m.max_iterations;
  return e;
}

}  // namespace config_detail

struct CampaignDocument {
  CampaignConfig config;
  std::string out;              // empty: standard output
  std::string format = "csv";
  std::string trace;            // attack only: JSON-lines trace path
};

// `overrides` (usually built from command-line flags) wins over `doc`, both
// at top level and inside every "engines" entry.
inline CampaignDocument campaign_from_json(const nlohmann::json& doc, const nlohmann::json& overrides = nlohmann::json::object()) {
  using namespace config_detail;
  if (!doc.is_object() || !overrides.is_object()) throw ConfigError("config: document must be a JSON object");
  nlohmann::json top = doc;
  top.update(overrides);
  for (const auto& [k, v] : top.items())
    if (std::find(campaign_keys().begin(), campaign_keys().end(), k) == campaign_keys().end() &&
        std::find(engine_keys().begin(), engine_keys().end(), k) == engine_keys().end())
      throw ConfigError("config: unknown key '" + k + "'");

  nlohmann::json engine_defaults = nlohmann::json::object();
  nlohmann::json engine_overrides = nlohmann::json::object();
  for (const auto& k : engine_keys()) {
    if (top.contains(k)) engine_defaults[k] = top[k];
    if (overrides.contains(k)) engine_overrides[k] = overrides[k];
  }

  CampaignDocument out;
  CampaignConfig& c = out.config;
  c.cipher = get<std::string>(top, "cipher", c.cipher);
  c.fixed_bits = get_count(top, "fixed_bits", c.fixed_bits);
  c.attempts = get_count(top, "attempts", c.attempts);
  c.budget = get_count(top, "budget", c.budget);
  c.seed = get<std::uint64_t>(top, "seed", c.seed);
  c.workers = get_count(top, "workers", c.workers);
  c.debug_keys = get<bool>(top, "debug_keys", c.debug_keys);
  const std::string rule = get<std::string>(top, "success", "zero_cost");
  if (rule != "zero_cost" && rule != "exact_key") throw ConfigError("config: success must be zero_cost or exact_key");
  c.success = rule == "exact_key" ? SuccessRule::exact_key : SuccessRule::zero_cost;
  out.out = get<std::string>(top, "out", "");
  out.format = get<std::string>(top, "format", out.format);
  if (out.format != "csv" && out.format != "json") throw ConfigError("config: format must be csv or json");
  out.trace = get<std::string>(top, "trace", "");

  c.engines.clear();
  if (top.contains("engines")) {
    if (!top["engines"].is_array() || top["engines"].empty()) throw ConfigError("config: engines must be a non-empty array");
    for (const auto& entry : top["engines"]) {
      if (!entry.is_object()) throw ConfigError("config: every engines entry must be an object");
      nlohmann::json merged = engine_defaults;
      merged.update(entry);
      merged.update(engine_overrides);
      c.engines.push_back(engine_from_json(merged));
    }
  } else {
    c.engines.push_back(engine_from_json(engine_defaults));
  }
  c.validate();
  return out;
}

}  // namespace tnattack
