// tnattack command-line front end.
//
//   tnattack attack   [flags]  one attempt per configured engine
//   tnattack campaign [flags]  full sweep
//   tnattack vectors  [--file F]
//   tnattack frame build|inspect
//   tnattack series --in F
//
// Exit codes: 0 success, 1 configuration error, 2 campaign-level failure.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tnattack/campaign.hpp"
#include "tnattack/frame.hpp"
#include "tnattack/known_answer.hpp"
#include "tnattack/results.hpp"

using namespace tnattack;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailure = 2;

class CampaignFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options that mirror config-document keys. Only flags given on the command
// line end up in the override document.
class FlagSet {
 public:
  template <class T>
  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(flag, *value, help);
    setters_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
    return opt;
  }

  CLI::Option* add_bool(CLI::App& app, const std::string& flags, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app.add_flag(flags, *value, help);
    setters_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
    return opt;
  }

  json overrides() const {
    json j = json::object();
    for (const auto& s : setters_) s(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> setters_;
};

struct RunCommand {
  FlagSet flags;
  std::string config_path;
};

void add_run_flags(CLI::App& app, RunCommand& cmd, bool campaign) {
  auto& f = cmd.flags;
  app.add_option("--config", cmd.config_path, "JSON config document; flags override it")->check(CLI::ExistingFile);
  f.add<std::string>(app, "--cipher", "cipher", "sdes | saes | blowfish | blowfish<bits>");
  f.add<std::size_t>(app, "--fixed-bits", "fixed_bits", "leading key bits revealed to the attacker");
  f.add<std::string>(app, "--engine", "engine", "brute | mps | vqaa | vqaah")->check(CLI::IsMember(engine_names()));
  f.add<std::size_t>(app, "--budget", "budget", "cipher evaluations per attempt (0: 4 * 2^k)");
  f.add<std::uint64_t>(app, "--seed", "seed", "campaign seed");
  f.add<std::string>(app, "--success", "success", "zero_cost | exact_key")->check(CLI::IsMember({"zero_cost", "exact_key"}));
  f.add<std::string>(app, "--order", "order", "brute force order: sequential | random")->check(CLI::IsMember({"sequential", "random"}));
  f.add<std::size_t>(app, "--bond-dim", "bond_dim", "MPS bond dimension");
  f.add<double>(app, "--step-length", "step_length", "MPS Adam step length");
  f.add<std::size_t>(app, "--steps", "steps", "MPS optimiser steps per link");
  f.add<double>(app, "--temperature", "temperature", "Metropolis temperature");
  f.add<double>(app, "--cutoff", "cutoff", "relative SVD truncation cutoff");
  f.add<double>(app, "--reset-value", "reset_value", "gradient norm that triggers a restart");
  f.add<std::size_t>(app, "--samples", "samples", "MPS samples per acceptance test");
  f.add<std::size_t>(app, "--layers", "layers", "VQAA circuit layers");
  f.add_bool(app, "--entangling,!--no-entangling", "entangling", "CNOT ladder / two-body terms");
  f.add<std::size_t>(app, "--bits-per-qubit", "bits_per_qubit", "key bits encoded per qubit");
  f.add<std::size_t>(app, "--qubits", "qubits", "spread the key over this many qubits (overrides --bits-per-qubit)");
  f.add<double>(app, "--learning-rate", "learning_rate", "variational Adam learning rate");
  f.add<std::size_t>(app, "--chi", "chi", "fpeps maximum bond dimension");
  f.add<std::size_t>(app, "--kappa", "kappa", "fpeps maximum vertex degree");
  f.add<double>(app, "--tau", "tau", "VQAA-h imaginary-time step");
  f.add<std::size_t>(app, "--evolution-steps", "evolution_steps", "VQAA-h imaginary-time steps");
  f.add<std::string>(app, "--out", "out", "output path (default: standard output)");
  f.add<std::string>(app, "--format", "format", "csv | json")->check(CLI::IsMember({"csv", "json"}));
  f.add_bool(app, "--debug-keys", "debug_keys", "write secret keys into the output");
  if (campaign) {
    f.add<std::size_t>(app, "--attempts", "attempts", "independent attempts");
    f.add<std::size_t>(app, "--workers", "workers", "worker threads");
  } else {
    f.add<std::string>(app, "--trace", "trace", "JSON-lines trace output path");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CampaignDocument load(const RunCommand& cmd) {
  const json doc = cmd.config_path.empty() ? json::object() : read_json_file(cmd.config_path);
  return campaign_from_json(doc, cmd.flags.overrides());
}

void write_output(const CampaignDocument& doc, const std::vector<AttackRunRecord>& records) {
  const ResultFormat fmt = parse_format(doc.format);
  try {
    if (doc.out.empty()) emit_results(std::cout, records, fmt);
    else emit_results(doc.out, records, fmt);
  } catch (const std::ios_base::failure& e) {
    throw CampaignFailure(e.what());
  }
}

void print_summary(const std::vector<AttackRunRecord>& records) {
  for (const auto& a : aggregate(records)) {
    std::fprintf(stderr, "%-6s %-12s k=%-3zu attempts=%zu hits=%zu errors=%zu mean_iterations=%.1f +- %.1f median=%.1f mean_time=%.3fs\n",
                 a.engine.c_str(), a.cipher.c_str(), a.key_bits, a.attempts, a.hits, a.errors, a.mean_iterations,
                 a.stderr_iterations, a.median_iterations, a.mean_wall_time);
  }
}

void fail_if_all_errored(const std::vector<AttackRunRecord>& records) {
  for (const auto& r : records)
    if (r.error.empty()) return;
  throw CampaignFailure("every attempt failed; first error: " + records.front().error);
}

int run_attack(const RunCommand& cmd) {
  const CampaignDocument doc = load(cmd);
  std::ofstream trace_file;
  TraceSink sink;
  if (!doc.trace.empty()) {
    trace_file.open(doc.trace);
    if (!trace_file) throw CampaignFailure("cannot open trace file " + doc.trace);
    sink = [&trace_file](const TraceEvent& e) {
      trace_file << json{{"iteration", e.iteration}, {"site", e.site},     {"cost", e.cost},
                         {"accepted", e.accepted},   {"gradient_norm", e.gradient_norm}, {"reset", e.reset}}
                        .dump()
                 << '\n';
    };
  }
  std::vector<AttackRunRecord> records;
  for (std::size_t e = 0; e < doc.config.engines.size(); ++e) records.push_back(run_attempt(doc.config, 0, e, nullptr, sink));
  fail_if_all_errored(records);
  write_output(doc, records);
  print_summary(records);
  return kExitOk;
}

int run_campaign_command(const RunCommand& cmd) {
  const CampaignDocument doc = load(cmd);
  const auto records = run_campaign(doc.config);
  fail_if_all_errored(records);
  write_output(doc, records);
  print_summary(records);
  return kExitOk;
}

int run_vectors(const std::string& file) {
  std::vector<KnownAnswer> vectors;
  if (file.empty()) {
    std::istringstream in(kBuiltinKnownAnswers);
    vectors = parse_known_answers(in);
  } else {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read " + file);
    try {
      vectors = parse_known_answers(in);
    } catch (const ShapeError& e) {
      throw ConfigError(e.what());
    }
  }
  std::size_t failed = 0;
  for (const auto& v : vectors) {
    KnownAnswerResult r;
    try {
      r = check_known_answer(v);
    } catch (const std::exception& e) {
      throw ConfigError(v.cipher + " " + v.key_hex + ": " + e.what());
    }
    failed += !r.passed();
    std::printf("%s %-8s key=%s pt=%s ct=%s got=%s\n", r.passed() ? "PASS" : "FAIL", v.cipher.c_str(), v.key_hex.c_str(),
                v.plaintext_hex.c_str(), v.ciphertext_hex.c_str(), r.actual_hex.c_str());
  }
  std::printf("%zu/%zu vectors passed\n", vectors.size() - failed, vectors.size());
  return failed ? kExitFailure : kExitOk;
}

void print_frame_summary(const StateFrame& f) {
  std::printf("qubits %zu states %zu bits_per_group %zu\n", f.qubits(), f.k, f.bits_per_group);
  std::printf("objective %.12g tight_frame_bound %.12g\n", f.objective, tight_frame_bound(f.dim, f.k));
  const MatrixC gram = f.columns.adjoint() * f.columns;
  double max_overlap = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) max_overlap = std::max(max_overlap, std::abs(gram(i, j)));
  std::printf("max_overlap %.12g\n", max_overlap);
}

int run_frame_build(std::size_t qubits, std::size_t states, std::uint64_t seed, const std::string& out) {
  StateFrame f;
  try {
    f = build_frame(qubits, states, seed);
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  } catch (const FrameOptimizationError& e) {
    throw CampaignFailure(e.what());
  }
  if (out.empty()) {
    write_frame(std::cout, f);
  } else {
    std::ofstream os(out);
    if (!os) throw CampaignFailure("cannot open " + out + " for writing");
    write_frame(os, f);
  }
  std::fflush(stdout);
  print_frame_summary(f);
  return kExitOk;
}

int run_frame_inspect(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    print_frame_summary(read_frame(in));
  } catch (const ShapeError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return kExitOk;
}

int run_series(const std::string& in_path, std::string in_format, const std::string& x, const std::string& y,
               const std::string& group, const std::string& out) {
  if (in_format.empty()) in_format = in_path.size() >= 5 && in_path.substr(in_path.size() - 5) == ".json" ? "json" : "csv";
  std::ifstream in(in_path);
  if (!in) throw ConfigError("cannot read " + in_path);
  const auto records = parse_results(in, parse_format(in_format));
  std::vector<std::string> warnings;
  const auto points = plot_data(records, x == "qubits" ? XAxis::qubits : XAxis::key_bits,
                                y == "iterations" ? YAxis::iterations : YAxis::time, group, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (out.empty()) {
    write_series(std::cout, points);
  } else {
    std::ofstream os(out);
    if (!os) throw CampaignFailure("cannot open " + out + " for writing");
    write_series(os, points);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Known-plaintext key recovery with tensor-network and variational attacks"};
  app.require_subcommand(1);

  RunCommand attack_cmd, campaign_cmd;
  auto* attack = app.add_subcommand("attack", "run one attempt per configured engine");
  add_run_flags(*attack, attack_cmd, false);
  auto* campaign = app.add_subcommand("campaign", "run a seeded multi-attempt campaign");
  add_run_flags(*campaign, campaign_cmd, true);

  std::string vectors_file;
  auto* vectors = app.add_subcommand("vectors", "check cipher known-answer vectors");
  vectors->add_option("--file", vectors_file, "fixture file (default: built-in vectors)");

  auto* frame = app.add_subcommand("frame", "build or inspect non-orthogonal state frames");
  frame->require_subcommand(1);
  std::size_t frame_qubits = 1, frame_states = 4;
  std::uint64_t frame_seed = 0;
  std::string frame_out, frame_in;
  auto* build = frame->add_subcommand("build", "optimise a frame and write it");
  build->add_option("--qubits", frame_qubits, "qubits per frame state")->check(CLI::Range(1, 6));
  build->add_option("--states", frame_states, "number of states (power of two)");
  build->add_option("--seed", frame_seed, "restart seed");
  build->add_option("--out", frame_out, "output path (default: standard output)");
  auto* inspect = frame->add_subcommand("inspect", "summarise a frame file");
  inspect->add_option("file", frame_in, "frame file")->required();

  std::string series_in, series_format, series_x = "qubits", series_y = "iterations", series_group = "entangling", series_out;
  auto* series = app.add_subcommand("series", "reduce results to plot series");
  series->add_option("--in", series_in, "results file")->required();
  series->add_option("--in-format", series_format, "csv | json (default: by extension)")->check(CLI::IsMember({"csv", "json"}));
  series->add_option("--x", series_x, "qubits | key_bits")->check(CLI::IsMember({"qubits", "key_bits"}));
  series->add_option("--y", series_y, "iterations | time")->check(CLI::IsMember({"iterations", "time"}));
  series->add_option("--group", series_group, "hyperparameter that separates series");
  series->add_option("--out", series_out, "output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*attack) return run_attack(attack_cmd);
    if (*campaign) return run_campaign_command(campaign_cmd);
    if (*vectors) return run_vectors(vectors_file);
    if (*build) return run_frame_build(frame_qubits, frame_states, frame_seed, frame_out);
    if (*inspect) return run_frame_inspect(frame_in);
    if (*series) return run_series(series_in, series_format, series_x, series_y, series_group, series_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const CampaignFailure& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitFailure;
  }
  return kExitConfig;
}
