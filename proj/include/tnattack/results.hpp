#pragma once

// Run records: aggregation, CSV / JSON serialisation and plot series.
//
// CSV layout: one header line, one line per record, then one line per
// aggregate prefixed with "# aggregate,". Fields follow RFC 4180 quoting.
// Hyperparameters are written as "key=value;key=value" in key order.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnattack/errors.hpp"
#include "tnattack/record.hpp"

namespace tnattack {

inline constexpr int kResultsSchemaVersion = 1;

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"engine",     "cipher", "key_bits", "attempt",         "seed",  "iterations",
                                             "probe_iterations", "wall_time", "hit", "resets", "hyperparameters", "error",
                                             "secret_key"};
  return cols;
}

struct Aggregate {
  std::string engine;
  std::string cipher;
  std::size_t key_bits = 0;
  std::string hyperparameters;  // encoded, identifies the configuration
  std::size_t attempts = 0;
  std::size_t hits = 0;
  std::size_t errors = 0;
  double hit_rate = 0.0;
  double mean_iterations = 0.0;  // over hits
  double median_iterations = 0.0;
  double stderr_iterations = 0.0;
  double mean_probe_iterations = 0.0;  // over hits
  double mean_wall_time = 0.0;         // over all attempts

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

inline std::string encode_hyperparameters(const Hyperparameters& h) {
  std::string out;
  for (const auto& [k, v] : h) {
    if (k.find_first_of("=;") != std::string::npos || v.find(';') != std::string::npos)
      throw ConfigError("hyperparameter names and values may not contain '=' or ';'");
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

inline Hyperparameters decode_hyperparameters(const std::string& s) {
  Hyperparameters h;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t end = std::min(s.find(';', pos), s.size());
    const std::string item = s.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed hyperparameter entry: " + item);
    h[item.substr(0, eq)] = item.substr(eq + 1);
    pos = end + 1;
  }
  return h;
}

// Groups by (engine, cipher, key_bits, hyperparameters) in first-seen order.
inline std::vector<Aggregate> aggregate(const std::vector<AttackRunRecord>& records) {
  std::vector<Aggregate> out;
  std::vector<std::vector<const AttackRunRecord*>> members;
  for (const auto& r : records) {
    const std::string hp = encode_hyperparameters(r.hyperparameters);
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.engine == r.engine && a.cipher == r.cipher && a.key_bits == r.key_bits && a.hyperparameters == hp;
    });
    if (it == out.end()) {
      out.push_back({r.engine, r.cipher, r.key_bits, hp});
      members.emplace_back();
      it = out.end() - 1;
    }
    members[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    Aggregate& a = out[g];
    std::vector<double> its;
    double probes = 0.0, time = 0.0;
    for (const auto* r : members[g]) {
      ++a.attempts;
      time += r->wall_time;
      if (!r->error.empty()) ++a.errors;
      if (r->hit) {
        its.push_back(static_cast<double>(r->iterations));
        probes += static_cast<double>(r->probe_iterations);
      }
    }
    a.hits = its.size();
    a.hit_rate = static_cast<double>(a.hits) / static_cast<double>(a.attempts);
    a.mean_wall_time = time / static_cast<double>(a.attempts);
    if (!its.empty()) {
      double sum = 0.0;
      for (double v : its) sum += v;
      a.mean_iterations = sum / static_cast<double>(its.size());
      a.mean_probe_iterations = probes / static_cast<double>(its.size());
      std::vector<double> sorted = its;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      a.median_iterations = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
      if (n > 1) {
        double ss = 0.0;
        for (double v : its) ss += (v - a.mean_iterations) * (v - a.mean_iterations);
        a.stderr_iterations = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
      }
    }
  }
  return out;
}

namespace results_detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << quote(fields[i]);
  os << '\n';
}

// Reads one CSV record (which may span lines inside quotes). Returns false at EOF.
inline bool read_row(std::istream& is, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  if (quoted) throw ConfigError("CSV: unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
  std::istringstream is(s);
  T v{};
  if (!(is >> v) || !is.eof()) throw ConfigError(std::string("CSV: bad ") + what + " value '" + s + "'");
  return v;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("CSV: bad ") + what + " value '" + s + "'");
  }
}

inline std::vector<std::string> record_fields(const AttackRunRecord& r) {
  return {r.engine,
          r.cipher,
          std::to_string(r.key_bits),
          std::to_string(r.attempt),
          std::to_string(r.seed),
          std::to_string(r.iterations),
          std::to_string(r.probe_iterations),
          format_double(r.wall_time),
          r.hit ? "1" : "0",
          std::to_string(r.resets),
          encode_hyperparameters(r.hyperparameters),
          r.error,
          r.secret_key_hex.value_or("")};
}

inline std::vector<std::string> aggregate_fields(const Aggregate& a) {
  return {"# aggregate",
          a.engine,
          a.cipher,
          std::to_string(a.key_bits),
          a.hyperparameters,
          std::to_string(a.attempts),
          std::to_string(a.hits),
          std::to_string(a.errors),
          format_double(a.hit_rate),
          format_double(a.mean_iterations),
          format_double(a.median_iterations),
          format_double(a.stderr_iterations),
          format_double(a.mean_probe_iterations),
          format_double(a.mean_wall_time)};
}

}  // namespace results_detail

inline void write_csv(std::ostream& os, const std::vector<AttackRunRecord>& records) {
  results_detail::write_row(os, csv_columns());
  for (const auto& r : records) results_detail::write_row(os, results_detail::record_fields(r));
  if (records.empty()) return;
  os << "# aggregate,engine,cipher,key_bits,hyperparameters,attempts,hits,errors,hit_rate,mean_iterations,"
        "median_iterations,stderr_iterations,mean_probe_iterations,mean_wall_time\n";
  for (const auto& a : aggregate(records)) results_detail::write_row(os, results_detail::aggregate_fields(a));
}

inline std::vector<AttackRunRecord> read_csv(std::istream& is) {
  using namespace results_detail;
  std::vector<std::string> f;
  if (!read_row(is, f) || f != csv_columns()) throw ConfigError("CSV: missing or unexpected header");
  std::vector<AttackRunRecord> out;
  while (read_row(is, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (!f.empty() && f[0].rfind("#", 0) == 0) continue;
    if (f.size() != csv_columns().size()) throw ConfigError("CSV: wrong field count");
    AttackRunRecord r;
    r.engine = f[0];
    r.cipher = f[1];
    r.key_bits = parse_number<std::size_t>(f[2], "key_bits");
    r.attempt = parse_number<std::size_t>(f[3], "attempt");
    r.seed = parse_number<std::uint64_t>(f[4], "seed");
    r.iterations = parse_number<std::size_t>(f[5], "iterations");
    r.probe_iterations = parse_number<std::size_t>(f[6], "probe_iterations");
    r.wall_time = parse_double(f[7], "wall_time");
    if (f[8] != "0" && f[8] != "1") throw ConfigError("CSV: bad hit value");
    r.hit = f[8] == "1";
    r.resets = parse_number<std::size_t>(f[9], "resets");
    r.hyperparameters = decode_hyperparameters(f[10]);
    r.error = f[11];
    if (!f[12].empty()) r.secret_key_hex = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const AttackRunRecord& r) {
  nlohmann::json j{{"engine", r.engine},
                   {"cipher", r.cipher},
                   {"key_bits", r.key_bits},
                   {"attempt", r.attempt},
                   {"seed", r.seed},
                   {"iterations", r.iterations},
                   {"probe_iterations", r.probe_iterations},
                   {"wall_time", r.wall_time},
                   {"hit", r.hit},
                   {"resets", r.resets},
                   {"hyperparameters", r.hyperparameters},
                   {"error", r.error}};
  if (r.secret_key_hex) j["secret_key"] = *r.secret_key_hex;
  return j;
}

inline AttackRunRecord record_from_json(const nlohmann::json& j) {
  try {
    AttackRunRecord r;
    r.engine = j.at("engine").get<std::string>();
    r.cipher = j.at("cipher").get<std::string>();
    r.key_bits = j.at("key_bits").get<std::size_t>();
    r.attempt = j.at("attempt").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.probe_iterations = j.at("probe_iterations").get<std::size_t>();
    r.wall_time = j.at("wall_time").get<double>();
    r.hit = j.at("hit").get<bool>();
    r.resets = j.at("resets").get<std::size_t>();
    r.hyperparameters = j.at("hyperparameters").get<Hyperparameters>();
    r.error = j.at("error").get<std::string>();
    if (j.contains("secret_key")) r.secret_key_hex = j.at("secret_key").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSON record: ") + e.what());
  }
}

inline nlohmann::json to_json(const Aggregate& a) {
  return {{"engine", a.engine},
          {"cipher", a.cipher},
          {"key_bits", a.key_bits},
          {"hyperparameters", a.hyperparameters},
          {"attempts", a.attempts},
          {"hits", a.hits},
          {"errors", a.errors},
          {"hit_rate", a.hit_rate},
          {"mean_iterations", a.mean_iterations},
          {"median_iterations", a.median_iterations},
          {"stderr_iterations", a.stderr_iterations},
          {"mean_probe_iterations", a.mean_probe_iterations},
          {"mean_wall_time", a.mean_wall_time}};
}

inline void write_json(std::ostream& os, const std::vector<AttackRunRecord>& records) {
  nlohmann::json doc{{"schema_version", kResultsSchemaVersion}, {"records", nlohmann::json::array()}, {"aggregates", nlohmann::json::array()}};
  for (const auto& r : records) doc["records"].push_back(to_json(r));
  for (const auto& a : aggregate(records)) doc["aggregates"].push_back(to_json(a));
  os << doc.dump(2) << '\n';
}

inline std::vector<AttackRunRecord> read_json(std::istream& is) {
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSON: ") + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"] != kResultsSchemaVersion)
    throw ConfigError("JSON: unsupported schema_version");
  std::vector<AttackRunRecord> out;
  for (const auto& j : doc.at("records")) out.push_back(record_from_json(j));
  return out;
}

enum class ResultFormat { csv, json };

inline ResultFormat parse_format(const std::string& s) {
  if (s == "csv") return ResultFormat::csv;
  if (s == "json") return ResultFormat::json;
  throw ConfigError("unknown format: " + s);
}

inline void emit_results(std::ostream& os, const std::vector<AttackRunRecord>& records, ResultFormat fmt) {
  if (fmt == ResultFormat::csv) write_csv(os, records);
  else write_json(os, records);
}

inline void emit_results(const std::string& path, const std::vector<AttackRunRecord>& records, ResultFormat fmt) {
  std::ofstream os(path);
  if (!os) throw std::ios_base::failure("cannot open " + path + " for writing");
  emit_results(os, records, fmt);
  if (!os) throw std::ios_base::failure("write to " + path + " failed");
}

inline std::vector<AttackRunRecord> parse_results(std::istream& is, ResultFormat fmt) {
  return fmt == ResultFormat::csv ? read_csv(is) : read_json(is);
}

// ---- plot series ----

struct SeriesPoint {
  std::string series;
  double x = 0.0;
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

enum class XAxis { qubits, key_bits };
enum class YAxis { iterations, time };

// Groups hit records by (series, x). The series name is the engine plus the
// given hyperparameter (e.g. "vqaa entangling=true"); x is the "qubits"
// hyperparameter or the key length. Records without the x value are skipped
// and reported through `warnings`.
inline std::vector<SeriesPoint> plot_data(const std::vector<AttackRunRecord>& records, XAxis x_axis, YAxis y_axis,
                                          const std::string& series_key = "entangling",
                                          std::vector<std::string>* warnings = nullptr) {
  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.hit) continue;
    double x;
    if (x_axis == XAxis::key_bits) {
      x = static_cast<double>(r.key_bits);
    } else {
      const auto it = r.hyperparameters.find("qubits");
      if (it == r.hyperparameters.end()) {
        if (warnings) warnings->push_back("record without a qubit count skipped (engine " + r.engine + ")");
        continue;
      }
      x = std::stod(it->second);
    }
    std::string name = r.engine;
    const auto s = r.hyperparameters.find(series_key);
    if (s != r.hyperparameters.end()) name += " " + series_key + "=" + s->second;
    groups[{name, x}].push_back(y_axis == YAxis::iterations ? static_cast<double>(r.iterations) : r.wall_time);
  }
  std::vector<SeriesPoint> out;
  for (const auto& [key, ys] : groups) {
    SeriesPoint p{key.first, key.second, ys.size()};
    for (double y : ys) p.mean += y;
    p.mean /= static_cast<double>(ys.size());
    if (ys.size() > 1) {
      double ss = 0.0;
      for (double y : ys) ss += (y - p.mean) * (y - p.mean);
      p.stderr_ = std::sqrt(ss / static_cast<double>(ys.size() - 1) / static_cast<double>(ys.size()));
    }
    out.push_back(p);
  }
  return out;
}

inline void write_series(std::ostream& os, const std::vector<SeriesPoint>& points) {
  os << "series,x,n,mean,stderr\n";
  for (const auto& p : points)
    results_detail::write_row(os, {p.series, results_detail::format_double(p.x), std::to_string(p.n),
                                   results_detail::format_double(p.mean), results_detail::format_double(p.stderr_)});
}

}  // namespace tnattack
