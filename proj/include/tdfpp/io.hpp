// Copyright 2026 the tdfpp authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDFPP_IO_HPP
#define TDFPP_IO_HPP

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdfpp/analysis.hpp"
#include "tdfpp/common.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/travel.hpp"

namespace tdfpp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Exit codes and logging
// ---------------------------------------------------------------------------

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitConfigError = 2;

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::kInfo;
  return level;
}

/// Applies TDFPP_LOG (error | info | debug); unset keeps the default.
inline void init_log_level_from_env() {
  const char* raw = std::getenv("TDFPP_LOG");
  if (raw == nullptr) return;
  const std::string value(raw);
  if (value == "error") {
    log_level() = LogLevel::kError;
  } else if (value == "info") {
    log_level() = LogLevel::kInfo;
  } else if (value == "debug") {
    log_level() = LogLevel::kDebug;
  } else {
    throw ConfigError("TDFPP_LOG must be one of error, info, debug (got '" +
                      value + "')");
  }
}

inline void log_message(LogLevel level, const std::string& message) {
  if (level > log_level()) return;
  const char* tag = level == LogLevel::kError   ? "error"
                    : level == LogLevel::kInfo  ? "info"
                                                : "debug";
  std::cerr << "tdfpp " << tag << ": " << message << "\n";
}

// ---------------------------------------------------------------------------
// Strict JSON field access
// ---------------------------------------------------------------------------

namespace detail {

/// Tracks which keys of one JSON object were consumed so anything left over
/// can be rejected (typo protection for config files).
class JsonFields {
 public:
  JsonFields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) {
      throw ConfigError(where_ + ": expected a JSON object");
    }
  }

  bool has(const std::string& name) const { return j_.contains(name); }

  const json& require(const std::string& name) {
    const auto it = j_.find(name);
    if (it == j_.end()) {
      throw ConfigError(where_ + ": missing required key '" + name + "'");
    }
    seen_.insert(name);
    return *it;
  }

  const json* maybe(const std::string& name) {
    const auto it = j_.find(name);
    if (it == j_.end()) return nullptr;
    seen_.insert(name);
    return &*it;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError(where_ + ": unexpected key '" + key + "'");
      }
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline double as_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

inline std::uint64_t as_u64(const json& j, const std::string& what) {
  if (!(j.is_number_unsigned() ||
        (j.is_number_integer() && j.get<std::int64_t>() >= 0))) {
    throw ConfigError(what + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline std::int64_t as_i64(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  return j.get<std::int64_t>();
}

inline std::string as_string(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError(what + " must be a string");
  return j.get<std::string>();
}

inline std::vector<std::int64_t> as_i64_array(const json& j,
                                              const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  std::vector<std::int64_t> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(as_i64(item, what + " entry"));
  return out;
}

inline std::vector<double> as_double_array(const json& j,
                                           const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(as_double(item, what + " entry"));
  return out;
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Environment spec <-> JSON
// ---------------------------------------------------------------------------

inline EnvironmentSpec environment_from_json(const json& j) {
  detail::JsonFields fields(j, "environment");
  EnvironmentSpec spec;

  const std::string kind = detail::as_string(fields.require("kind"), "kind");
  if (kind == "block") {
    spec.kind = EnvKind::kBlock;
  } else if (kind == "poisson") {
    spec.kind = EnvKind::kPoisson;
  } else {
    throw ConfigError("environment kind must be 'block' or 'poisson' (got '" +
                      kind + "')");
  }

  spec.dimension =
      static_cast<int>(detail::as_i64(fields.require("d"), "environment d"));
  spec.field.speed_bound =
      detail::as_double(fields.require("L"), "environment L");

  {
    detail::JsonFields field(fields.require("field"), "environment field");
    const std::string dist =
        detail::as_string(field.require("dist"), "field dist");
    if (dist == "uniform") {
      spec.field.dist = FieldDist::kUniform;
    } else if (dist == "two_point") {
      spec.field.dist = FieldDist::kTwoPoint;
      if (const json* p = field.maybe("low_prob")) {
        spec.field.two_point_low_prob = detail::as_double(*p, "field low_prob");
      }
    } else {
      throw ConfigError("field dist must be 'uniform' or 'two_point' (got '" +
                        dist + "')");
    }
    field.reject_unknown();
  }

  if (spec.kind == EnvKind::kBlock) {
    spec.block_period = detail::as_double(fields.require("C"), "environment C");
  } else {
    spec.renewal_rate =
        detail::as_double(fields.require("lambda"), "environment lambda");
  }
  spec.seed = detail::as_u64(fields.require("seed"), "environment seed");

  fields.reject_unknown();
  spec.validate();
  return spec;
}

inline json environment_to_json(const EnvironmentSpec& spec) {
  json j;
  j["kind"] = spec.kind == EnvKind::kBlock ? "block" : "poisson";
  j["d"] = spec.dimension;
  j["L"] = spec.field.speed_bound;
  json field;
  field["dist"] =
      spec.field.dist == FieldDist::kUniform ? "uniform" : "two_point";
  if (spec.field.dist == FieldDist::kTwoPoint) {
    field["low_prob"] = spec.field.two_point_low_prob;
  }
  j["field"] = field;
  if (spec.kind == EnvKind::kBlock) {
    j["C"] = spec.block_period;
  } else {
    j["lambda"] = spec.renewal_rate;
  }
  j["seed"] = spec.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class ExperimentKind { kSpeed, kShape, kVerify, kMixing, kOracleCheck };

inline const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSpeed: return "speed";
    case ExperimentKind::kShape: return "shape";
    case ExperimentKind::kVerify: return "verify";
    case ExperimentKind::kMixing: return "mixing";
    case ExperimentKind::kOracleCheck: return "oracle-check";
  }
  throw std::logic_error("unreachable experiment kind");
}

inline ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "speed") return ExperimentKind::kSpeed;
  if (name == "shape") return ExperimentKind::kShape;
  if (name == "verify") return ExperimentKind::kVerify;
  if (name == "mixing") return ExperimentKind::kMixing;
  if (name == "oracle-check") return ExperimentKind::kOracleCheck;
  throw ConfigError("unknown experiment '" + name + "'");
}

struct RunConfig {
  ExperimentKind kind = ExperimentKind::kVerify;
  EnvironmentSpec environment;
  TravelModel model = TravelModel::kIntegral;

  std::vector<std::int64_t> direction;  // speed
  std::vector<std::int64_t> n_grid;     // speed
  std::vector<double> t_list;           // shape
  std::uint64_t samples = 0;            // verify
  double fault_shift = 0.0;             // verify (checker self-test)
  std::vector<double> lags;             // mixing
  std::uint64_t instances = 0;          // oracle-check
  std::int64_t max_l1 = 3;              // oracle-check
  double t_max = 5.0;                   // oracle-check
  std::uint64_t replicates = 0;         // speed / shape / mixing
};

inline RunConfig run_config_from_json(const json& j, ExperimentKind kind) {
  detail::JsonFields fields(j, "config");
  RunConfig cfg;
  cfg.kind = kind;

  if (const json* name = fields.maybe("experiment")) {
    const std::string given = detail::as_string(*name, "experiment");
    if (given != experiment_name(kind)) {
      throw ConfigError("config is for experiment '" + given +
                        "' but the subcommand expects '" +
                        experiment_name(kind) + "'");
    }
  }
  cfg.environment = environment_from_json(fields.require("environment"));
  cfg.model = travel_model_from_name(
      detail::as_string(fields.require("model"), "model"));

  switch (kind) {
    case ExperimentKind::kSpeed:
      cfg.direction = detail::as_i64_array(fields.require("direction"), "direction");
      if (cfg.direction.size() !=
          static_cast<std::size_t>(cfg.environment.dimension)) {
        throw ConfigError("direction length must equal environment dimension");
      }
      cfg.n_grid = detail::as_i64_array(fields.require("n_grid"), "n_grid");
      cfg.replicates = detail::as_u64(fields.require("replicates"), "replicates");
      break;
    case ExperimentKind::kShape:
      cfg.t_list = detail::as_double_array(fields.require("t_list"), "t_list");
      cfg.replicates = detail::as_u64(fields.require("replicates"), "replicates");
      break;
    case ExperimentKind::kVerify:
      cfg.samples = detail::as_u64(fields.require("samples"), "samples");
      if (const json* shift = fields.maybe("fault_shift")) {
        cfg.fault_shift = detail::as_double(*shift, "fault_shift");
      }
      break;
    case ExperimentKind::kMixing:
      cfg.lags = detail::as_double_array(fields.require("lags"), "lags");
      cfg.replicates = detail::as_u64(fields.require("replicates"), "replicates");
      break;
    case ExperimentKind::kOracleCheck:
      cfg.instances = detail::as_u64(fields.require("instances"), "instances");
      if (const json* m = fields.maybe("max_l1")) {
        cfg.max_l1 = detail::as_i64(*m, "max_l1");
      }
      if (const json* t = fields.maybe("t_max")) {
        cfg.t_max = detail::as_double(*t, "t_max");
      }
      break;
  }
  fields.reject_unknown();
  return cfg;
}

inline json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = experiment_name(cfg.kind);
  j["environment"] = environment_to_json(cfg.environment);
  j["model"] = travel_model_name(cfg.model);
  switch (cfg.kind) {
    case ExperimentKind::kSpeed:
      j["direction"] = cfg.direction;
      j["n_grid"] = cfg.n_grid;
      j["replicates"] = cfg.replicates;
      break;
    case ExperimentKind::kShape:
      j["t_list"] = cfg.t_list;
      j["replicates"] = cfg.replicates;
      break;
    case ExperimentKind::kVerify:
      j["samples"] = cfg.samples;
      if (cfg.fault_shift != 0.0) j["fault_shift"] = cfg.fault_shift;
      break;
    case ExperimentKind::kMixing:
      j["lags"] = cfg.lags;
      j["replicates"] = cfg.replicates;
      break;
    case ExperimentKind::kOracleCheck:
      j["instances"] = cfg.instances;
      j["max_l1"] = cfg.max_l1;
      j["t_max"] = cfg.t_max;
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Payload serialization
// ---------------------------------------------------------------------------

inline json vertex_to_json(const Vertex& v) {
  json arr = json::array();
  for (int i = 0; i < v.dim(); ++i) arr.push_back(v[i]);
  return arr;
}

inline json payload_json(const SpeedEstimate& est) {
  json j;
  j["experiment"] = "speed";
  j["direction"] = vertex_to_json(est.direction);
  j["c_env"] = est.c_env;
  json rows = json::array();
  for (const auto& row : est.rows) {
    rows.push_back({{"n", row.n},
                    {"mean", row.mean},
                    {"std", row.stddev},
                    {"stderr", row.std_error},
                    {"fekete_envelope", row.envelope},
                    {"replicates", row.replicates}});
  }
  j["rows"] = rows;
  j["limit_estimate"] = est.limit_estimate;
  j["ci_half_width"] = est.ci_half_width;
  return j;
}

inline json payload_json(const ShapeEstimate& est) {
  json j;
  j["experiment"] = "shape";
  j["t_list"] = est.t_list;
  j["replicates"] = est.replicates;
  json rows = json::array();
  for (const auto& row : est.rows) {
    json r;
    r["t"] = row.t;
    r["mode"] = start_time_mode_name(row.mode);
    r["mean_inner_radius"] = row.mean_inner_radius;
    r["mean_outer_radius"] = row.mean_outer_radius;
    r["mean_point_count"] = row.mean_point_count;
    r["min_inner_radius"] = row.min_inner_radius;
    r["max_outer_radius"] = row.max_outer_radius;
    r["sandwich_ok"] = row.sandwich_ok;
    r["majority_inner_radius"] = row.majority_inner_radius;
    r["majority_outer_radius"] = row.majority_outer_radius;
    json points = json::array();
    for (const Vertex& v : row.majority_points) points.push_back(vertex_to_json(v));
    r["majority_points"] = points;
    if (row.convexity_ratio) {
      r["convexity_ratio"] = *row.convexity_ratio;
    } else {
      r["convexity_ratio"] = nullptr;
    }
    json hull = json::array();
    for (const auto& p : row.hull) hull.push_back({p[0], p[1]});
    r["hull"] = hull;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  j["per_replicate"] = {{"inner_radius", est.replicate_inner},
                        {"outer_radius", est.replicate_outer},
                        {"point_count", est.replicate_points},
                        {"nested", est.replicate_nested},
                        {"pair_discrepancy", est.pair_discrepancy}};
  j["majority_discrepancy_last_pair"] = est.majority_discrepancy_last_pair;
  return j;
}

inline json payload_json(const HypothesisReport& report, double fault_shift) {
  json j;
  j["experiment"] = "verify";
  j["tolerance"] = report.tolerance;
  j["fault_shift"] = fault_shift;
  json checks = json::array();
  for (const auto& check : report.checks) {
    json c;
    c["name"] = check.name;
    c["samples"] = check.samples;
    c["violations"] = check.violations;
    c["max_violation"] = check.max_violation;
    if (check.has_worst_seed) c["worst_seed"] = check.worst_seed;
    checks.push_back(std::move(c));
  }
  j["checks"] = checks;
  j["passed"] = report.all_passed();
  return j;
}

inline json payload_json(const MixingSeries& series) {
  json j;
  j["experiment"] = "mixing";
  j["replicates"] = series.replicates;
  json rows = json::array();
  for (std::size_t i = 0; i < series.lags.size(); ++i) {
    rows.push_back({{"lag", series.lags[i]},
                    {"empirical_cov", series.empirical[i]},
                    {"stderr", series.std_error[i]},
                    {"theoretical_cov", series.theoretical[i]}});
  }
  j["rows"] = rows;
  return j;
}

inline json payload_json(const OracleComparison& cmp) {
  json j;
  j["experiment"] = "oracle-check";
  j["instances"] = cmp.rows.size();
  j["tolerance"] = cmp.tolerance;
  j["max_abs_delta"] = cmp.max_abs_delta;
  j["mismatches"] = cmp.mismatches;
  json rows = json::array();
  for (const auto& row : cmp.rows) {
    rows.push_back({{"seed", row.seed},
                    {"a", vertex_to_json(row.a)},
                    {"b", vertex_to_json(row.b)},
                    {"t0", row.t0},
                    {"sweep", row.sweep},
                    {"brute", row.brute},
                    {"delta", row.delta}});
  }
  j["rows"] = rows;
  return j;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline std::string to_csv(const SpeedEstimate& est) {
  std::string out = "n,mean,std,stderr,fekete_envelope,replicates\n";
  for (const auto& row : est.rows) {
    out += std::to_string(row.n) + ',' + detail::format_double(row.mean) +
           ',' + detail::format_double(row.stddev) + ',' +
           detail::format_double(row.std_error) + ',' +
           detail::format_double(row.envelope) + ',' +
           std::to_string(row.replicates) + '\n';
  }
  return out;
}

inline std::string to_csv(const ShapeEstimate& est) {
  std::string out = "t,mode,inner_radius,outer_radius,n_points\n";
  for (const auto& row : est.rows) {
    out += detail::format_double(row.t) + ',' + start_time_mode_name(row.mode) +
           ',' + detail::format_double(row.mean_inner_radius) + ',' +
           detail::format_double(row.mean_outer_radius) + ',' +
           detail::format_double(row.mean_point_count) + '\n';
  }
  return out;
}

inline std::string to_csv(const MixingSeries& series) {
  std::string out = "lag,empirical_cov,stderr,theoretical_cov\n";
  for (std::size_t i = 0; i < series.lags.size(); ++i) {
    out += detail::format_double(series.lags[i]) + ',' +
           detail::format_double(series.empirical[i]) + ',' +
           detail::format_double(series.std_error[i]) + ',' +
           detail::format_double(series.theoretical[i]) + '\n';
  }
  return out;
}

inline std::string to_csv(const HypothesisReport& report) {
  std::string out = "check,samples,violations,max_violation\n";
  for (const auto& check : report.checks) {
    out += check.name + ',' + std::to_string(check.samples) + ',' +
           std::to_string(check.violations) + ',' +
           detail::format_double(check.max_violation) + '\n';
  }
  return out;
}

inline std::string to_csv(const OracleComparison& cmp) {
  std::string out = "instance,seed,t0,sweep,brute,delta\n";
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& row = cmp.rows[i];
    out += std::to_string(i) + ',' + std::to_string(row.seed) + ',' +
           detail::format_double(row.t0) + ',' +
           detail::format_double(row.sweep) + ',' +
           detail::format_double(row.brute) + ',' +
           detail::format_double(row.delta) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment dispatch
// ---------------------------------------------------------------------------

struct RunOutcome {
  json envelope;
  std::string payload_text;  // canonical payload serialization
  std::string csv_text;
  bool verification_failed = false;
  std::string failure_message;
};

inline RunOutcome run_experiment(const RunConfig& cfg, int workers) {
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t base_seed = cfg.environment.seed;

  RunOutcome out;
  std::vector<std::uint64_t> replicate_seeds;
  const auto derive_all = [&](std::uint64_t count) {
    replicate_seeds.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
      replicate_seeds.push_back(derive_seed(base_seed, r));
    }
  };

  json payload;
  switch (cfg.kind) {
    case ExperimentKind::kSpeed: {
      const Vertex e(std::span<const std::int64_t>(cfg.direction.data(),
                                                   cfg.direction.size()));
      const SpeedEstimate est =
          estimate_speed(cfg.environment, cfg.model, e, cfg.n_grid,
                         cfg.replicates, base_seed, workers);
      payload = payload_json(est);
      out.csv_text = to_csv(est);
      derive_all(cfg.replicates);
      break;
    }
    case ExperimentKind::kShape: {
      const ShapeEstimate est =
          estimate_shape(cfg.environment, cfg.model, cfg.t_list,
                         cfg.replicates, base_seed, workers);
      payload = payload_json(est);
      out.csv_text = to_csv(est);
      derive_all(cfg.replicates);
      break;
    }
    case ExperimentKind::kVerify: {
      const HypothesisReport report =
          verify_hypotheses(cfg.environment, cfg.model, cfg.samples, base_seed,
                            workers, cfg.fault_shift);
      payload = payload_json(report, cfg.fault_shift);
      out.csv_text = to_csv(report);
      if (!report.all_passed()) {
        out.verification_failed = true;
        for (const auto& check : report.checks) {
          if (check.violations == 0) continue;
          out.failure_message =
              "check '" + check.name + "' violated on " +
              std::to_string(check.violations) + "/" +
              std::to_string(check.samples) + " samples (max excess " +
              detail::format_double(check.max_violation) +
              ", reproduction seed " + std::to_string(check.worst_seed) + ")";
          break;
        }
      }
      break;
    }
    case ExperimentKind::kMixing: {
      const MixingSeries series = mixing_diagnostic(
          cfg.environment, cfg.lags, cfg.replicates, base_seed, workers);
      payload = payload_json(series);
      out.csv_text = to_csv(series);
      derive_all(cfg.replicates);
      break;
    }
    case ExperimentKind::kOracleCheck: {
      const OracleComparison cmp =
          oracle_comparison(cfg.environment, cfg.model, cfg.instances,
                            cfg.max_l1, cfg.t_max, base_seed, workers);
      payload = payload_json(cmp);
      out.csv_text = to_csv(cmp);
      for (const auto& row : cmp.rows) replicate_seeds.push_back(row.seed);
      if (cmp.mismatches != 0) {
        out.verification_failed = true;
        for (const auto& row : cmp.rows) {
          if (row.delta > cmp.tolerance) {
            out.failure_message =
                "solver/oracle mismatch of " + detail::format_double(row.delta) +
                " (reproduction seed " + std::to_string(row.seed) + ")";
            break;
          }
        }
      }
      break;
    }
  }

  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();

  out.payload_text = payload.dump();
  out.envelope["tool"] = {{"name", "tdfpp"}, {"version", kVersion}};
  out.envelope["config"] = run_config_to_json(cfg);
  out.envelope["replicate_seeds"] = replicate_seeds;
  out.envelope["wall_clock_seconds"] = elapsed;
  out.envelope["payload"] = payload;
  return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw ConfigError("cannot open '" + path + "' for writing");
  outf << text;
  outf.flush();
  if (!outf) throw ConfigError("failed while writing '" + path + "'");
}

}  // namespace tdfpp

#endif  // TDFPP_IO_HPP
