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

// Release gate for the simulator. Each criterion below prints exactly one
// PASS/FAIL line with its key numbers; the process exits nonzero if any
// criterion fails. Tolerances and seeds are pinned here on purpose: a
// criterion that silently adapts its thresholds is not a gate.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tdfpp/io.hpp"
#include "tdfpp/tdfpp.hpp"

using namespace tdfpp;

namespace {

// Pinned gate parameters.
constexpr double kOracleTolerance = 1e-9;
constexpr double kMixingSigma = 4.0;        // |emp - theory| <= 4 standard errors
constexpr double kStdHalvingFactor = 0.5;   // std at n=128 vs std at n=16
constexpr int kShapeImprovementMin = 15;    // of 20 replicates
constexpr double kBudgetOracleSeconds = 120.0;
constexpr double kBudgetMixingSeconds = 180.0;
constexpr double kBudgetSpeedSeconds = 600.0;
constexpr int kWorkers = 4;

constexpr std::uint64_t kSeedOracle = 1001;
constexpr std::uint64_t kSeedExact = 1002;
constexpr std::uint64_t kSeedVerify = 1003;
constexpr std::uint64_t kSeedMixingBlock = 1004;
constexpr std::uint64_t kSeedMixingPoisson = 1005;
constexpr std::uint64_t kSeedSpeed = 1006;
constexpr std::uint64_t kSeedShape = 1007;
constexpr std::uint64_t kSeedFault = 1008;

int g_failures = 0;

void report(int index, const char* label, bool ok, const std::string& detail) {
  std::printf("criterion %d (%s): %s (%s)\n", index, label,
              ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

EnvironmentSpec make_spec(EnvKind kind, double bound, std::uint64_t seed) {
  EnvironmentSpec spec;
  spec.kind = kind;
  spec.dimension = 2;
  spec.field.speed_bound = bound;
  spec.block_period = 1.0;
  spec.renewal_rate = 1.0;
  spec.seed = seed;
  return spec;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Sweep solver == exhaustive path enumeration on small queries.
// --------------------------------------------------------------------------
void criterion_solver_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t mismatches = 0;
  std::uint64_t queries = 0;
  double max_delta = 0.0;
  for (const EnvKind kind : {EnvKind::kBlock, EnvKind::kPoisson}) {
    for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
      const EnvironmentSpec spec = make_spec(kind, 2.0, kSeedOracle);
      const OracleComparison cmp =
          oracle_comparison(spec, model, 500, 3, 5.0,
                            kSeedOracle + static_cast<std::uint64_t>(kind) * 2 +
                                static_cast<std::uint64_t>(model),
                            kWorkers);
      mismatches += cmp.mismatches;
      queries += cmp.rows.size();
      max_delta = std::max(max_delta, cmp.max_abs_delta);
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = mismatches == 0 && max_delta <= kOracleTolerance &&
                  elapsed <= kBudgetOracleSeconds;
  report(1, "sweep solver vs exhaustive oracle", ok,
         std::to_string(queries) + " queries, max |delta| " +
             fmt("%.3g, %.1f s", max_delta, elapsed));
}

// --------------------------------------------------------------------------
// 2. Degenerate speeds: passage time is exactly the L1 distance and the
//    reachable set is exactly the discrete ball.
// --------------------------------------------------------------------------
void criterion_degenerate_exactness() {
  std::uint64_t passage_mismatches = 0;
  std::uint64_t set_mismatches = 0;
  std::uint64_t queries = 0;
  for (const EnvKind kind : {EnvKind::kBlock, EnvKind::kPoisson}) {
    for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
      const EnvironmentSpec spec = make_spec(kind, 1.0, kSeedExact);

      for (std::uint64_t i = 0; i < 100; ++i) {
        const std::uint64_t seed =
            derive_seed(kSeedExact, static_cast<std::uint64_t>(kind) * 2 +
                                        static_cast<std::uint64_t>(model),
                        i);
        detail::UnitStream vars(seed);
        const EnvironmentRealization env(spec.with_seed(seed));
        const Vertex a = detail::random_vertex(vars, 2, 4);
        Vertex b = a;
        const std::int64_t steps = vars.next_int(1, 6);
        for (std::int64_t s = 0; s < steps; ++s) {
          b = b.shifted(static_cast<int>(vars.next_int(0, 1)),
                        vars.next() < 0.5 ? -1 : 1);
        }
        if (a == b) b = a.shifted(1, 1);
        const double x = first_passage(env, model, {a, b, 0.0});
        ++queries;
        if (x != static_cast<double>(l1_distance(a, b))) ++passage_mismatches;
      }

      const EnvironmentRealization env(spec.with_seed(kSeedExact + 17));
      for (const double t : {1.0, 5.0, 10.0}) {
        const auto ball = l1_ball(Vertex{0, 0},
                                  static_cast<std::int64_t>(std::floor(t)));
        for (const auto mode :
             {StartTimeMode::kFixedZero, StartTimeMode::kDiagonal}) {
          if (reachable_set(env, model, t, mode) != ball) ++set_mismatches;
        }
      }
    }
  }
  const bool ok = passage_mismatches == 0 && set_mismatches == 0;
  report(2, "unit-speed exactness", ok,
         std::to_string(queries) + " passage queries, " +
             std::to_string(passage_mismatches) + " passage and " +
             std::to_string(set_mismatches) + " reachable-set mismatches");
}

// --------------------------------------------------------------------------
// 3 + 4. Randomized structural checks at scale: speed envelope and adjacent
// bound (criterion 3); subadditivity, delayed-start domination and FIFO
// arrivals (criterion 4), plus proof the checker catches a corrupted
// arrival function.
// --------------------------------------------------------------------------
void criteria_hypotheses() {
  constexpr std::uint64_t kSamples = 10000;
  std::uint64_t envelope_violations = 0;
  std::uint64_t adjacent_violations = 0;
  std::uint64_t subadd_violations = 0;
  std::uint64_t shift_violations = 0;
  std::uint64_t fifo_violations = 0;
  std::uint64_t combos = 0;

  for (const EnvKind kind : {EnvKind::kBlock, EnvKind::kPoisson}) {
    for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
      for (const double bound : {2.0, 4.0}) {
        const EnvironmentSpec spec = make_spec(kind, bound, kSeedVerify);
        const HypothesisReport rep = verify_hypotheses(
            spec, model, kSamples,
            kSeedVerify + 100 * combos, kWorkers);
        ++combos;
        for (const auto& check : rep.checks) {
          if (check.name == "passage_speed_envelope") {
            envelope_violations += check.violations;
          } else if (check.name == "adjacent_step_bound") {
            adjacent_violations += check.violations;
          } else if (check.name == "subadditivity") {
            subadd_violations += check.violations;
          } else if (check.name == "time_shift_domination") {
            shift_violations += check.violations;
          } else if (check.name == "fifo_arrivals") {
            fifo_violations += check.violations;
          }
        }
      }
    }
  }

  const bool bounds_ok = envelope_violations == 0 && adjacent_violations == 0;
  report(3, "two-sided speed envelope", bounds_ok,
         std::to_string(combos) + " configs x " + std::to_string(kSamples) +
             " samples, " + std::to_string(envelope_violations) +
             " envelope / " + std::to_string(adjacent_violations) +
             " adjacent-bound violations");

  // The checker must also be demonstrably able to fail: corrupt the arrival
  // function and demand a nonzero violation count.
  const HypothesisReport faulted =
      verify_hypotheses(make_spec(EnvKind::kBlock, 2.0, kSeedFault),
                        TravelModel::kIntegral, 100, kSeedFault, kWorkers, 2.0);
  std::uint64_t caught = 0;
  for (const auto& check : faulted.checks) {
    if (check.name == "fifo_arrivals") caught = check.violations;
  }

  const bool ok = subadd_violations == 0 && shift_violations == 0 &&
                  fifo_violations == 0 && caught > 0;
  report(4, "path composition, delayed starts, arrival order", ok,
         std::to_string(subadd_violations) + "/" +
             std::to_string(shift_violations) + "/" +
             std::to_string(fifo_violations) +
             " violations, fault injection flagged " + std::to_string(caught) +
             "/100");
}

// --------------------------------------------------------------------------
// 5. Covariance decay of edge speeds matches the closed forms.
// --------------------------------------------------------------------------
void criterion_mixing() {
  const auto start = std::chrono::steady_clock::now();
  constexpr std::uint64_t kReps = 100000;

  std::uint64_t bad_lags = 0;
  double worst_sigma = 0.0;
  const auto scan = [&](const MixingSeries& series) {
    for (std::size_t j = 0; j < series.lags.size(); ++j) {
      const double gap = std::abs(series.empirical[j] - series.theoretical[j]);
      const double sigmas =
          series.std_error[j] > 0.0 ? gap / series.std_error[j] : 0.0;
      worst_sigma = std::max(worst_sigma, sigmas);
      if (gap > kMixingSigma * series.std_error[j]) ++bad_lags;
    }
  };

  scan(mixing_diagnostic(make_spec(EnvKind::kBlock, 2.0, kSeedMixingBlock),
                         {0.0, 0.25, 0.5, 0.75, 1.0, 1.5}, kReps,
                         kSeedMixingBlock, kWorkers));
  scan(mixing_diagnostic(make_spec(EnvKind::kPoisson, 2.0, kSeedMixingPoisson),
                         {0.0, 0.5, 1.0, 2.0, 4.0}, kReps, kSeedMixingPoisson,
                         kWorkers));

  const double elapsed = seconds_since(start);
  const bool ok = bad_lags == 0 && elapsed <= kBudgetMixingSeconds;
  report(5, "speed covariance decay", ok,
         fmt("11 lags x %g realizations, worst gap %.2f sigma, %.1f s",
             static_cast<double>(kReps), worst_sigma, elapsed));
}

// --------------------------------------------------------------------------
// 6. Directional speed convergence, and 7. shape stabilization. Both reuse
// the experiment front end so criterion 8 can compare payload bytes.
// --------------------------------------------------------------------------
RunConfig speed_config() {
  RunConfig cfg;
  cfg.kind = ExperimentKind::kSpeed;
  cfg.environment = make_spec(EnvKind::kBlock, 2.0, kSeedSpeed);
  cfg.model = TravelModel::kIntegral;
  cfg.direction = {1, 0};
  cfg.n_grid = {16, 32, 64, 128};
  cfg.replicates = 200;
  return cfg;
}

RunConfig shape_config() {
  RunConfig cfg;
  cfg.kind = ExperimentKind::kShape;
  cfg.environment = make_spec(EnvKind::kBlock, 2.0, kSeedShape);
  cfg.model = TravelModel::kIntegral;
  cfg.t_list = {10.0, 20.0, 40.0};
  cfg.replicates = 20;
  return cfg;
}

RunOutcome criterion_speed_convergence() {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome = run_experiment(speed_config(), kWorkers);
  const double elapsed = seconds_since(start);

  const json payload = json::parse(outcome.payload_text);
  const auto& rows = payload.at("rows");
  std::vector<double> stds;
  std::vector<double> envelopes;
  for (const auto& row : rows) {
    stds.push_back(row.at("std").get<double>());
    envelopes.push_back(row.at("fekete_envelope").get<double>());
  }
  const double final_mean = rows.at(rows.size() - 1).at("mean").get<double>();

  bool std_decreasing = true;
  for (std::size_t j = 1; j < stds.size(); ++j) {
    if (!(stds[j] < stds[j - 1])) std_decreasing = false;
  }
  bool envelope_monotone = true;
  for (std::size_t j = 1; j < envelopes.size(); ++j) {
    if (envelopes[j] > envelopes[j - 1]) envelope_monotone = false;
  }
  const bool halved = stds.back() < kStdHalvingFactor * stds.front();
  const bool mean_in_range = final_mean >= 0.5 && final_mean <= 2.0;
  const bool ok = std_decreasing && halved && envelope_monotone &&
                  mean_in_range && elapsed <= kBudgetSpeedSeconds;

  report(6, "directional speed convergence", ok,
         fmt("std %.4f -> %.4f, ", stds.front(), stds.back()) +
             fmt("final mean %.4f, %.1f s", final_mean, elapsed));
  return outcome;
}

RunOutcome criterion_shape_stabilization() {
  RunOutcome outcome = run_experiment(shape_config(), kWorkers);
  const json payload = json::parse(outcome.payload_text);

  bool sandwich_ok = true;
  for (const auto& row : payload.at("rows")) {
    if (!row.at("sandwich_ok").get<bool>()) sandwich_ok = false;
  }
  bool nested_ok = true;
  for (const auto& flag : payload.at("per_replicate").at("nested")) {
    if (flag.get<int>() != 1) nested_ok = false;
  }
  const auto& discrepancy = payload.at("per_replicate").at("pair_discrepancy");
  const auto& first_pair = discrepancy.at(0);   // S_10 vs S_20
  const auto& second_pair = discrepancy.at(1);  // S_20 vs S_40
  int improved = 0;
  for (std::size_t r = 0; r < first_pair.size(); ++r) {
    if (second_pair.at(r).get<double>() < first_pair.at(r).get<double>()) {
      ++improved;
    }
  }
  const bool ok =
      sandwich_ok && nested_ok && improved >= kShapeImprovementMin;
  report(7, "reachable-set stabilization", ok,
         std::string(sandwich_ok ? "annulus ok" : "annulus violated") + ", " +
             (nested_ok ? "nesting ok" : "nesting violated") + ", sharper in " +
             std::to_string(improved) + "/20 replicates");
  return outcome;
}

// --------------------------------------------------------------------------
// 8. Worker-count independence of the exact result bytes.
// --------------------------------------------------------------------------
void criterion_determinism(const RunOutcome& speed_w4,
                           const RunOutcome& shape_w4) {
  const RunOutcome speed_w1 = run_experiment(speed_config(), 1);
  const RunOutcome shape_w1 = run_experiment(shape_config(), 1);
  const bool speed_same = speed_w1.payload_text == speed_w4.payload_text &&
                          speed_w1.csv_text == speed_w4.csv_text;
  const bool shape_same = shape_w1.payload_text == shape_w4.payload_text &&
                          shape_w1.csv_text == shape_w4.csv_text;
  report(8, "worker-count determinism", speed_same && shape_same,
         std::string("speed payload ") +
             (speed_same ? "identical" : "DIFFERS") + ", shape payload " +
             (shape_same ? "identical" : "DIFFERS") + " across 1 vs 4 workers");
}

}  // namespace

int main() {
  std::printf("acceptance gate: d=2 time-dependent first passage simulator\n");
  const auto start = std::chrono::steady_clock::now();

  criterion_solver_oracle();
  criterion_degenerate_exactness();
  criteria_hypotheses();
  criterion_mixing();
  const RunOutcome speed_outcome = criterion_speed_convergence();
  const RunOutcome shape_outcome = criterion_shape_stabilization();
  criterion_determinism(speed_outcome, shape_outcome);

  std::printf("%d/8 criteria passed in %.1f s\n", 8 - g_failures,
              seconds_since(start));
  return g_failures == 0 ? 0 : 1;
}
