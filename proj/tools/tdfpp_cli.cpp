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

// Command-line front end: one subcommand per experiment, JSON config in,
// ResultEnvelope JSON + CSV out.
//
//   tdfpp <experiment> --config cfg.json [--out DIR] [--workers K] [--seed S]
//
// Exit codes: 0 success, 1 verification failure (a hypothesis check or the
// solver/oracle comparison found a violation), 2 configuration error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdfpp/tdfpp.hpp"

namespace {

struct SubcommandState {
  CLI::App* app = nullptr;
  CLI::Option* seed_option = nullptr;
  tdfpp::ExperimentKind kind = tdfpp::ExperimentKind::kVerify;
};

int run(tdfpp::ExperimentKind kind, const std::string& config_path,
        const std::string& out_dir, int workers, bool seed_set,
        std::uint64_t seed_value) {
  using namespace tdfpp;

  if (workers < 1) throw ConfigError("--workers must be >= 1");

  RunConfig cfg = run_config_from_json(load_json_file(config_path), kind);
  if (seed_set) cfg.environment.seed = seed_value;

  log_message(LogLevel::kInfo,
              std::string("running '") + experiment_name(kind) + "' with " +
                  std::to_string(workers) + " worker(s), base seed " +
                  std::to_string(cfg.environment.seed));
  log_message(LogLevel::kDebug,
              "effective config: " + run_config_to_json(cfg).dump());

  const RunOutcome outcome = run_experiment(cfg, workers);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory '" + out_dir +
                      "': " + ec.message());
  }
  const std::string stem =
      (std::filesystem::path(out_dir) / experiment_name(kind)).string();
  write_text_file(stem + ".json", outcome.envelope.dump(2) + "\n");
  write_text_file(stem + ".csv", outcome.csv_text);
  log_message(LogLevel::kInfo, "wrote " + stem + ".json and " + stem + ".csv");

  if (outcome.verification_failed) {
    std::cerr << "verification failed: " << outcome.failure_message << "\n";
    return kExitVerificationFailure;
  }
  const double wall = outcome.envelope["wall_clock_seconds"].get<double>();
  log_message(LogLevel::kInfo,
              "done in " + std::to_string(wall) + " s");
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tdfpp;

  CLI::App app{"time-dependent first passage percolation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int workers = default_worker_count();
  std::uint64_t seed_value = 0;

  const std::vector<std::pair<ExperimentKind, const char*>> experiments = {
      {ExperimentKind::kSpeed,
       "Monte Carlo estimate of the directional passage-time speed"},
      {ExperimentKind::kShape,
       "reachable-set (limit shape) statistics over a time grid"},
      {ExperimentKind::kVerify,
       "randomized checks of the structural passage-time properties"},
      {ExperimentKind::kMixing,
       "covariance decay of edge speeds vs. the closed-form curve"},
      {ExperimentKind::kOracleCheck,
       "sweep solver vs. exhaustive path enumeration on small queries"},
  };

  std::vector<SubcommandState> subs;
  for (const auto& [kind, description] : experiments) {
    CLI::App* sub = app.add_subcommand(experiment_name(kind), description);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")
        ->capture_default_str();
    sub->add_option("--workers", workers, "parallel worker threads")
        ->capture_default_str();
    CLI::Option* seed =
        sub->add_option("--seed", seed_value, "override the config's base seed");
    subs.push_back({sub, seed, kind});
  }

  try {
    init_log_level_from_env();
    app.parse(argc, argv);

    for (const SubcommandState& state : subs) {
      if (!state.app->parsed()) continue;
      return run(state.kind, config_path, out_dir, workers,
                 state.seed_option->count() > 0, seed_value);
    }
    std::cerr << "no experiment selected\n";
    return kExitConfigError;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const OracleInfeasibleError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "verification failed: internal invariant breached: "
              << e.what() << "\n";
    return kExitVerificationFailure;
  }
}
