/*
 * Copyright 2026 The Fingertrace Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Command-line front end: one subcommand per experiment.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fingertrace/harness.h"
#include "fingertrace/parallel.h"

namespace {

using fingertrace::ExperimentConfig;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags mirror ExperimentConfig keys. Help text carries the precondition.
const std::vector<FlagSpec>& Flags() {
  static const std::vector<FlagSpec> flags = {
      {"--variant", "variant",
       "Problem family: box_lp | l1_capped | l1_counterexample"},
      {"--d", "d", "Dimension; integer >= 1"},
      {"--p", "p", "Geometry exponent of box_lp; real in [1, inf)"},
      {"--k", "k", "Data sparsity of box_lp; integer in [1, d], 0 means d"},
      {"--s", "s", "Cap of l1_capped; integer in [1, d]"},
      {"--learner", "learner",
       "erm | gaussian_dp | subsample | normalized_mean_l2 | constant"},
      {"--epsilon", "epsilon", "gaussian_dp privacy epsilon; real in (0, 10]"},
      {"--delta", "delta", "gaussian_dp privacy delta; real in (0, 1)"},
      {"--subsample-m", "subsample_m",
       "Samples used by the subsample learner; integer in [1, n]"},
      {"--tracer", "tracer", "default | sparse | scaling_matrix"},
      {"--threshold", "threshold",
       "null_quantile | half_trace_value (dp-audit needs null_quantile)"},
      {"--xi", "xi", "Target false-positive rate; real in (0, 1)"},
      {"--t-hat", "t_hat",
       "Trace value for half_trace_value (lambda = t_hat / 2); finite real. "
       "Omit to estimate it with a pilot run"},
      {"--beta", "beta",
       "Prior beta override; real > 0. Conflicts with --alpha-target"},
      {"--alpha-target", "alpha_target",
       "Target excess risk setting the prior; real > 0 (< 1/8 on l1 variants)"
       ", or 'auto' for the self-consistent ERM risk. Conflicts with --beta"},
      {"--epsilons", "sweep_epsilons",
       "Comma-separated epsilons for sweep; each in (0, 10]"},
      {"--n", "n", "Training-set size; integer >= 1"},
      {"--m", "m", "Fresh evaluation points per trial; integer >= 1"},
      {"--trials", "trials",
       "Independent trials; integer >= 1 (>= 30 for trace-value)"},
      {"--seed", "seed", "Master seed; unsigned 64-bit integer"},
      {"--output,-o", "output", "CSV path, '-' for stdout"},
  };
  return flags;
}

struct Subcommand {
  CLI::App* app;
  std::string experiment;
  std::map<std::string, std::string> values;  // key -> raw flag text
  std::string config_path;
  int threads = 0;
};

void AddCommonFlags(Subcommand& sub, bool experiment_flags) {
  sub.app->add_option("--config", sub.config_path,
                      "Config file of key = value lines; flags override it")
      ->check(CLI::ExistingFile);
  sub.app->add_option("--threads", sub.threads,
                      "Worker threads; integer >= 1. Defaults to "
                      "FINGERTRACE_THREADS, then the core count")
      ->check(CLI::PositiveNumber);
  for (const FlagSpec& f : Flags()) {
    const std::string key = f.key;
    if (!experiment_flags && key != "output") continue;
    sub.app->add_option(f.flag, sub.values[key], f.help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fingertrace: tracing attacks and fingerprinting identities for "
      "linear stochastic convex optimization"};
  app.require_subcommand(1);
  std::vector<Subcommand> subs;
  subs.reserve(5);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "Check the fingerprinting identities on the exact oracle grid"},
      {"trace", "Run the membership game and report recall and soundness"},
      {"dp-audit",
       "Trace a gaussian_dp learner and compare recall with n e^eps xi + n delta"},
      {"sweep", "Trace gaussian_dp over a list of epsilons"},
      {"trace-value", "Plug-in estimate of the trace value"},
  };
  for (const auto& [name, help] : commands) {
    Subcommand sub;
    sub.app = app.add_subcommand(name, help);
    sub.experiment = name == "dp-audit"      ? "dp_audit"
                     : name == "trace-value" ? "trace_value"
                                             : name;
    subs.push_back(std::move(sub));
    AddCommonFlags(subs.back(), name != "verify");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fingertrace::kExitUsage;
  }

  for (Subcommand& sub : subs) {
    if (!sub.app->parsed()) continue;
    ExperimentConfig config;
    try {
      if (!sub.config_path.empty()) {
        config = ExperimentConfig::Load(sub.config_path);
      } else if (sub.experiment == "dp_audit" || sub.experiment == "sweep") {
        config.Set("learner", "gaussian_dp");
      }
      config.Set("experiment", sub.experiment);
      for (const FlagSpec& f : Flags()) {
        const std::string name(f.flag);
        CLI::Option* opt = sub.app->get_option_no_throw(name.substr(0, name.find(',')));
        if (opt != nullptr && opt->count() > 0) {
          config.Set(f.key, sub.values[f.key]);
        }
      }
      config.Validate();
    } catch (const fingertrace::ConfigError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return fingertrace::kExitUsage;
    } catch (const fingertrace::IoError& e) {
      std::cerr << "I/O error: " << e.what() << "\n";
      return fingertrace::kExitIo;
    }
    const int threads =
        sub.threads > 0 ? sub.threads : fingertrace::DefaultThreadCount();
    return fingertrace::Run(config, threads, std::cerr);
  }
  return fingertrace::kExitUsage;
}
