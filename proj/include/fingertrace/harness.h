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
#ifndef FINGERTRACE_HARNESS_H_
#define FINGERTRACE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fingertrace/learners.h"
#include "fingertrace/problems.h"
#include "fingertrace/tracers.h"

namespace fingertrace {

enum class Experiment { kVerify, kTrace, kDpAudit, kSweep, kTraceValue };

std::string ExperimentName(Experiment e);

inline constexpr int kExitOk = 0;
inline constexpr int kExitAcceptanceFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// An invalid configuration value; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything that determines an experiment's output bytes. Thread count is
// deliberately absent.
//
// Text form: one `key = value` per line, `#` starts a comment, blank lines
// are ignored. Keys are those listed by ConfigKeys().
struct ExperimentConfig {
  Experiment experiment = Experiment::kTrace;

  Variant variant = Variant::kBoxLp;
  int d = 1024;
  double p = 2.0;
  int k = 0;  // 0 means k = d
  int s = 1;

  LearnerKind learner = LearnerKind::kErmLinear;
  double epsilon = 1.0;
  double delta = 1e-5;
  int subsample_m = 0;

  std::optional<TracerKind> tracer;  // unset: DefaultTracerKind
  ThresholdKind threshold = ThresholdKind::kNullQuantile;
  double xi = 0.05;
  std::optional<double> t_hat;         // unset: estimated by a pilot run
  std::optional<double> beta;          // overrides the prior's beta
  std::optional<double> alpha_target;  // unset with no beta: 0.05
  bool alpha_auto = false;  // alpha_target = self-consistent ERM risk
  std::vector<double> sweep_epsilons;

  int n = 64;
  int m = 1000;  // fresh evaluation points per trial
  int trials = 100;
  std::uint64_t seed = 1;
  std::string output = "-";  // "-" is stdout

  // Assigns one key from its text form. Throws ConfigError.
  void Set(std::string_view key, std::string_view value);
  // Throws ConfigError naming the first bad field.
  void Validate() const;

  // Every key in a fixed order; Parse(Serialize()) == *this.
  std::string Serialize() const;
  static ExperimentConfig Parse(std::string_view text);
  static ExperimentConfig Load(const std::string& path);

  ProblemSpec Problem() const;
  LearnerConfig Learner() const;
  TracerKind Tracer() const;

  bool operator==(const ExperimentConfig&) const = default;
};

std::vector<std::string> ConfigKeys();

// One CSV row of the trace, dp_audit and sweep experiments.
struct TrialRecord {
  std::size_t trial_index = 0;
  double mu_norm_l1 = 0.0;
  double excess_risk = 0.0;
  double t_hat_contribution = 0.0;
  double recall = 0.0;     // flagged training points, in [0, n]
  double soundness = 0.0;  // fresh false-positive rate, in [0, 1]
  double lambda = 0.0;
  std::size_t flags_count = 0;  // flagged fresh points
  std::size_t clip_events = 0;
};

TrialRecord MakeTrialRecord(std::size_t trial, const TraceReport& report);

// %.17g, with nan and inf spelled out.
std::string FormatDouble(double x);

struct ExperimentOutput {
  std::string csv;
  bool acceptance_ok = true;
  std::string message;  // one-line summary for the terminal
};

// Runs the experiment in memory. The CSV does not depend on `threads`.
// Throws ConfigError on an invalid config.
ExperimentOutput Execute(const ExperimentConfig& config, int threads);

// Writes `contents` to `path` through a temporary file and a rename.
// Throws IoError.
void WriteFileAtomically(const std::string& path, std::string_view contents);

// Execute plus output. Returns kExitOk, kExitAcceptanceFailure, kExitUsage or
// kExitIo; diagnostics go to `log`.
int Run(const ExperimentConfig& config, int threads, std::ostream& log);

}  // namespace fingertrace

#endif  // FINGERTRACE_HARNESS_H_
