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
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fingertrace/harness.h"

namespace fingertrace {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key),
                      "cannot parse '" + std::string(value) + "'");
  }
  return out;
}

std::optional<double> ParseOptional(std::string_view key,
                                    std::string_view value) {
  if (value.empty()) return std::nullopt;
  return ParseNumber<double>(key, value);
}

std::vector<double> ParseList(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(ParseNumber<double>(key, Trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string ThresholdName(ThresholdKind kind) {
  return kind == ThresholdKind::kNullQuantile ? "null_quantile"
                                              : "half_trace_value";
}

std::string Optional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

}  // namespace

std::string ExperimentName(Experiment e) {
  switch (e) {
    case Experiment::kVerify:
      return "verify";
    case Experiment::kTrace:
      return "trace";
    case Experiment::kDpAudit:
      return "dp_audit";
    case Experiment::kSweep:
      return "sweep";
    case Experiment::kTraceValue:
      return "trace_value";
  }
  return "unknown";
}

std::vector<std::string> ConfigKeys() {
  return {"experiment", "variant",   "d",         "p",
          "k",          "s",         "learner",   "epsilon",
          "delta",      "subsample_m", "tracer",  "threshold",
          "xi",         "t_hat",     "beta",      "alpha_target",
          "sweep_epsilons", "n",     "m",         "trials",
          "seed",       "output"};
}

void ExperimentConfig::Set(std::string_view key, std::string_view raw) {
  const std::string_view value = Trim(raw);
  const std::string k_str(key);
  if (key == "experiment") {
    for (Experiment e : {Experiment::kVerify, Experiment::kTrace,
                         Experiment::kDpAudit, Experiment::kSweep,
                         Experiment::kTraceValue}) {
      if (value == ExperimentName(e)) {
        experiment = e;
        return;
      }
    }
    throw ConfigError(k_str, "unknown experiment '" + std::string(value) + "'");
  } else if (key == "variant") {
    for (Variant v : {Variant::kBoxLp, Variant::kL1Capped,
                      Variant::kL1Counterexample}) {
      if (value == VariantName(v)) {
        variant = v;
        return;
      }
    }
    throw ConfigError(k_str, "unknown variant '" + std::string(value) + "'");
  } else if (key == "d") {
    d = ParseNumber<int>(key, value);
  } else if (key == "p") {
    p = ParseNumber<double>(key, value);
  } else if (key == "k") {
    k = ParseNumber<int>(key, value);
  } else if (key == "s") {
    s = ParseNumber<int>(key, value);
  } else if (key == "learner") {
    for (LearnerKind l :
         {LearnerKind::kErmLinear, LearnerKind::kGaussianDp,
          LearnerKind::kSubsample, LearnerKind::kNormalizedMeanL2,
          LearnerKind::kConstant}) {
      if (value == LearnerName(l)) {
        learner = l;
        return;
      }
    }
    throw ConfigError(k_str, "unknown learner '" + std::string(value) + "'");
  } else if (key == "epsilon") {
    epsilon = ParseNumber<double>(key, value);
  } else if (key == "delta") {
    delta = ParseNumber<double>(key, value);
  } else if (key == "subsample_m") {
    subsample_m = ParseNumber<int>(key, value);
  } else if (key == "tracer") {
    if (value == "default") {
      tracer.reset();
    } else if (value == TracerName(TracerKind::kSparseScore)) {
      tracer = TracerKind::kSparseScore;
    } else if (value == TracerName(TracerKind::kScalingMatrixScore)) {
      tracer = TracerKind::kScalingMatrixScore;
    } else {
      throw ConfigError(k_str, "unknown tracer '" + std::string(value) + "'");
    }
  } else if (key == "threshold") {
    if (value == ThresholdName(ThresholdKind::kNullQuantile)) {
      threshold = ThresholdKind::kNullQuantile;
    } else if (value == ThresholdName(ThresholdKind::kHalfTraceValue)) {
      threshold = ThresholdKind::kHalfTraceValue;
    } else {
      throw ConfigError(k_str, "unknown threshold '" + std::string(value) + "'");
    }
  } else if (key == "xi") {
    xi = ParseNumber<double>(key, value);
  } else if (key == "t_hat") {
    t_hat = ParseOptional(key, value);
  } else if (key == "beta") {
    beta = ParseOptional(key, value);
  } else if (key == "alpha_target") {
    alpha_auto = value == "auto";
    alpha_target = alpha_auto ? std::nullopt : ParseOptional(key, value);
  } else if (key == "sweep_epsilons") {
    sweep_epsilons = ParseList(key, value);
  } else if (key == "n") {
    n = ParseNumber<int>(key, value);
  } else if (key == "m") {
    m = ParseNumber<int>(key, value);
  } else if (key == "trials") {
    trials = ParseNumber<int>(key, value);
  } else if (key == "seed") {
    seed = ParseNumber<std::uint64_t>(key, value);
  } else if (key == "output") {
    if (value.empty()) throw ConfigError(k_str, "must not be empty");
    output = std::string(value);
  } else {
    throw ConfigError(k_str, "unknown key");
  }
}

void ExperimentConfig::Validate() const {
  if (experiment == Experiment::kVerify) return;
  if (d < 1) throw ConfigError("d", "must be >= 1");
  if (variant == Variant::kBoxLp) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
      throw ConfigError("p", "must lie in [1, inf)");
    }
    if (k < 0 || k > d) throw ConfigError("k", "must lie in [1, d] (0 = d)");
  }
  if (variant == Variant::kL1Capped && (s < 1 || s > d)) {
    throw ConfigError("s", "must lie in [1, d]");
  }
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (m < 1) throw ConfigError("m", "must be >= 1");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (experiment == Experiment::kTraceValue && trials < 30) {
    throw ConfigError("trials", "trace_value needs >= 30 trials");
  }
  if ((experiment == Experiment::kDpAudit || experiment == Experiment::kSweep) &&
      learner != LearnerKind::kGaussianDp) {
    throw ConfigError("learner", ExperimentName(experiment) +
                                     " requires learner gaussian_dp");
  }
  if (learner == LearnerKind::kGaussianDp) {
    if (!(epsilon > 0.0 && epsilon <= 10.0)) {
      throw ConfigError("epsilon", "must lie in (0, 10]");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ConfigError("delta", "must lie in (0, 1)");
    }
  }
  if (learner == LearnerKind::kSubsample && (subsample_m < 1 || subsample_m > n)) {
    throw ConfigError("subsample_m", "must lie in [1, n]");
  }
  if (experiment == Experiment::kSweep) {
    if (sweep_epsilons.empty()) {
      throw ConfigError("sweep_epsilons", "sweep needs at least one epsilon");
    }
    for (double e : sweep_epsilons) {
      if (!(e > 0.0 && e <= 10.0)) {
        throw ConfigError("sweep_epsilons", "each epsilon must lie in (0, 10]");
      }
    }
  }
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("xi", "must lie in (0, 1)");
  if (experiment == Experiment::kDpAudit &&
      threshold != ThresholdKind::kNullQuantile) {
    throw ConfigError("threshold", "dp_audit requires null_quantile");
  }
  if (t_hat) {
    if (threshold != ThresholdKind::kHalfTraceValue) {
      throw ConfigError("t_hat", "only valid with threshold half_trace_value");
    }
    if (!std::isfinite(*t_hat)) throw ConfigError("t_hat", "must be finite");
  }
  if (beta) {
    if (alpha_target || alpha_auto) {
      throw ConfigError("beta", "conflicts with alpha_target");
    }
    if (!(*beta > 0.0) || !std::isfinite(*beta)) {
      throw ConfigError("beta", "must be > 0");
    }
  }
  if (alpha_target && !(*alpha_target > 0.0)) {
    throw ConfigError("alpha_target", "must be > 0");
  }
  if (variant != Variant::kBoxLp && alpha_target && *alpha_target >= 0.125) {
    throw ConfigError("alpha_target", "l1 variants need alpha_target < 1/8");
  }
}

std::string ExperimentConfig::Serialize() const {
  std::ostringstream out;
  std::string epsilons;
  for (std::size_t i = 0; i < sweep_epsilons.size(); ++i) {
    if (i > 0) epsilons += ",";
    epsilons += FormatDouble(sweep_epsilons[i]);
  }
  out << "experiment = " << ExperimentName(experiment) << "\n"
      << "variant = " << VariantName(variant) << "\n"
      << "d = " << d << "\n"
      << "p = " << FormatDouble(p) << "\n"
      << "k = " << k << "\n"
      << "s = " << s << "\n"
      << "learner = " << LearnerName(learner) << "\n"
      << "epsilon = " << FormatDouble(epsilon) << "\n"
      << "delta = " << FormatDouble(delta) << "\n"
      << "subsample_m = " << subsample_m << "\n"
      << "tracer = " << (tracer ? TracerName(*tracer) : "default") << "\n"
      << "threshold = " << ThresholdName(threshold) << "\n"
      << "xi = " << FormatDouble(xi) << "\n"
      << "t_hat = " << Optional(t_hat) << "\n"
      << "beta = " << Optional(beta) << "\n"
      << "alpha_target = " << (alpha_auto ? "auto" : Optional(alpha_target))
      << "\n"
      << "sweep_epsilons = " << epsilons << "\n"
      << "n = " << n << "\n"
      << "m = " << m << "\n"
      << "trials = " << trials << "\n"
      << "seed = " << seed << "\n"
      << "output = " << output << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::Parse(std::string_view text) {
  ExperimentConfig config;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    config.Set(Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig ExperimentConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

ProblemSpec ExperimentConfig::Problem() const {
  switch (variant) {
    case Variant::kBoxLp:
      return ProblemSpec::BoxLp(d, p, k == 0 ? d : k);
    case Variant::kL1Capped:
      return ProblemSpec::L1Capped(d, s);
    case Variant::kL1Counterexample:
      return ProblemSpec::L1Counterexample(d);
  }
  throw ConfigError("variant", "unknown");
}

LearnerConfig ExperimentConfig::Learner() const {
  switch (learner) {
    case LearnerKind::kErmLinear:
      return LearnerConfig::Erm();
    case LearnerKind::kGaussianDp:
      return LearnerConfig::GaussianDp(epsilon, delta);
    case LearnerKind::kSubsample:
      return LearnerConfig::Subsample(subsample_m);
    case LearnerKind::kNormalizedMeanL2:
      return LearnerConfig::NormalizedMeanL2();
    case LearnerKind::kConstant:
      return LearnerConfig::Constant(
          ParameterPoint{std::vector<double>(d, 0.0), true});
  }
  throw ConfigError("learner", "unknown");
}

TracerKind ExperimentConfig::Tracer() const {
  return tracer ? *tracer : DefaultTracerKind(Problem());
}

}  // namespace fingertrace
