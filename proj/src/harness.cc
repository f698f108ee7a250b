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
#include "fingertrace/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "fingertrace/oracles.h"
#include "fingertrace/parallel.h"
#include "fingertrace/stats.h"

namespace fingertrace {
namespace {

constexpr char kRecordHeader[] =
    "trial,mu_norm_l1,excess_risk,t_hat_contribution,recall,soundness,lambda,"
    "flags_count,clip_events";

// Rounds used when alpha_target = auto.
constexpr int kSelfConsistentRounds = 3;

// Master seed of the pilot runs, disjoint from every trial substream.
std::uint64_t PilotSeed(std::uint64_t seed) {
  return SubstreamId(seed, 0, static_cast<std::uint64_t>(Purpose::kPilot));
}

void WritePreamble(const ExperimentConfig& config, std::ostringstream& out) {
  out << "# fingertrace " << ExperimentName(config.experiment) << " v1\n";
  std::istringstream lines(config.Serialize());
  for (std::string line; std::getline(lines, line);) {
    out << "# config " << line << "\n";
  }
}

void WriteSummary(std::ostringstream& out, const std::string& name,
                  double mean, double half_width) {
  out << "#summary," << name << "," << FormatDouble(mean) << ","
      << FormatDouble(half_width) << "\n";
}

void WriteSummary(std::ostringstream& out, const std::string& name,
                  const MeanCi& ci) {
  WriteSummary(out, name, ci.mean, ci.half_width);
}

void WriteRecord(std::ostringstream& out, const TrialRecord& r) {
  out << r.trial_index << "," << FormatDouble(r.mu_norm_l1) << ","
      << FormatDouble(r.excess_risk) << ","
      << FormatDouble(r.t_hat_contribution) << "," << FormatDouble(r.recall)
      << "," << FormatDouble(r.soundness) << "," << FormatDouble(r.lambda)
      << "," << r.flags_count << "," << r.clip_events << "\n";
}

template <typename Field>
MeanCi Column(const std::vector<TrialRecord>& records, Field field) {
  std::vector<double> values;
  values.reserve(records.size());
  for (const TrialRecord& r : records) values.push_back(field(r));
  return MeanWithCi(values);
}

// Summary rows shared by every TrialRecord table; `prefix` tags sweep cells.
void SummarizeRecords(std::ostringstream& out,
                      const std::vector<TrialRecord>& records,
                      const std::string& prefix) {
  WriteSummary(out, prefix + "mu_norm_l1",
               Column(records, [](const TrialRecord& r) { return r.mu_norm_l1; }));
  WriteSummary(out, prefix + "excess_risk",
               Column(records, [](const TrialRecord& r) { return r.excess_risk; }));
  WriteSummary(out, prefix + "t_hat",
               Column(records, [](const TrialRecord& r) {
                 return r.t_hat_contribution;
               }));
  WriteSummary(out, prefix + "recall",
               Column(records, [](const TrialRecord& r) { return r.recall; }));
  WriteSummary(out, prefix + "soundness",
               Column(records, [](const TrialRecord& r) { return r.soundness; }));
  WriteSummary(out, prefix + "lambda",
               Column(records, [](const TrialRecord& r) { return r.lambda; }));
  WriteSummary(out, prefix + "flags_count",
               Column(records, [](const TrialRecord& r) {
                 return static_cast<double>(r.flags_count);
               }));
  WriteSummary(out, prefix + "clip_events",
               Column(records, [](const TrialRecord& r) {
                 return static_cast<double>(r.clip_events);
               }));
}

BetaPrior MakePrior(const ExperimentConfig& config, const ProblemSpec& spec,
                    int threads, std::ostringstream& out) {
  double alpha = config.alpha_target.value_or(0.05);
  if (config.alpha_auto) {
    alpha = SelfConsistentAlpha(
        LearnerConfig::Erm(), spec, config.n, alpha, kSelfConsistentRounds,
        std::max(config.trials, 30),
        PilotSeed(config.seed), threads);
    WriteSummary(out, "alpha_self_consistent", alpha, 0.0);
  }
  BetaPrior prior = DefaultPrior(spec, alpha);
  if (config.beta) prior.beta = *config.beta;
  WriteSummary(out, "prior_beta", prior.beta, 0.0);
  WriteSummary(out, "prior_gamma", prior.gamma, 0.0);
  return prior;
}

ThresholdPolicy MakePolicy(const ExperimentConfig& config,
                           const LearnerConfig& learner,
                           const ProblemSpec& spec, const BetaPrior& prior,
                           int threads, std::ostringstream& out) {
  if (config.threshold == ThresholdKind::kNullQuantile) {
    return ThresholdPolicy::NullQuantile(config.xi);
  }
  if (config.t_hat) return ThresholdPolicy::HalfTraceValue(*config.t_hat);
  const MeanCi pilot = EstimateTraceValue(
      learner, spec, config.Tracer(), prior, config.n,
      std::max(config.trials, 30),
      PilotSeed(config.seed), threads);
  WriteSummary(out, "t_hat_pilot", pilot);
  return ThresholdPolicy::HalfTraceValue(pilot.mean);
}

std::vector<TrialRecord> RunTrials(const ExperimentConfig& config,
                                   const LearnerConfig& learner,
                                   const ProblemSpec& spec,
                                   const BetaPrior& prior,
                                   const ThresholdPolicy& policy, int threads) {
  std::vector<TrialRecord> records(config.trials);
  const TracerKind tracer = config.Tracer();
  ParallelFor(records.size(), threads, [&](std::size_t t) {
    const TraceReport report =
        RunTraceTrial(learner, spec, tracer, prior, config.n, config.m, policy,
                      config.seed, t);
    records[t] = MakeTrialRecord(t, report);
  });
  return records;
}

ExperimentOutput ExecuteVerify(const ExperimentConfig& config) {
  std::ostringstream out;
  WritePreamble(config, out);
  const VerifyGridResult grid = RunVerifyGrid();
  out << "instance,lhs,rhs,rel_error\n";
  for (const IdentityCheckResult& r : grid.checks) {
    out << r.instance_descriptor << "," << FormatDouble(r.lhs) << ","
        << FormatDouble(r.rhs) << "," << FormatDouble(r.rel_error) << "\n";
  }
  WriteSummary(out, "max_rel_error", grid.max_rel_error, 0.0);
  WriteSummary(out, "pass", grid.pass ? 1.0 : 0.0, 0.0);
  char msg[128];
  std::snprintf(msg, sizeof(msg), "verify: %zu checks, max rel_error %.3g",
                grid.checks.size(), grid.max_rel_error);
  return {out.str(), grid.pass, msg};
}

ExperimentOutput ExecuteTrace(const ExperimentConfig& config, int threads) {
  std::ostringstream out;
  WritePreamble(config, out);
  const ProblemSpec spec = config.Problem();
  const LearnerConfig learner = config.Learner();
  std::ostringstream setup;
  const BetaPrior prior = MakePrior(config, spec, threads, setup);
  const ThresholdPolicy policy =
      MakePolicy(config, learner, spec, prior, threads, setup);
  const std::vector<TrialRecord> records =
      RunTrials(config, learner, spec, prior, policy, threads);
  std::ostringstream body;
  body << kRecordHeader << "\n";
  for (const TrialRecord& r : records) WriteRecord(body, r);
  body << setup.str();
  SummarizeRecords(body, records, "");
  ExperimentOutput result;
  const MeanCi recall =
      Column(records, [](const TrialRecord& r) { return r.recall; });
  char msg[160];
  if (config.experiment == Experiment::kDpAudit) {
    const double ceiling = config.n * std::exp(config.epsilon) * config.xi +
                           config.n * config.delta;
    WriteSummary(body, "recall_ceiling", ceiling, 0.0);
    result.acceptance_ok = recall.mean <= ceiling + 4.0 * recall.half_width;
    WriteSummary(body, "pass", result.acceptance_ok ? 1.0 : 0.0, 0.0);
    std::snprintf(msg, sizeof(msg),
                  "dp_audit: mean recall %.4g +- %.3g, ceiling %.4g", recall.mean,
                  recall.half_width, ceiling);
  } else {
    std::snprintf(msg, sizeof(msg), "trace: mean recall %.4g +- %.3g of n = %d",
                  recall.mean, recall.half_width, config.n);
  }
  result.csv = out.str() + body.str();
  result.message = msg;
  return result;
}

ExperimentOutput ExecuteSweep(const ExperimentConfig& config, int threads) {
  std::ostringstream out;
  WritePreamble(config, out);
  const ProblemSpec spec = config.Problem();
  std::ostringstream summary;
  const BetaPrior prior = MakePrior(config, spec, threads, summary);
  std::ostringstream body;
  body << "epsilon,sigma," << kRecordHeader << "\n";
  struct Cell {
    double sigma;
    MeanCi recall;
  };
  std::vector<Cell> cells;
  for (double eps : config.sweep_epsilons) {
    ExperimentConfig cell = config;
    cell.epsilon = eps;
    const LearnerConfig learner = cell.Learner();
    const ThresholdPolicy policy =
        MakePolicy(cell, learner, spec, prior, threads, summary);
    const std::vector<TrialRecord> records =
        RunTrials(cell, learner, spec, prior, policy, threads);
    const double sigma = GaussianDpSigma(spec, config.n, eps, config.delta);
    for (const TrialRecord& r : records) {
      body << FormatDouble(eps) << "," << FormatDouble(sigma) << ",";
      WriteRecord(body, r);
    }
    SummarizeRecords(summary, records, "epsilon=" + FormatDouble(eps) + ":");
    cells.push_back(
        {sigma, Column(records, [](const TrialRecord& r) { return r.recall; })});
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.sigma < b.sigma; });
  bool monotone = true;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const double rise = cells[i].recall.mean - cells[i - 1].recall.mean;
    if (rise > cells[i].recall.half_width + cells[i - 1].recall.half_width) {
      monotone = false;
    }
  }
  WriteSummary(summary, "recall_nonincreasing_in_sigma", monotone ? 1.0 : 0.0,
               0.0);
  ExperimentOutput result;
  result.csv = out.str() + body.str() + summary.str();
  result.message = std::string("sweep: ") + std::to_string(cells.size()) +
                   " settings, recall non-increasing in sigma: " +
                   (monotone ? "yes" : "no");
  return result;
}

ExperimentOutput ExecuteTraceValue(const ExperimentConfig& config,
                                   int threads) {
  std::ostringstream out;
  WritePreamble(config, out);
  const ProblemSpec spec = config.Problem();
  const LearnerConfig learner = config.Learner();
  std::ostringstream setup;
  const BetaPrior prior = MakePrior(config, spec, threads, setup);
  const std::vector<double> contributions =
      TraceValueContributions(learner, spec, config.Tracer(), prior, config.n,
                              config.trials, config.seed, threads);
  out << "trial,t_hat_contribution\n";
  for (std::size_t t = 0; t < contributions.size(); ++t) {
    out << t << "," << FormatDouble(contributions[t]) << "\n";
  }
  out << setup.str();
  const MeanCi t_hat = MeanWithCi(contributions);
  const double norm = std::sqrt(static_cast<double>(config.n) / spec.d);
  WriteSummary(out, "t_hat", t_hat);
  WriteSummary(out, "t_hat_sqrt_n_over_sqrt_d", t_hat.mean * norm,
               t_hat.half_width * norm);
  char msg[128];
  std::snprintf(msg, sizeof(msg), "trace_value: T = %.4g +- %.3g (plug-in)",
                t_hat.mean, t_hat.half_width);
  return {out.str(), true, msg};
}

}  // namespace

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

TrialRecord MakeTrialRecord(std::size_t trial, const TraceReport& report) {
  TrialRecord r;
  r.trial_index = trial;
  r.mu_norm_l1 = report.mu_norm_l1;
  r.excess_risk = report.excess_risk;
  r.t_hat_contribution = report.mean_train_score;
  r.recall = report.recall_estimate;
  r.soundness = report.soundness_estimate;
  r.lambda = report.lambda;
  r.flags_count = report.fresh_flagged;
  r.clip_events = report.clip_events;
  return r;
}

ExperimentOutput Execute(const ExperimentConfig& config, int threads) {
  config.Validate();
  switch (config.experiment) {
    case Experiment::kVerify:
      return ExecuteVerify(config);
    case Experiment::kTrace:
    case Experiment::kDpAudit:
      return ExecuteTrace(config, threads);
    case Experiment::kSweep:
      return ExecuteSweep(config, threads);
    case Experiment::kTraceValue:
      return ExecuteTraceValue(config, threads);
  }
  throw ConfigError("experiment", "unknown");
}

void WriteFileAtomically(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path temp = target;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + temp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(temp, ignored);
      throw IoError("write failed for " + temp.string());
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(temp, ignored);
    throw IoError("cannot rename onto " + path + ": " + ec.message());
  }
}

int Run(const ExperimentConfig& config, int threads, std::ostream& log) {
  ExperimentOutput output;
  try {
    output = Execute(config, threads);
  } catch (const ConfigError& e) {
    log << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitAcceptanceFailure;
  }
  try {
    if (config.output == "-") {
      std::cout << output.csv << std::flush;
    } else {
      WriteFileAtomically(config.output, output.csv);
    }
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  log << output.message << "\n";
  return output.acceptance_ok ? kExitOk : kExitAcceptanceFailure;
}

}  // namespace fingertrace
