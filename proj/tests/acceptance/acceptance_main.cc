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
// Acceptance runner. With no arguments every criterion runs; otherwise only
// the listed criterion numbers. Prints one PASS/FAIL line per criterion and
// exits 0 iff all selected criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fingertrace/harness.h"
#include "fingertrace/learners.h"
#include "fingertrace/oracles.h"
#include "fingertrace/parallel.h"
#include "fingertrace/problems.h"
#include "fingertrace/stats.h"
#include "fingertrace/tracers.h"

namespace fingertrace {
namespace {

constexpr double kIdentityTol = 1e-8;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

int Threads() { return DefaultThreadCount(); }

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

struct TraceSummary {
  MeanCi recall;
  MeanCi soundness;
  double pooled_false_positive = 0.0;
};

TraceSummary RunTrials(const LearnerConfig& learner, const ProblemSpec& spec,
                       const BetaPrior& prior, std::size_t n,
                       std::size_t fresh, const ThresholdPolicy& policy,
                       int trials, std::uint64_t seed,
                       const TraceOptions& options = {}) {
  std::vector<double> recall(trials), soundness(trials);
  std::vector<std::size_t> flagged(trials);
  ParallelFor(trials, Threads(), [&](std::size_t t) {
    const TraceReport r =
        RunTraceTrial(learner, spec, TracerKind::kSparseScore, prior, n, fresh,
                      policy, seed, t, options);
    recall[t] = r.recall_estimate;
    soundness[t] = r.soundness_estimate;
    flagged[t] = r.fresh_flagged;
  });
  TraceSummary s;
  s.recall = MeanWithCi(recall);
  s.soundness = MeanWithCi(soundness);
  double total = 0.0;
  for (std::size_t f : flagged) total += static_cast<double>(f);
  s.pooled_false_positive = total / (static_cast<double>(fresh) * trials);
  return s;
}

// 1: sparse identity over the full grid in under 60 s.
Verdict SparseIdentityGrid() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  int checks = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k <= d; ++k) {
      for (const NamedLearner& l : GridLearners(d, k)) {
        for (int n = 1; n <= 2; ++n) {
          for (double beta : {1.0, 2.0, 5.0}) {
            worst = std::max(
                worst,
                VerifySparseIdentity(d, k, n, beta, l.learner, l.name)
                    .rel_error);
            ++checks;
          }
        }
      }
    }
  }
  const double elapsed = Seconds(start);
  return {worst <= kIdentityTol && elapsed < 60.0,
          Fmt("%g instances, max rel_error %.3g, %.2f s", checks, worst,
              elapsed)};
}

// 2: both sides equal 2 beta / (2 beta + 1) for A(Z) = Z at d = k = n = 1.
Verdict ClosedFormAnchor() {
  const OracleLearner identity = [](const Dataset& data) {
    return data.Mean();
  };
  double worst = 0.0;
  std::string values;
  for (double beta : {1.0, 2.0, 5.0}) {
    const IdentityCheckResult r = VerifySparseIdentity(1, 1, 1, beta, identity);
    const double closed = 2.0 * beta / (2.0 * beta + 1.0);
    worst = std::max({worst, std::abs(r.lhs - closed),
                      std::abs(r.rhs - closed)});
    values += Fmt(" %.12g", r.lhs);
  }
  return {worst <= kIdentityTol,
          "lhs" + values + Fmt(", max deviation %.3g", worst)};
}

// 3: scaling identity grid, plus gamma = 1 against the sparse oracle at k = d.
Verdict ScalingIdentityGrid() {
  double worst = 0.0, worst_cross = 0.0;
  int checks = 0;
  for (int d = 1; d <= 2; ++d) {
    for (const NamedLearner& l : GridLearners(d, d)) {
      for (int n = 1; n <= 2; ++n) {
        for (double beta : {1.0, 3.0}) {
          for (double gamma : {0.3, 0.9}) {
            worst = std::max(worst, VerifyScalingIdentity(d, n, beta, gamma,
                                                          l.learner, l.name)
                                        .rel_error);
            ++checks;
          }
          const IdentityCheckResult sparse =
              VerifySparseIdentity(d, d, n, beta, l.learner);
          const IdentityCheckResult dense =
              VerifyScalingIdentity(d, n, beta, 1.0, l.learner);
          worst_cross = std::max({worst_cross, dense.rel_error,
                                  RelativeError(sparse.lhs, dense.lhs),
                                  RelativeError(sparse.rhs, dense.rhs)});
        }
      }
    }
  }
  return {worst <= kIdentityTol && worst_cross <= kIdentityTol,
          Fmt("%g instances, max rel_error %.3g, gamma=1 vs sparse %.3g",
              checks, worst, worst_cross)};
}

// 4: ERM is traced, GaussianDp stays under the privacy ceiling.
Verdict PhaseTransition() {
  const auto start = std::chrono::steady_clock::now();
  const int d = 2048;
  const std::size_t n = 200, m = 2000;
  const int trials = 200;
  const double xi = 0.05;
  const ProblemSpec spec = ProblemSpec::BoxLp(d, 2.0, d);
  const double alpha = SelfConsistentAlpha(LearnerConfig::Erm(), spec, n, 0.05,
                                           3, 30, 401, Threads());
  const BetaPrior prior = DefaultPrior(spec, alpha);
  const ThresholdPolicy policy = ThresholdPolicy::NullQuantile(xi);
  const TraceSummary erm =
      RunTrials(LearnerConfig::Erm(), spec, prior, n, m, policy, trials, 402);
  const double eps = 0.5, delta = 1e-5;
  const TraceSummary dp = RunTrials(LearnerConfig::GaussianDp(eps, delta), spec,
                                    prior, n, m, policy, trials, 403);
  const double sound_bound = xi + 3.0 * std::sqrt(xi / m);
  const double ceiling = n * std::exp(eps) * xi + n * delta;
  const bool erm_ok =
      erm.soundness.mean <= sound_bound && erm.recall.mean >= xi * n;
  const bool dp_ok = dp.recall.mean <= ceiling + 4.0 * dp.recall.half_width;
  const double elapsed = Seconds(start);
  return {erm_ok && dp_ok && elapsed < 600.0,
          Fmt("alpha %.4g beta %.4g; erm recall %.4g soundness %.4g", alpha,
              prior.beta, erm.recall.mean, erm.soundness.mean) +
              Fmt(" (bound %.4g); dp recall %.4g +- %.3g (ceiling %.4g)",
                  sound_bound, dp.recall.mean, dp.recall.half_width, ceiling) +
              Fmt("; %.1f s", elapsed)};
}

// 5: halving alpha multiplies recall by a factor in [2, 8].
Verdict RecallAlphaScaling() {
  const int d = 4096;
  const std::size_t n = 400, m = 1000;
  const int trials = 300;
  const double alpha = 0.04;
  const ProblemSpec spec = ProblemSpec::BoxLp(d, 2.0, d);
  const ThresholdPolicy policy = ThresholdPolicy::NullQuantile(0.01);
  const TraceSummary coarse = RunTrials(
      LearnerConfig::Erm(), spec, DefaultPrior(spec, alpha), n, m, policy,
      trials, 501);
  const TraceSummary fine = RunTrials(
      LearnerConfig::Erm(), spec, DefaultPrior(spec, alpha / 2.0), n, m, policy,
      trials, 502);
  const double ratio = fine.recall.mean / coarse.recall.mean;
  return {ratio >= 2.0 && ratio <= 8.0,
          Fmt("recall %.4g at alpha %.3g, %.4g at alpha/2, ratio %.3g",
              coarse.recall.mean, alpha, fine.recall.mean, ratio)};
}

// 6: T_hat sqrt(n) / sqrt(d) stays within a 3x band across d.
Verdict TraceValueCeiling() {
  const std::size_t n = 64;
  const int trials = 500;
  double lo = INFINITY, hi = 0.0;
  std::string values;
  for (int d : {64, 256, 1024}) {
    const ProblemSpec spec = ProblemSpec::BoxLp(d, 2.0, d);
    const MeanCi t = EstimateTraceValue(
        LearnerConfig::Erm(), spec, TracerKind::kSparseScore,
        DefaultPrior(spec, 0.05), n, trials, 600 + d, Threads());
    const double scaled = t.mean * std::sqrt(static_cast<double>(n) / d);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
    values += Fmt(" d=%g:%.4g", d, scaled);
  }
  return {lo > 0.0 && hi <= 3.0 * lo,
          "T sqrt(n/d)" + values + Fmt(", band %.3g", hi / lo)};
}

// 7: the cardinality bound over random (a, beta), beta ~ U[-n, n].
Verdict CardMoments() {
  const auto start = std::chrono::steady_clock::now();
  CounterRng rng(Substream(7, 0, Purpose::kOracle));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<std::vector<double>> vectors;
  std::vector<double> betas;
  for (int t = 0; t < 10000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 32);
    std::vector<double> a(n);
    for (double& x : a) x = unit(rng);
    vectors.push_back(std::move(a));
    betas.push_back(n * unit(rng));
  }
  const CardMomentsResult r = CheckCardMoments(vectors, betas);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    const std::vector<double> one[1] = {vectors[t]};
    const double b[1] = {betas[t]};
    if (!CheckCardMoments(one, b).pass) ++violations;
  }
  const double elapsed = Seconds(start);
  std::string detail = Fmt("%g instances, %g violations, %.2f s",
                           static_cast<double>(vectors.size()),
                           static_cast<double>(violations), elapsed);
  if (!r.pass) {
    detail += Fmt("; first at index %g: beta %.4g, count %g < bound %.4g",
                  r.index, r.beta, r.count, r.bound);
  }
  return {r.pass && elapsed < 5.0, detail};
}

// 8: E|X| + CI >= gamma / (3 sqrt(beta)) on the (beta, gamma) grid.
Verdict BetaMoments() {
  CounterRng rng(Substream(8, 0, Purpose::kOracle));
  bool pass = true;
  double worst_margin = INFINITY;
  for (double beta : {1.0, 4.0, 16.0}) {
    for (double gamma : {0.25, 1.0}) {
      const BetaMomentCheck c = CheckBetaAbsMoment(beta, gamma, 100000, rng);
      pass = pass && c.pass;
      worst_margin =
          std::min(worst_margin, (c.estimate + c.half_width) / c.bound);
    }
  }
  return {pass, Fmt("6 cells, smallest (estimate + CI) / bound %.4g",
                    worst_margin)};
}

// 9: held-out false-positive rate under NullQuantile calibration.
Verdict NullCalibration() {
  const std::size_t m = 10000;
  const int trials = 10;
  const ProblemSpec spec = ProblemSpec::BoxLp(512, 2.0, 512);
  const BetaPrior prior = DefaultPrior(spec, 0.05);
  bool pass = true;
  std::string detail;
  for (double xi : {0.01, 0.05}) {
    TraceOptions options;
    options.null_samples = m;
    const TraceSummary s =
        RunTrials(LearnerConfig::Erm(), spec, prior, 64, m,
                  ThresholdPolicy::NullQuantile(xi), trials, 900, options);
    const double bound = xi + 3.0 * std::sqrt(xi * (1.0 - xi) / m);
    pass = pass && s.pooled_false_positive <= bound;
    detail += Fmt("xi=%g: rate %.5g <= %.5g; ", xi, s.pooled_false_positive,
                  bound);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// 10: byte-identical CSVs at 1 and 8 threads for every subcommand.
Verdict Determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig verify;
  verify.experiment = Experiment::kVerify;
  configs.push_back(verify);
  ExperimentConfig trace;
  trace.experiment = Experiment::kTrace;
  trace.d = 128;
  trace.n = 32;
  trace.m = 500;
  trace.trials = 24;
  trace.seed = 10;
  configs.push_back(trace);
  ExperimentConfig half = trace;
  half.threshold = ThresholdKind::kHalfTraceValue;
  half.alpha_auto = true;
  configs.push_back(half);
  ExperimentConfig l1 = trace;
  l1.variant = Variant::kL1Capped;
  l1.s = 4;
  configs.push_back(l1);
  ExperimentConfig audit = trace;
  audit.experiment = Experiment::kDpAudit;
  audit.learner = LearnerKind::kGaussianDp;
  audit.epsilon = 0.5;
  configs.push_back(audit);
  ExperimentConfig sweep = audit;
  sweep.experiment = Experiment::kSweep;
  sweep.sweep_epsilons = {0.25, 1.0, 4.0};
  configs.push_back(sweep);
  ExperimentConfig value = trace;
  value.experiment = Experiment::kTraceValue;
  value.trials = 60;
  configs.push_back(value);
  int identical = 0;
  std::string mismatched;
  for (const ExperimentConfig& c : configs) {
    if (Execute(c, 1).csv == Execute(c, 8).csv) {
      ++identical;
    } else {
      mismatched += " " + ExperimentName(c.experiment);
    }
  }
  return {mismatched.empty(),
          Fmt("%g of %g configs identical", identical,
              static_cast<double>(configs.size())) +
              (mismatched.empty() ? "" : "; differ:" + mismatched)};
}

}  // namespace
}  // namespace fingertrace

int main(int argc, char** argv) {
  using fingertrace::Verdict;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria =
      {
          {"sparse fingerprinting identity grid",
           fingertrace::SparseIdentityGrid},
          {"closed-form anchor", fingertrace::ClosedFormAnchor},
          {"scaling-matrix identity grid", fingertrace::ScalingIdentityGrid},
          {"phase transition", fingertrace::PhaseTransition},
          {"recall-alpha scaling", fingertrace::RecallAlphaScaling},
          {"trace-value ceiling", fingertrace::TraceValueCeiling},
          {"card-moments inequality", fingertrace::CardMoments},
          {"beta moment bound", fingertrace::BetaMoments},
          {"null calibration", fingertrace::NullCalibration},
          {"determinism", fingertrace::Determinism},
      };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long c = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || c < 1 || c > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-%zu]...\n", argv[0],
                   criteria.size());
      return 2;
    }
    selected.insert(static_cast<int>(c));
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s: %s\n", number, criteria[i].first,
                v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
