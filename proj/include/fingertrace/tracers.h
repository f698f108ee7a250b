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
#ifndef FINGERTRACE_TRACERS_H_
#define FINGERTRACE_TRACERS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fingertrace/distributions.h"
#include "fingertrace/learners.h"
#include "fingertrace/problems.h"
#include "fingertrace/random.h"
#include "fingertrace/stats.h"

namespace fingertrace {

enum class TracerKind {
  // (d^{1/p} / sqrt(k)) <theta, z - (d/k) mu> restricted to supp(z).
  kSparseScore,
  // sqrt(s) <theta, Lambda_mu (z - mu)>, Lambda_mu^{ii} =
  // (1 - (mu_i / gamma)^2) / (1 - mu_i^2).
  kScalingMatrixScore,
};

std::string TracerName(TracerKind kind);

// A score function together with the distribution knowledge it was built
// from. The tracer is handed the true mean of the population it attacks.
struct TracerSpec {
  TracerKind kind = TracerKind::kSparseScore;
  MeanVector mu;
  int d = 1;
  int k = 1;         // kSparseScore
  double p = 2.0;    // kSparseScore
  double gamma = 1;  // kScalingMatrixScore
  int s = 1;         // kScalingMatrixScore
  double scale = 1.0;
  double clip_bound = 2.0;  // kappa; |score| <= kappa on feasible theta

  // scale = d^{1/p} / sqrt(k), kappa = 2 sqrt(k). Requires |mu_j| <= k/d.
  static TracerSpec Sparse(MeanVector mu, int k, double p);
  // scale = sqrt(s), kappa = 2 sqrt(s). Requires |mu_i| <= gamma <= 1 and
  // throws std::domain_error when some |mu_i| = 1 (Lambda is singular).
  static TracerSpec ScalingMatrix(MeanVector mu, double gamma, int s);

  // Diagonal of Lambda_mu (kScalingMatrixScore).
  std::vector<double> Lambda() const;
};

// The tracer matching a problem: sparse score on kBoxLp, scaling-matrix score
// on the l1 variants.
TracerKind DefaultTracerKind(const ProblemSpec& spec);

double ScoreSparse(const TracerSpec& tr, const ParameterPoint& theta,
                   std::span<const std::int8_t> z);
double ScoreScalingMatrix(const TracerSpec& tr, const ParameterPoint& theta,
                          std::span<const std::int8_t> z);

// Scores many points against one theta through the active kernel table.
// Scores beyond +-clip_bound are clamped and counted.
class Scorer {
 public:
  Scorer(const TracerSpec& tr, std::span<const double> theta);

  double Score(std::span<const std::int8_t> z);
  std::size_t clip_events() const { return clip_events_; }

 private:
  double scale_;
  double clip_bound_;
  std::vector<double> w_;
  std::vector<double> b_;
  std::size_t clip_events_ = 0;
};

enum class ThresholdKind { kHalfTraceValue, kNullQuantile };

struct ThresholdPolicy {
  ThresholdKind kind = ThresholdKind::kNullQuantile;
  double xi = 0.05;    // kNullQuantile
  double t_hat = 0.0;  // kHalfTraceValue

  static ThresholdPolicy NullQuantile(double xi);
  static ThresholdPolicy HalfTraceValue(double t_hat);
};

// max(1000, ceil(10 / xi)).
std::size_t NullSampleSize(double xi);

// kHalfTraceValue: t_hat / 2. kNullQuantile: the sorted null score at 0-based
// position ceil((M - 1)(1 - xi)). Throws std::invalid_argument when fewer
// than 10 / xi null scores are supplied.
double CalibrateThreshold(const ThresholdPolicy& policy,
                          std::span<const double> null_scores);

// max(A1 - n lambda, 0)^2 / A2 with A1, A2 the sum and sum of squares;
// a lower bound on |{i : a_i >= lambda}|. 0 when A2 = 0.
double RecallLowerBoundPz(std::span<const double> scores, double lambda);

struct TraceReport {
  std::vector<double> scores_train;
  std::vector<double> scores_fresh;
  double lambda = 0.0;
  std::vector<std::size_t> flagged;  // {i : scores_train[i] >= lambda}
  double recall_estimate = 0.0;      // |flagged|
  double soundness_estimate = 0.0;   // fresh false-positive rate
  std::pair<double, double> ci_halfwidths{0.0, 0.0};  // recall, soundness
  std::size_t fresh_flagged = 0;
  double recall_pz_bound = 0.0;
  double mu_norm_l1 = 0.0;
  double excess_risk = 0.0;  // NaN when the learner output is infeasible
  double mean_train_score = 0.0;
  std::size_t clip_events = 0;
};

struct TraceOptions {
  // Train on an independent draw instead of the scored sample; a control
  // whose trace value is zero in expectation.
  bool independent_training = false;
  // Null-score sample size; 0 selects NullSampleSize(xi).
  std::size_t null_samples = 0;
};

// One trial of the membership game: mu ~ prior (clipped into the population
// box), the tracer built from mu, S_n and M fresh points drawn, the learner
// trained on S_n only, lambda calibrated on an independent null sample, and
// every point scored. All randomness comes from substreams of
// (master_seed, trial).
TraceReport RunTraceTrial(const LearnerConfig& learner, const ProblemSpec& spec,
                          TracerKind tracer_kind, const BetaPrior& prior,
                          std::size_t n, std::size_t fresh,
                          const ThresholdPolicy& policy,
                          std::uint64_t master_seed, std::uint64_t trial,
                          const TraceOptions& options = {});

// Builds the tracer for one mean draw.
TracerSpec MakeTracer(TracerKind kind, const ProblemSpec& spec,
                      const BetaPrior& prior, const MeanVector& mu);

// Plug-in trace value of a fixed (learner, tracer) pair: the trial average of
// (1/n) sum_i phi(theta_hat, Z_i).
MeanCi EstimateTraceValue(const LearnerConfig& learner, const ProblemSpec& spec,
                          TracerKind tracer_kind, const BetaPrior& prior,
                          std::size_t n, int trials, std::uint64_t master_seed,
                          int threads, const TraceOptions& options = {});

// Per-trial contributions behind EstimateTraceValue.
std::vector<double> TraceValueContributions(
    const LearnerConfig& learner, const ProblemSpec& spec,
    TracerKind tracer_kind, const BetaPrior& prior, std::size_t n, int trials,
    std::uint64_t master_seed, int threads, const TraceOptions& options = {});

// beta = (k^{1/p} / (6 d^{1/p} alpha))^2, floored at 1.
double SparsePriorBeta(int k, double p, int d, double alpha);

// Prior used against `spec`: gamma = k/d with SparsePriorBeta on kBoxLp;
// gamma = 8 alpha and beta = max(1, 1 + log(d / (16 max(s, 14))) / 2) on the
// l1 variants (requires alpha < 1/8).
BetaPrior DefaultPrior(const ProblemSpec& spec, double alpha);

// Fixed point alpha = excess risk of `learner` under DefaultPrior(spec,
// alpha), by `iterations` rounds of re-measurement starting at alpha0.
double SelfConsistentAlpha(const LearnerConfig& learner,
                           const ProblemSpec& spec, std::size_t n,
                           double alpha0, int iterations, int trials,
                           std::uint64_t master_seed, int threads);

// Largest sqrt(sum_i phi(theta, Z_i)^2) found by coordinate ascent over the
// vertices of a kBoxLp Theta, from `starts` random vertices.
double MaxScoreNormHeuristic(const TracerSpec& tr, const ProblemSpec& spec,
                             const Dataset& data, int starts, CounterRng& rng);

}  // namespace fingertrace

#endif  // FINGERTRACE_TRACERS_H_
