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
#include "fingertrace/tracers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fingertrace/kernels.h"
#include "fingertrace/parallel.h"

namespace fingertrace {
namespace {

// Rows per bulk draw when streaming fresh and null points.
constexpr std::size_t kChunkRows = 256;

void CheckTernary(std::span<const std::int8_t> z, int d) {
  if (static_cast<int>(z.size()) != d) {
    throw std::invalid_argument("score: dimension mismatch");
  }
  for (std::int8_t v : z) {
    if (v < -1 || v > 1) {
      throw std::invalid_argument("score: entries must be in {-1,0,1}");
    }
  }
}

// Per-coordinate score weights: score = scale * sum_j z_j w_j - |z_j| b_j.
void ScoreWeights(const TracerSpec& tr, std::span<const double> theta,
                  std::vector<double>* w, std::vector<double>* b) {
  w->assign(theta.begin(), theta.end());
  b->resize(theta.size());
  if (tr.kind == TracerKind::kSparseScore) {
    const double c = static_cast<double>(tr.d) / tr.k;
    for (int j = 0; j < tr.d; ++j) (*b)[j] = theta[j] * c * tr.mu.values[j];
  } else {
    const std::vector<double> lambda = tr.Lambda();
    for (int j = 0; j < tr.d; ++j) {
      (*w)[j] = theta[j] * lambda[j];
      (*b)[j] = (*w)[j] * tr.mu.values[j];
    }
  }
}

// Streams `count` draws from pop through scorer into out.
void ScoreFreshDraws(const SparsePopulation& pop, CounterRng& rng,
                     std::size_t count, Scorer& scorer,
                     std::vector<double>* out) {
  out->clear();
  out->reserve(count);
  Dataset chunk(pop.d());
  for (std::size_t done = 0; done < count; done += kChunkRows) {
    const std::size_t rows = std::min(kChunkRows, count - done);
    pop.SampleDataset(rng, rows, &chunk);
    for (std::size_t i = 0; i < rows; ++i) {
      out->push_back(scorer.Score(chunk.row(i)));
    }
  }
}

struct TrialSetup {
  MeanVector mu;
  TracerSpec tracer;
  Dataset train;
  ParameterPoint theta;
};

TrialSetup SetUpTrial(const LearnerConfig& learner, const ProblemSpec& spec,
                      TracerKind tracer_kind, const BetaPrior& prior,
                      std::size_t n, std::uint64_t master_seed,
                      std::uint64_t trial, const TraceOptions& options) {
  CounterRng prior_rng = Substream(master_seed, trial, Purpose::kPrior);
  CounterRng data_rng = Substream(master_seed, trial, Purpose::kTrainData);
  CounterRng learner_rng = Substream(master_seed, trial, Purpose::kLearner);
  BetaPrior p = prior;
  p.d = spec.d;
  MeanVector mu = ClipToPopulationBox(spec, SamplePrior(p, prior_rng));
  const SparsePopulation pop(mu, spec.data_sparsity());
  TracerSpec tracer = MakeTracer(tracer_kind, spec, prior, mu);
  Dataset train(spec.d);
  pop.SampleDataset(data_rng, n, &train);
  ParameterPoint theta;
  if (options.independent_training) {
    CounterRng other_rng =
        Substream(master_seed, trial, Purpose::kIndependentData);
    Dataset other(spec.d);
    pop.SampleDataset(other_rng, n, &other);
    theta = Train(learner, spec, other, learner_rng);
  } else {
    theta = Train(learner, spec, train, learner_rng);
  }
  return {std::move(mu), std::move(tracer), std::move(train), std::move(theta)};
}

}  // namespace

std::string TracerName(TracerKind kind) {
  return kind == TracerKind::kSparseScore ? "sparse" : "scaling_matrix";
}

TracerSpec TracerSpec::Sparse(MeanVector mu, int k, double p) {
  TracerSpec tr;
  tr.kind = TracerKind::kSparseScore;
  tr.d = static_cast<int>(mu.dim());
  if (k < 1 || k > tr.d) {
    throw std::invalid_argument("TracerSpec: k must lie in [1, d]");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("TracerSpec: p must be >= 1");
  mu.box_bound = static_cast<double>(k) / tr.d;
  mu.Validate();
  tr.mu = std::move(mu);
  tr.k = k;
  tr.p = p;
  tr.scale = std::pow(tr.d, 1.0 / p) / std::sqrt(static_cast<double>(k));
  tr.clip_bound = 2.0 * std::sqrt(static_cast<double>(k));
  return tr;
}

TracerSpec TracerSpec::ScalingMatrix(MeanVector mu, double gamma, int s) {
  TracerSpec tr;
  tr.kind = TracerKind::kScalingMatrixScore;
  tr.d = static_cast<int>(mu.dim());
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("TracerSpec: gamma must lie in (0, 1]");
  }
  if (s < 1) throw std::invalid_argument("TracerSpec: s must be >= 1");
  mu.box_bound = gamma;
  mu.Validate();
  for (double m : mu.values) {
    if (std::abs(m) >= 1.0) {
      throw std::domain_error("TracerSpec: |mu_i| = 1 makes Lambda singular");
    }
  }
  tr.mu = std::move(mu);
  tr.gamma = gamma;
  tr.s = s;
  tr.scale = std::sqrt(static_cast<double>(s));
  tr.clip_bound = 2.0 * std::sqrt(static_cast<double>(s));
  return tr;
}

std::vector<double> TracerSpec::Lambda() const {
  std::vector<double> lambda(d, 1.0);
  if (kind != TracerKind::kScalingMatrixScore) return lambda;
  for (int i = 0; i < d; ++i) {
    const double m = mu.values[i];
    const double r = m / gamma;
    lambda[i] = (1.0 - r * r) / (1.0 - m * m);
  }
  return lambda;
}

TracerKind DefaultTracerKind(const ProblemSpec& spec) {
  return spec.variant == Variant::kBoxLp ? TracerKind::kSparseScore
                                         : TracerKind::kScalingMatrixScore;
}

double ScoreSparse(const TracerSpec& tr, const ParameterPoint& theta,
                   std::span<const std::int8_t> z) {
  if (tr.kind != TracerKind::kSparseScore) {
    throw std::invalid_argument("ScoreSparse: tracer is not a sparse score");
  }
  if (static_cast<int>(theta.theta.size()) != tr.d) {
    throw std::invalid_argument("ScoreSparse: dimension mismatch");
  }
  CheckTernary(z, tr.d);
  const double c = static_cast<double>(tr.d) / tr.k;
  double sum = 0.0;
  for (int j = 0; j < tr.d; ++j) {
    if (z[j] != 0) sum += theta.theta[j] * (z[j] - c * tr.mu.values[j]);
  }
  return std::clamp(tr.scale * sum, -tr.clip_bound, tr.clip_bound);
}

double ScoreScalingMatrix(const TracerSpec& tr, const ParameterPoint& theta,
                          std::span<const std::int8_t> z) {
  if (tr.kind != TracerKind::kScalingMatrixScore) {
    throw std::invalid_argument("ScoreScalingMatrix: wrong tracer kind");
  }
  if (static_cast<int>(theta.theta.size()) != tr.d) {
    throw std::invalid_argument("ScoreScalingMatrix: dimension mismatch");
  }
  CheckTernary(z, tr.d);
  const std::vector<double> lambda = tr.Lambda();
  double sum = 0.0;
  for (int i = 0; i < tr.d; ++i) {
    sum += theta.theta[i] * lambda[i] * (z[i] - tr.mu.values[i]);
  }
  return std::clamp(tr.scale * sum, -tr.clip_bound, tr.clip_bound);
}

Scorer::Scorer(const TracerSpec& tr, std::span<const double> theta)
    : scale_(tr.scale), clip_bound_(tr.clip_bound) {
  if (static_cast<int>(theta.size()) != tr.d) {
    throw std::invalid_argument("Scorer: dimension mismatch");
  }
  ScoreWeights(tr, theta, &w_, &b_);
}

double Scorer::Score(std::span<const std::int8_t> z) {
  const double raw =
      scale_ * ActiveKernels().ternary_affine_dot(z.data(), w_.data(),
                                                  b_.data(), w_.size());
  if (std::abs(raw) > clip_bound_) {
    ++clip_events_;
    return std::clamp(raw, -clip_bound_, clip_bound_);
  }
  return raw;
}

ThresholdPolicy ThresholdPolicy::NullQuantile(double xi) {
  if (!(xi > 0.0 && xi < 1.0)) {
    throw std::invalid_argument("ThresholdPolicy: xi must lie in (0, 1)");
  }
  return {ThresholdKind::kNullQuantile, xi, 0.0};
}

ThresholdPolicy ThresholdPolicy::HalfTraceValue(double t_hat) {
  if (!std::isfinite(t_hat)) {
    throw std::invalid_argument("ThresholdPolicy: t_hat must be finite");
  }
  return {ThresholdKind::kHalfTraceValue, 0.05, t_hat};
}

std::size_t NullSampleSize(double xi) {
  return std::max<std::size_t>(1000,
                               static_cast<std::size_t>(std::ceil(10.0 / xi)));
}

double CalibrateThreshold(const ThresholdPolicy& policy,
                          std::span<const double> null_scores) {
  if (policy.kind == ThresholdKind::kHalfTraceValue) {
    if (!std::isfinite(policy.t_hat)) {
      throw std::invalid_argument("CalibrateThreshold: t_hat not finite");
    }
    return policy.t_hat / 2.0;
  }
  if (!(policy.xi > 0.0 && policy.xi < 1.0)) {
    throw std::invalid_argument("CalibrateThreshold: xi must lie in (0, 1)");
  }
  const double m = static_cast<double>(null_scores.size());
  if (null_scores.empty() || m * policy.xi < 10.0 - 1e-9) {
    throw std::invalid_argument(
        "CalibrateThreshold: need at least 10 / xi null scores");
  }
  std::vector<double> sorted(null_scores.begin(), null_scores.end());
  const auto pos = static_cast<std::size_t>(
      std::ceil((m - 1.0) * (1.0 - policy.xi) - 1e-12));
  std::nth_element(sorted.begin(), sorted.begin() + pos, sorted.end());
  return sorted[pos];
}

double RecallLowerBoundPz(std::span<const double> scores, double lambda) {
  double a1 = 0.0;
  double a2 = 0.0;
  for (double a : scores) {
    a1 += a;
    a2 += a * a;
  }
  if (a2 == 0.0) return 0.0;
  const double beta = static_cast<double>(scores.size()) * lambda;
  const double excess = std::max(a1 - beta, 0.0);
  return excess * excess / a2;
}

TracerSpec MakeTracer(TracerKind kind, const ProblemSpec& spec,
                      const BetaPrior& prior, const MeanVector& mu) {
  if (kind == TracerKind::kSparseScore) {
    const double p = spec.variant == Variant::kBoxLp ? spec.p : 1.0;
    return TracerSpec::Sparse(mu, spec.data_sparsity(), p);
  }
  const int s = spec.variant == Variant::kL1Capped ? spec.s : 1;
  return TracerSpec::ScalingMatrix(mu, prior.gamma, s);
}

TraceReport RunTraceTrial(const LearnerConfig& learner, const ProblemSpec& spec,
                          TracerKind tracer_kind, const BetaPrior& prior,
                          std::size_t n, std::size_t fresh,
                          const ThresholdPolicy& policy,
                          std::uint64_t master_seed, std::uint64_t trial,
                          const TraceOptions& options) {
  if (n < 1 || fresh < 1) {
    throw std::invalid_argument("RunTraceTrial: n and M must be >= 1");
  }
  TrialSetup setup = SetUpTrial(learner, spec, tracer_kind, prior, n,
                                master_seed, trial, options);
  const SparsePopulation pop(setup.mu, spec.data_sparsity());
  Scorer scorer(setup.tracer, setup.theta.theta);

  TraceReport report;
  report.scores_train.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.scores_train.push_back(scorer.Score(setup.train.row(i)));
  }

  std::vector<double> null_scores;
  if (policy.kind == ThresholdKind::kNullQuantile) {
    const std::size_t m_cal = options.null_samples > 0
                                  ? options.null_samples
                                  : NullSampleSize(policy.xi);
    CounterRng null_rng = Substream(master_seed, trial, Purpose::kNullData);
    ScoreFreshDraws(pop, null_rng, m_cal, scorer, &null_scores);
  }
  report.lambda = CalibrateThreshold(policy, null_scores);

  CounterRng fresh_rng = Substream(master_seed, trial, Purpose::kFreshData);
  ScoreFreshDraws(pop, fresh_rng, fresh, scorer, &report.scores_fresh);

  for (std::size_t i = 0; i < n; ++i) {
    if (report.scores_train[i] >= report.lambda) report.flagged.push_back(i);
  }
  for (double s : report.scores_fresh) {
    if (s >= report.lambda) ++report.fresh_flagged;
  }
  const double nd = static_cast<double>(n);
  report.recall_estimate = static_cast<double>(report.flagged.size());
  report.soundness_estimate =
      static_cast<double>(report.fresh_flagged) / static_cast<double>(fresh);
  report.ci_halfwidths = {
      nd * BinomialHalfWidth(report.recall_estimate / nd, n),
      BinomialHalfWidth(report.soundness_estimate, fresh)};
  report.recall_pz_bound = RecallLowerBoundPz(report.scores_train, report.lambda);
  report.mu_norm_l1 = NormP(setup.mu.values, 1.0);
  report.excess_risk =
      setup.theta.feasible ? ExcessRisk(spec, setup.theta, setup.mu.values)
                           : std::numeric_limits<double>::quiet_NaN();
  report.mean_train_score = PairwiseSum(report.scores_train) / nd;
  report.clip_events = scorer.clip_events();
  return report;
}

std::vector<double> TraceValueContributions(
    const LearnerConfig& learner, const ProblemSpec& spec,
    TracerKind tracer_kind, const BetaPrior& prior, std::size_t n, int trials,
    std::uint64_t master_seed, int threads, const TraceOptions& options) {
  if (n < 1) throw std::invalid_argument("EstimateTraceValue: n must be >= 1");
  if (trials < 1) {
    throw std::invalid_argument("EstimateTraceValue: trials must be >= 1");
  }
  std::vector<double> contributions(trials);
  ParallelFor(trials, threads, [&](std::size_t t) {
    TrialSetup setup = SetUpTrial(learner, spec, tracer_kind, prior, n,
                                  master_seed, t, options);
    Scorer scorer(setup.tracer, setup.theta.theta);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = scorer.Score(setup.train.row(i));
    contributions[t] = PairwiseSum(scores) / static_cast<double>(n);
  });
  return contributions;
}

MeanCi EstimateTraceValue(const LearnerConfig& learner, const ProblemSpec& spec,
                          TracerKind tracer_kind, const BetaPrior& prior,
                          std::size_t n, int trials, std::uint64_t master_seed,
                          int threads, const TraceOptions& options) {
  if (trials < 30) {
    throw std::invalid_argument("EstimateTraceValue: trials must be >= 30");
  }
  const std::vector<double> contributions =
      TraceValueContributions(learner, spec, tracer_kind, prior, n, trials,
                              master_seed, threads, options);
  return MeanWithCi(contributions);
}

double SparsePriorBeta(int k, double p, int d, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("SparsePriorBeta: alpha must be > 0");
  }
  const double ratio =
      std::pow(static_cast<double>(k) / d, 1.0 / p) / (6.0 * alpha);
  return std::max(1.0, ratio * ratio);
}

BetaPrior DefaultPrior(const ProblemSpec& spec, double alpha) {
  BetaPrior prior;
  prior.d = spec.d;
  if (spec.variant == Variant::kBoxLp) {
    prior.gamma = static_cast<double>(spec.k) / spec.d;
    prior.beta = SparsePriorBeta(spec.k, spec.p, spec.d, alpha);
    return prior;
  }
  if (!(alpha > 0.0 && alpha < 0.125)) {
    throw std::invalid_argument("DefaultPrior: l1 prior needs 0 < alpha < 1/8");
  }
  const int s = spec.variant == Variant::kL1Capped ? spec.s : 1;
  prior.gamma = 8.0 * alpha;
  prior.beta = std::max(
      1.0, 1.0 + 0.5 * std::log(spec.d / (16.0 * std::max(s, 14))));
  return prior;
}

double SelfConsistentAlpha(const LearnerConfig& learner,
                           const ProblemSpec& spec, std::size_t n,
                           double alpha0, int iterations, int trials,
                           std::uint64_t master_seed, int threads) {
  double alpha = alpha0;
  for (int it = 0; it < iterations; ++it) {
    const BetaPrior prior = DefaultPrior(spec, alpha);
    alpha = MeasureExcessRisk(learner, spec, prior, n, trials,
                              Mix64(master_seed + static_cast<unsigned>(it)),
                              threads)
                .mean;
    if (!(alpha > 0.0)) {
      throw std::runtime_error("SelfConsistentAlpha: measured risk is zero");
    }
  }
  return alpha;
}

double MaxScoreNormHeuristic(const TracerSpec& tr, const ProblemSpec& spec,
                             const Dataset& data, int starts, CounterRng& rng) {
  if (spec.variant != Variant::kBoxLp) {
    throw std::invalid_argument("MaxScoreNormHeuristic: needs a box problem");
  }
  if (static_cast<int>(data.dim()) != tr.d || data.empty() || starts < 1) {
    throw std::invalid_argument("MaxScoreNormHeuristic: bad arguments");
  }
  const std::size_t n = data.size();
  const int d = tr.d;
  // Row i of a: phi(theta, Z_i) = <a_i, theta>.
  std::vector<double> unit_theta(d, 1.0);
  std::vector<double> w, b;
  ScoreWeights(tr, unit_theta, &w, &b);
  std::vector<double> a(n * d);
  std::vector<double> col_sq(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = data.row(i);
    for (int j = 0; j < d; ++j) {
      const double v = tr.scale * (z[j] * w[j] - std::abs(z[j]) * b[j]);
      a[i * d + j] = v;
      col_sq[j] += v * v;
    }
  }
  const double r = std::pow(d, -1.0 / spec.p);
  double best = 0.0;
  std::vector<double> sign(d);
  std::vector<double> u(n);
  for (int start = 0; start < starts; ++start) {
    for (double& s : sign) s = (rng() & 1u) ? 1.0 : -1.0;
    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) u[i] += a[i * d + j] * r * sign[j];
    }
    // Flipping coordinate j changes ||u||^2 by 4 r^2 ||a_j||^2 - 4 r s_j <u, a_j>.
    for (bool improved = true; improved;) {
      improved = false;
      for (int j = 0; j < d; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += u[i] * a[i * d + j];
        const double gain = 4.0 * r * r * col_sq[j] - 4.0 * r * sign[j] * dot;
        if (gain > 1e-12) {
          for (std::size_t i = 0; i < n; ++i) {
            u[i] -= 2.0 * r * sign[j] * a[i * d + j];
          }
          sign[j] = -sign[j];
          improved = true;
        }
      }
    }
    double norm_sq = 0.0;
    for (double x : u) norm_sq += x * x;
    best = std::max(best, std::sqrt(norm_sq));
  }
  return best;
}

}  // namespace fingertrace
