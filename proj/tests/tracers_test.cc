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
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

namespace fingertrace {
namespace {

using Z = std::vector<std::int8_t>;

MeanVector Mean(std::vector<double> v, double bound = 1.0) {
  return MeanVector{std::move(v), bound};
}

ParameterPoint Theta(std::vector<double> v) {
  return ParameterPoint{std::move(v), true};
}

// Direct transcription of the sparse score, used as a reference.
double ReferenceSparseScore(int d, int k, double p,
                            const std::vector<double>& mu,
                            const std::vector<double>& theta, const Z& z) {
  double sum = 0.0;
  for (int j = 0; j < d; ++j) {
    if (z[j] == 0) continue;
    sum += theta[j] * (z[j] - static_cast<double>(d) / k * mu[j]);
  }
  return std::pow(d, 1.0 / p) / std::sqrt(static_cast<double>(k)) * sum;
}

TEST(ScoreSparseTest, HandValues) {
  const TracerSpec flat = TracerSpec::Sparse(Mean({0, 0, 0, 0}), 4, 2.0);
  EXPECT_EQ(ScoreSparse(flat, Theta({0, 0, 0, 0}), Z{1, -1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(
      ScoreSparse(flat, Theta({0.5, 0.5, 0.5, 0.5}), Z{1, 1, 1, 1}), 2.0);
  const TracerSpec skewed = TracerSpec::Sparse(Mean({0.25, 0}), 1, 2.0);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(ScoreSparse(skewed, Theta({r, r}), Z{1, 0}), 0.5, 1e-15);
  EXPECT_NEAR(ReferenceSparseScore(2, 1, 2.0, {0.25, 0}, {r, r}, Z{1, 0}), 0.5,
              1e-15);
}

TEST(ScoreSparseTest, Errors) {
  EXPECT_THROW(TracerSpec::Sparse(Mean({0.6, 0}), 1, 2.0),
               std::invalid_argument);
  const TracerSpec tr = TracerSpec::Sparse(Mean({0, 0}), 2, 2.0);
  EXPECT_THROW(ScoreSparse(tr, Theta({0, 0, 0}), Z{1, 1}),
               std::invalid_argument);
  EXPECT_THROW(ScoreSparse(tr, Theta({0, 0}), Z{1, 1, 1}),
               std::invalid_argument);
}

TEST(ScoreSparseTest, ScorerMatchesReferenceAndStaysInClipBound) {
  CounterRng rng(1);
  for (auto [d, k, p] : {std::tuple{12, 3, 2.0}, std::tuple{40, 40, 1.5},
                         std::tuple{9, 4, 1.0}}) {
    const ProblemSpec spec = ProblemSpec::BoxLp(d, p, k);
    const double box = static_cast<double>(k) / d;
    std::vector<double> mu(d);
    for (double& m : mu) m = box * (2.0 * rng.NextUnit() - 1.0);
    const TracerSpec tr = TracerSpec::Sparse(Mean(mu, box), k, p);
    EXPECT_DOUBLE_EQ(tr.clip_bound, 2.0 * std::sqrt(static_cast<double>(k)));
    const SparsePopulation pop(Mean(mu, box), k);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> theta(d);
      const double r = std::pow(d, -1.0 / p);
      for (double& x : theta) x = r * (2.0 * rng.NextUnit() - 1.0);
      ASSERT_TRUE(spec.Contains(theta));
      Scorer scorer(tr, theta);
      const TernarySample z = pop.Sample(rng);
      const double ref = ReferenceSparseScore(d, k, p, mu, theta, z.entries);
      EXPECT_LE(std::abs(ref), tr.clip_bound);
      EXPECT_NEAR(scorer.Score(z.entries), ref, 1e-12);
      EXPECT_NEAR(ScoreSparse(tr, Theta(theta), z.entries), ref, 1e-12);
      EXPECT_EQ(scorer.clip_events(), 0u);
    }
  }
}

TEST(ScoreScalingMatrixTest, LambdaValues) {
  const TracerSpec tr =
      TracerSpec::ScalingMatrix(Mean({0.25, 0.5, 0.0}, 0.5), 0.5, 1);
  const std::vector<double> lambda = tr.Lambda();
  EXPECT_NEAR(lambda[0], 0.8, 1e-15);
  EXPECT_EQ(lambda[1], 0.0);
  EXPECT_EQ(lambda[2], 1.0);
}

TEST(ScoreScalingMatrixTest, ZeroMeanIsScaledInnerProduct) {
  const TracerSpec tr = TracerSpec::ScalingMatrix(Mean({0, 0, 0}), 0.5, 4);
  EXPECT_DOUBLE_EQ(ScoreScalingMatrix(tr, Theta({0.1, -0.2, 0.3}), Z{1, 1, -1}),
                   2.0 * (0.1 - 0.2 - 0.3));
}

TEST(ScoreScalingMatrixTest, SingularMeanIsDomainError) {
  EXPECT_THROW(TracerSpec::ScalingMatrix(Mean({1.0, 0.0}), 1.0, 1),
               std::domain_error);
  EXPECT_THROW(TracerSpec::ScalingMatrix(Mean({0.6}), 0.5, 1),
               std::invalid_argument);
}

TEST(ScoreScalingMatrixTest, ScorerMatchesDirectScore) {
  CounterRng rng(2);
  const int d = 10;
  std::vector<double> mu(d);
  for (double& m : mu) m = 0.4 * (2.0 * rng.NextUnit() - 1.0);
  const TracerSpec tr = TracerSpec::ScalingMatrix(Mean(mu, 0.4), 0.4, 3);
  const SparsePopulation pop(Mean(mu), d);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> theta(d, 0.0);
    theta[rng() % d] = (rng() & 1u) ? 1.0 / 3.0 : -1.0 / 3.0;
    Scorer scorer(tr, theta);
    const TernarySample z = pop.Sample(rng);
    EXPECT_NEAR(scorer.Score(z.entries),
                ScoreScalingMatrix(tr, Theta(theta), z.entries), 1e-12);
  }
}

TEST(ScorerTest, ClampsAndCounts) {
  const TracerSpec tr = TracerSpec::Sparse(Mean({0, 0}), 2, 2.0);
  Scorer scorer(tr, std::vector<double>{10.0, 10.0});
  EXPECT_EQ(scorer.Score(Z{1, 1}), tr.clip_bound);
  EXPECT_EQ(scorer.Score(Z{-1, -1}), -tr.clip_bound);
  EXPECT_EQ(scorer.clip_events(), 2u);
}

TEST(CalibrateThresholdTest, HandValues) {
  EXPECT_DOUBLE_EQ(
      CalibrateThreshold(ThresholdPolicy::HalfTraceValue(1.6), {}), 0.8);
  const std::vector<double> scores = {4, 1, 3, 2};
  ThresholdPolicy half{ThresholdKind::kNullQuantile, 0.5, 0.0};
  // 10 / xi = 20 scores are required; repeat the example pattern.
  std::vector<double> repeated;
  for (int r = 0; r < 5; ++r) repeated.insert(repeated.end(), scores.begin(), scores.end());
  EXPECT_EQ(CalibrateThreshold(half, repeated), 3.0);
}

TEST(CalibrateThresholdTest, RejectsSmallNullSample) {
  const std::vector<double> scores(199, 0.0);
  EXPECT_THROW(CalibrateThreshold(ThresholdPolicy::NullQuantile(0.05), scores),
               std::invalid_argument);
  EXPECT_THROW(ThresholdPolicy::NullQuantile(0.0), std::invalid_argument);
  EXPECT_THROW(
      ThresholdPolicy::HalfTraceValue(std::numeric_limits<double>::infinity()),
      std::invalid_argument);
}

TEST(CalibrateThresholdTest, NormalQuantile) {
  CounterRng rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> scores(10000);
  for (double& s : scores) s = normal(rng);
  EXPECT_NEAR(CalibrateThreshold(ThresholdPolicy::NullQuantile(0.05), scores),
              1.6448536269514722, 0.05);
}

TEST(NullSampleSizeTest, Floor) {
  EXPECT_EQ(NullSampleSize(0.05), 1000u);
  EXPECT_EQ(NullSampleSize(0.001), 10000u);
}

TEST(RecallLowerBoundPzTest, HandValues) {
  EXPECT_DOUBLE_EQ(RecallLowerBoundPz(std::vector<double>{2, 0, 0}, 1.0 / 3.0),
                   0.25);
  EXPECT_DOUBLE_EQ(RecallLowerBoundPz(std::vector<double>{1, 1, 1, 1}, 0.0),
                   4.0);
  EXPECT_EQ(RecallLowerBoundPz(std::vector<double>{0, 0}, 0.5), 0.0);
}

TEST(RecallLowerBoundPzTest, NeverExceedsDirectCount) {
  CounterRng rng(4);
  for (int t = 0; t < 10000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<double> a(n);
    for (double& x : a) x = 2.0 * rng.NextUnit() - 1.0;
    const double lambda = 2.0 * rng.NextUnit() - 1.0;
    const auto count = std::count_if(a.begin(), a.end(),
                                     [&](double x) { return x >= lambda; });
    // Valid for thresholds lambda >= 0; the negative side is covered by the
    // oracle tests.
    if (lambda >= 0.0) {
      EXPECT_LE(RecallLowerBoundPz(a, lambda), static_cast<double>(count));
    }
  }
}

TEST(RunTraceTrialTest, ConstantZeroLearnerIsNeverFlagged) {
  const ProblemSpec spec = ProblemSpec::BoxLp(32, 2.0, 32);
  const LearnerConfig zero =
      LearnerConfig::Constant(ParameterPoint{std::vector<double>(32, 0.0), true});
  const TraceReport report = RunTraceTrial(
      zero, spec, TracerKind::kSparseScore, DefaultPrior(spec, 0.05), 16, 100,
      ThresholdPolicy::HalfTraceValue(1.0), 5, 0);
  for (double s : report.scores_train) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(report.recall_estimate, 0.0);
  EXPECT_EQ(report.soundness_estimate, 0.0);
}

TEST(RunTraceTrialTest, ReportInvariants) {
  const ProblemSpec spec = ProblemSpec::BoxLp(64, 2.0, 16);
  const TraceReport report = RunTraceTrial(
      LearnerConfig::Erm(), spec, TracerKind::kSparseScore,
      DefaultPrior(spec, 0.05), 32, 500, ThresholdPolicy::NullQuantile(0.05),
      6, 3);
  ASSERT_EQ(report.scores_train.size(), 32u);
  ASSERT_EQ(report.scores_fresh.size(), 500u);
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < 32; ++i) {
    if (report.scores_train[i] >= report.lambda) flagged.push_back(i);
  }
  EXPECT_EQ(report.flagged, flagged);
  EXPECT_EQ(report.recall_estimate, static_cast<double>(flagged.size()));
  const auto fresh = std::count_if(
      report.scores_fresh.begin(), report.scores_fresh.end(),
      [&](double s) { return s >= report.lambda; });
  EXPECT_EQ(report.soundness_estimate, fresh / 500.0);
  EXPECT_LE(report.recall_pz_bound, report.recall_estimate);
  EXPECT_GE(report.excess_risk, 0.0);
}

TEST(RunTraceTrialTest, ErmIsTracedAndSound) {
  const ProblemSpec spec = ProblemSpec::BoxLp(1024, 2.0, 1024);
  const BetaPrior prior = DefaultPrior(spec, 0.05);
  const std::size_t m = 2000;
  double recall = 0.0, fp = 0.0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const TraceReport r = RunTraceTrial(
        LearnerConfig::Erm(), spec, TracerKind::kSparseScore, prior, 64, m,
        ThresholdPolicy::NullQuantile(0.05), 8, t);
    recall += r.recall_estimate;
    fp += r.soundness_estimate;
  }
  EXPECT_GT(recall / trials, 0.0);
  EXPECT_LE(fp / trials, 0.05 + 3.0 * std::sqrt(0.05 / (m * trials)));
}

TEST(RunTraceTrialTest, StrongPrivacyCapsRecall) {
  const ProblemSpec spec = ProblemSpec::BoxLp(256, 2.0, 256);
  const BetaPrior prior = DefaultPrior(spec, 0.05);
  std::vector<double> recalls;
  for (int t = 0; t < 40; ++t) {
    recalls.push_back(RunTraceTrial(LearnerConfig::GaussianDp(0.1, 1e-6), spec,
                                    TracerKind::kSparseScore, prior, 100, 200,
                                    ThresholdPolicy::NullQuantile(0.05), 9, t)
                          .recall_estimate);
  }
  const MeanCi ci = MeanWithCi(recalls);
  EXPECT_LE(ci.mean, 100 * std::exp(0.1) * 0.05 + 100 * 1e-6 + ci.half_width);
}

TEST(RunTraceTrialTest, FreshScoresHaveMeanZero) {
  for (TracerKind kind :
       {TracerKind::kSparseScore, TracerKind::kScalingMatrixScore}) {
    const ProblemSpec spec = kind == TracerKind::kSparseScore
                                 ? ProblemSpec::BoxLp(48, 2.0, 12)
                                 : ProblemSpec::L1Capped(48, 4);
    const TraceReport r = RunTraceTrial(
        LearnerConfig::Erm(), spec, kind, DefaultPrior(spec, 0.05), 20, 20000,
        ThresholdPolicy::NullQuantile(0.05), 10, 0);
    const MeanCi ci = MeanWithCi(r.scores_fresh);
    EXPECT_NEAR(ci.mean, 0.0, 4.0 * ci.sd / std::sqrt(20000.0))
        << TracerName(kind);
  }
}

TEST(RunTraceTrialTest, NullQuantileControlsFalsePositives) {
  const ProblemSpec spec = ProblemSpec::BoxLp(128, 2.0, 32);
  const std::size_t m = 10000;
  std::size_t flagged = 0;
  for (int t = 0; t < 10; ++t) {
    flagged += RunTraceTrial(LearnerConfig::Erm(), spec,
                             TracerKind::kSparseScore, DefaultPrior(spec, 0.05),
                             16, m, ThresholdPolicy::NullQuantile(0.05), 11, t)
                   .fresh_flagged;
  }
  const double rate = flagged / (10.0 * m);
  EXPECT_LE(rate, 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / (10.0 * m)));
}

TEST(EstimateTraceValueTest, ConstantIsZero) {
  const ProblemSpec spec = ProblemSpec::BoxLp(16, 2.0, 16);
  const LearnerConfig zero =
      LearnerConfig::Constant(ParameterPoint{std::vector<double>(16, 0.0), true});
  const MeanCi t = EstimateTraceValue(zero, spec, TracerKind::kSparseScore,
                                      DefaultPrior(spec, 0.05), 8, 30, 1, 1);
  EXPECT_EQ(t.mean, 0.0);
  EXPECT_EQ(t.half_width, 0.0);
}

TEST(EstimateTraceValueTest, IndependentTrainingIsZero) {
  const ProblemSpec spec = ProblemSpec::BoxLp(64, 2.0, 64);
  TraceOptions options;
  options.independent_training = true;
  const MeanCi t =
      EstimateTraceValue(LearnerConfig::Erm(), spec, TracerKind::kSparseScore,
                         DefaultPrior(spec, 0.05), 32, 400, 2, 2, options);
  EXPECT_NEAR(t.mean, 0.0, 4.0 * t.half_width / kZ95);
}

TEST(EstimateTraceValueTest, SingleCoordinateClosedForm) {
  // d = k = n = 1: ERM returns theta = Z and the score factor is 1.
  const ProblemSpec spec = ProblemSpec::BoxLp(1, 2.0, 1);
  for (double beta : {1.0, 2.0, 5.0}) {
    const MeanCi t = EstimateTraceValue(
        LearnerConfig::Erm(), spec, TracerKind::kSparseScore,
        BetaPrior{beta, 1.0, 1}, 1, 20000, 3, 2);
    EXPECT_NEAR(t.mean, 2.0 * beta / (2.0 * beta + 1.0),
                4.0 * t.half_width / kZ95)
        << "beta=" << beta;
  }
}

TEST(EstimateTraceValueTest, ThreadIndependent) {
  const ProblemSpec spec = ProblemSpec::BoxLp(32, 2.0, 8);
  const BetaPrior prior = DefaultPrior(spec, 0.05);
  const auto a = TraceValueContributions(LearnerConfig::Erm(), spec,
                                         TracerKind::kSparseScore, prior, 16,
                                         40, 4, 1);
  const auto b = TraceValueContributions(LearnerConfig::Erm(), spec,
                                         TracerKind::kSparseScore, prior, 16,
                                         40, 4, 8);
  EXPECT_EQ(a, b);
}

TEST(EstimateTraceValueTest, RejectsFewTrials) {
  const ProblemSpec spec = ProblemSpec::BoxLp(4, 2.0, 4);
  EXPECT_THROW(EstimateTraceValue(LearnerConfig::Erm(), spec,
                                  TracerKind::kSparseScore,
                                  DefaultPrior(spec, 0.05), 4, 29, 1, 1),
               std::invalid_argument);
}

TEST(DefaultPriorTest, Values) {
  EXPECT_NEAR(SparsePriorBeta(64, 2.0, 64, 0.05), 1.0 / 0.09, 1e-12);
  EXPECT_EQ(SparsePriorBeta(64, 2.0, 64, 1.0), 1.0);
  const BetaPrior box = DefaultPrior(ProblemSpec::BoxLp(100, 2.0, 25), 0.02);
  EXPECT_DOUBLE_EQ(box.gamma, 0.25);
  EXPECT_NEAR(box.beta, std::pow(0.5 / 0.12, 2), 1e-12);
  const BetaPrior l1 = DefaultPrior(ProblemSpec::L1Capped(4096, 4), 0.05);
  EXPECT_DOUBLE_EQ(l1.gamma, 0.4);
  EXPECT_NEAR(l1.beta, 1.0 + 0.5 * std::log(4096.0 / (16.0 * 14.0)), 1e-12);
  EXPECT_THROW(DefaultPrior(ProblemSpec::L1Capped(64, 4), 0.2),
               std::invalid_argument);
}

TEST(MaxScoreNormHeuristicTest, MatchesBruteForceOnSmallBox) {
  CounterRng rng(12);
  const int d = 8;
  const ProblemSpec spec = ProblemSpec::BoxLp(d, 2.0, d);
  const MeanVector mu = SamplePrior(BetaPrior{2.0, 1.0, d}, rng);
  const TracerSpec tr = TracerSpec::Sparse(mu, d, 2.0);
  const SparsePopulation pop(mu, d);
  Dataset data(d);
  pop.SampleDataset(rng, 12, &data);
  double brute = 0.0;
  const double r = std::pow(d, -0.5);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::vector<double> theta(d);
    for (int j = 0; j < d; ++j) theta[j] = ((mask >> j) & 1u) ? r : -r;
    double sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double s = ScoreSparse(tr, Theta(theta), data.row(i));
      sq += s * s;
    }
    brute = std::max(brute, std::sqrt(sq));
  }
  const double heuristic = MaxScoreNormHeuristic(tr, spec, data, 32, rng);
  EXPECT_LE(heuristic, brute + 1e-9);
  EXPECT_GE(heuristic, 0.95 * brute);
}

TEST(MaxScoreNormHeuristicTest, ScalesWithRootNPlusRootD) {
  CounterRng rng(13);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int n : {64, 256}) {
    for (int d : {64, 256}) {
      const ProblemSpec spec = ProblemSpec::BoxLp(d, 2.0, d);
      const MeanVector mu = ClipToPopulationBox(
          spec, SamplePrior(DefaultPrior(spec, 0.05), rng));
      const TracerSpec tr = TracerSpec::Sparse(mu, d, 2.0);
      Dataset data(d);
      SparsePopulation(mu, d).SampleDataset(rng, n, &data);
      const double ratio = MaxScoreNormHeuristic(tr, spec, data, 32, rng) /
                           (std::sqrt(n) + std::sqrt(d));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi, 3.0 * lo);
}

}  // namespace
}  // namespace fingertrace
