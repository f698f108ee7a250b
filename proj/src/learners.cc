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
#include "fingertrace/learners.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fingertrace/parallel.h"

namespace fingertrace {

std::string LearnerName(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kErmLinear:
      return "erm";
    case LearnerKind::kGaussianDp:
      return "gaussian_dp";
    case LearnerKind::kSubsample:
      return "subsample";
    case LearnerKind::kNormalizedMeanL2:
      return "normalized_mean_l2";
    case LearnerKind::kConstant:
      return "constant";
  }
  return "unknown";
}

LearnerConfig LearnerConfig::GaussianDp(double epsilon, double delta) {
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kGaussianDp;
  cfg.epsilon = epsilon;
  cfg.delta = delta;
  cfg.Validate();
  return cfg;
}

LearnerConfig LearnerConfig::Subsample(int m) {
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kSubsample;
  cfg.subsample_m = m;
  cfg.Validate();
  return cfg;
}

LearnerConfig LearnerConfig::NormalizedMeanL2() {
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kNormalizedMeanL2;
  return cfg;
}

LearnerConfig LearnerConfig::Constant(ParameterPoint point) {
  LearnerConfig cfg;
  cfg.kind = LearnerKind::kConstant;
  cfg.fixed_point = std::move(point);
  return cfg;
}

void LearnerConfig::Validate() const {
  if (kind == LearnerKind::kGaussianDp) {
    if (!(epsilon > 0.0 && epsilon <= 10.0)) {
      throw std::invalid_argument("GaussianDp: epsilon must lie in (0, 10]");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("GaussianDp: delta must lie in (0, 1)");
    }
  }
  if (kind == LearnerKind::kSubsample && subsample_m < 1) {
    throw std::invalid_argument("Subsample: subsample_m must be >= 1");
  }
}

double MeanSensitivityL2(const ProblemSpec& spec, std::size_t n) {
  return 2.0 * std::sqrt(static_cast<double>(spec.data_sparsity())) /
         static_cast<double>(n);
}

double GaussianDpSigma(const ProblemSpec& spec, std::size_t n, double epsilon,
                       double delta) {
  return MeanSensitivityL2(spec, n) * std::sqrt(2.0 * std::log(1.25 / delta)) /
         epsilon;
}

ParameterPoint Train(const LearnerConfig& cfg, const ProblemSpec& spec,
                     const Dataset& data, CounterRng& rng) {
  cfg.Validate();
  if (data.empty()) throw std::invalid_argument("Train: empty dataset");
  if (static_cast<int>(data.dim()) != spec.d) {
    throw std::invalid_argument("Train: dataset dimension != spec.d");
  }
  switch (cfg.kind) {
    case LearnerKind::kErmLinear:
      return SupportArgmax(spec, data.Mean());
    case LearnerKind::kSubsample:
      if (static_cast<std::size_t>(cfg.subsample_m) > data.size()) {
        throw std::invalid_argument("Subsample: subsample_m exceeds n");
      }
      return SupportArgmax(spec, data.Prefix(cfg.subsample_m).Mean());
    case LearnerKind::kGaussianDp: {
      std::vector<double> stat = data.Mean();
      std::normal_distribution<double> noise(
          0.0, GaussianDpSigma(spec, data.size(), cfg.epsilon, cfg.delta));
      for (double& v : stat) v += noise(rng);
      return SupportArgmax(spec, stat);
    }
    case LearnerKind::kNormalizedMeanL2: {
      std::vector<double> mean = data.Mean();
      const double norm = NormP(mean, 2.0);
      if (norm < 1e-12) {
        std::fill(mean.begin(), mean.end(), 0.0);
      } else {
        for (double& v : mean) v /= norm;
      }
      return MakePoint(spec, std::move(mean));
    }
    case LearnerKind::kConstant:
      if (static_cast<int>(cfg.fixed_point.theta.size()) != spec.d) {
        throw std::invalid_argument("Constant: fixed point dimension != d");
      }
      return MakePoint(spec, cfg.fixed_point.theta);
  }
  throw std::invalid_argument("Train: unknown learner kind");
}

MeanVector ClipToPopulationBox(const ProblemSpec& spec, MeanVector mu) {
  const double bound = static_cast<double>(spec.data_sparsity()) / spec.d;
  for (double& v : mu.values) v = std::clamp(v, -bound, bound);
  mu.box_bound = bound;
  return mu;
}

MeanCi MeasureExcessRisk(const LearnerConfig& cfg, const ProblemSpec& spec,
                         const BetaPrior& prior, std::size_t n, int trials,
                         std::uint64_t master_seed, int threads) {
  if (trials < 30) {
    throw std::invalid_argument("MeasureExcessRisk: trials must be >= 30");
  }
  if (n < 1) throw std::invalid_argument("MeasureExcessRisk: n must be >= 1");
  spec.Validate();
  cfg.Validate();
  std::vector<double> risks(trials);
  ParallelFor(trials, threads, [&](std::size_t t) {
    CounterRng prior_rng = Substream(master_seed, t, Purpose::kPrior);
    CounterRng data_rng = Substream(master_seed, t, Purpose::kTrainData);
    CounterRng learner_rng = Substream(master_seed, t, Purpose::kLearner);
    BetaPrior p = prior;
    p.d = spec.d;
    const MeanVector mu = ClipToPopulationBox(spec, SamplePrior(p, prior_rng));
    const SparsePopulation pop(mu, spec.data_sparsity());
    Dataset data(spec.d);
    pop.SampleDataset(data_rng, n, &data);
    const ParameterPoint theta = Train(cfg, spec, data, learner_rng);
    risks[t] = ExcessRisk(spec, theta, mu.values);
  });
  return MeanWithCi(risks);
}

}  // namespace fingertrace
