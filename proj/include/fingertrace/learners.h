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
#ifndef FINGERTRACE_LEARNERS_H_
#define FINGERTRACE_LEARNERS_H_

#include <cstdint>
#include <string>

#include "fingertrace/distributions.h"
#include "fingertrace/problems.h"
#include "fingertrace/random.h"
#include "fingertrace/stats.h"

namespace fingertrace {

enum class LearnerKind {
  kErmLinear,         // argmax over Theta of <theta, empirical mean>
  kGaussianDp,        // same, on the empirical mean plus Gaussian noise
  kSubsample,         // kErmLinear on the first subsample_m samples
  kNormalizedMeanL2,  // empirical mean / its l2 norm
  kConstant,          // fixed_point, ignores the data
};

std::string LearnerName(LearnerKind kind);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kErmLinear;
  double epsilon = 1.0;        // kGaussianDp
  double delta = 1e-5;         // kGaussianDp
  int subsample_m = 0;         // kSubsample
  ParameterPoint fixed_point;  // kConstant

  static LearnerConfig Erm() { return {}; }
  static LearnerConfig GaussianDp(double epsilon, double delta);
  static LearnerConfig Subsample(int m);
  static LearnerConfig NormalizedMeanL2();
  static LearnerConfig Constant(ParameterPoint point);

  // Throws std::invalid_argument; kGaussianDp needs 0 < epsilon <= 10 and
  // 0 < delta < 1.
  void Validate() const;
};

// Worst-case l2 change of the empirical mean when one of n samples is
// replaced: 2 sqrt(k_max) / n with k_max the data-space sparsity.
double MeanSensitivityL2(const ProblemSpec& spec, std::size_t n);

// Classical Gaussian-mechanism scale
// sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon.
double GaussianDpSigma(const ProblemSpec& spec, std::size_t n, double epsilon,
                       double delta);

// Throws std::invalid_argument on an empty dataset, a dimension mismatch or
// subsample_m > n. Only kGaussianDp draws from rng.
ParameterPoint Train(const LearnerConfig& cfg, const ProblemSpec& spec,
                     const Dataset& data, CounterRng& rng);

// Clamps a prior draw into the box a population for `spec` accepts.
MeanVector ClipToPopulationBox(const ProblemSpec& spec, MeanVector mu);

// Bayesian excess risk: per trial mu ~ prior, S_n ~ D_{mu,k}^n, train, score
// the excess risk. Trials use substreams of master_seed; the result does not
// depend on `threads`.
MeanCi MeasureExcessRisk(const LearnerConfig& cfg, const ProblemSpec& spec,
                         const BetaPrior& prior, std::size_t n, int trials,
                         std::uint64_t master_seed, int threads);

}  // namespace fingertrace

#endif  // FINGERTRACE_LEARNERS_H_
