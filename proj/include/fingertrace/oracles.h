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
#ifndef FINGERTRACE_ORACLES_H_
#define FINGERTRACE_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fingertrace/distributions.h"
#include "fingertrace/random.h"
#include "fingertrace/stats.h"

namespace fingertrace {

// Both sides of a fingerprinting identity on one small instance.
struct IdentityCheckResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_error = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|, 1e-300)
  std::string instance_descriptor;
};

double RelativeError(double lhs, double rhs);

// A deterministic learner maps a dataset to a vector in R^d.
using OracleLearner = std::function<std::vector<double>(const Dataset&)>;
// A finitely randomized learner: the output for one coin value.
using CoinLearner =
    std::function<std::vector<double>(const Dataset&, std::uint64_t coin)>;

// Exact enumeration stops at this many weighted dataset terms.
inline constexpr double kEnumerationCeiling = 1e7;

// E_mu E[sum_i <theta_hat, Z_i - (d/k) mu>_{supp Z_i}] against
// (2 beta d / k) E_mu <mu, E theta_hat>, with mu from the beta prior on
// [-k/d, k/d]^d. Every dataset in (binom(d,k) 2^k)^n is enumerated with its
// exact probability and each coordinate integrated by PriorQuadrature at
// degree n + 2. Requires 1 <= k <= d, n >= 1 and beta >= 1; throws
// ResourceLimitError above kEnumerationCeiling terms.
IdentityCheckResult VerifySparseIdentity(int d, int k, int n, double beta,
                                         const OracleLearner& learner,
                                         const std::string& learner_name = "");
// Averages theta_hat over the explicit coin set.
IdentityCheckResult VerifySparseIdentity(int d, int k, int n, double beta,
                                         const CoinLearner& learner,
                                         std::span<const std::uint64_t> coins,
                                         const std::string& learner_name = "");

// E_mu E[sum_i <theta_hat, Lambda_mu (Z_i - mu)>] against
// (2 beta / gamma^2) E_mu <mu, E theta_hat> on {-1,+1}^d with the prior on
// [-gamma, gamma]^d. Each Lambda factor is folded into the likelihood with
// (z - mu)(1 + z mu) = (1 - mu^2) z before quadrature at degree n + 3.
// Requires beta > 0 and 0 < gamma <= 1; gamma = 1 gives Lambda = identity.
IdentityCheckResult VerifyScalingIdentity(int d, int n, double beta,
                                          double gamma,
                                          const OracleLearner& learner,
                                          const std::string& learner_name = "");
IdentityCheckResult VerifyScalingIdentity(int d, int n, double beta,
                                          double gamma,
                                          const CoinLearner& learner,
                                          std::span<const std::uint64_t> coins,
                                          const std::string& learner_name = "");

// Monte Carlo estimates of the left-hand sides above through the sampling
// path (SamplePrior, SparsePopulation), one (mu, S_n) draw per sample.
MeanCi MonteCarloSparseLhs(int d, int k, int n, double beta,
                           const OracleLearner& learner, std::size_t draws,
                           CounterRng& rng);
MeanCi MonteCarloScalingLhs(int d, int n, double beta, double gamma,
                            const OracleLearner& learner, std::size_t draws,
                            CounterRng& rng);

struct BetaMomentCheck {
  double estimate = 0.0;
  double half_width = 0.0;
  double bound = 0.0;  // gamma / (3 sqrt(beta))
  bool pass = false;   // estimate + half_width >= bound
};

// Monte Carlo E|X| for X from the beta prior on [-gamma, gamma]. Requires
// beta >= 1, 0 < gamma <= 1 and n_samples >= 10^4.
BetaMomentCheck CheckBetaAbsMoment(double beta, double gamma,
                                   std::size_t n_samples, CounterRng& rng);

struct CardMomentsResult {
  bool pass = true;
  std::size_t checked = 0;
  // First violating pair, valid when !pass.
  std::size_t index = 0;
  double beta = 0.0;
  std::size_t count = 0;
  double bound = 0.0;
};

// |{i : a_i >= beta / n}| >= max(A1 - beta, 0)^2 / A2 for each pair
// (vectors[t], betas[t]); the bound is 0 when A2 = 0. No tolerance.
CardMomentsResult CheckCardMoments(
    std::span<const std::vector<double>> vectors, std::span<const double> betas);

// Learners used by the verification grid; d is the data dimension.
struct NamedLearner {
  std::string name;
  OracleLearner learner;
};
std::vector<NamedLearner> GridLearners(int d, int k);

struct VerifyGridResult {
  std::vector<IdentityCheckResult> checks;
  double max_rel_error = 0.0;
  bool pass = false;  // every rel_error <= tolerance
};

// The sparse grid d in {1,2,3}, k in {1..d}, n in {1,2}, beta in {1,2,5};
// the scaling grid d in {1,2}, n in {1,2}, beta in {1,3}, gamma in
// {0.3, 0.9}; and the k = d against gamma = 1 comparisons. All over
// GridLearners.
VerifyGridResult RunVerifyGrid(double tolerance = 1e-8);

}  // namespace fingertrace

#endif  // FINGERTRACE_ORACLES_H_
