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
#include "fingertrace/oracles.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fingertrace/errors.h"
#include "fingertrace/problems.h"

namespace fingertrace {
namespace {

enum class IdentityKind { kSparse, kScaling };

// Every ternary vector with exactly k nonzeros, supports in lexicographic
// order and sign patterns in binary order within each support.
std::vector<std::vector<std::int8_t>> DataSpace(int d, int k) {
  std::vector<std::vector<std::int8_t>> points;
  std::vector<int> support(k);
  for (int j = 0; j < k; ++j) support[j] = j;
  while (true) {
    for (std::uint32_t signs = 0; signs < (1u << k); ++signs) {
      std::vector<std::int8_t> z(d, 0);
      for (int j = 0; j < k; ++j) {
        z[support[j]] = ((signs >> j) & 1u) ? 1 : -1;
      }
      points.push_back(std::move(z));
    }
    int pos = k - 1;
    while (pos >= 0 && support[pos] == d - k + pos) --pos;
    if (pos < 0) break;
    ++support[pos];
    for (int j = pos + 1; j < k; ++j) support[j] = support[j - 1] + 1;
  }
  return points;
}

std::string Describe(IdentityKind kind, int d, int k, int n, double beta,
                     double gamma, const std::string& learner) {
  char buf[160];
  if (kind == IdentityKind::kSparse) {
    std::snprintf(buf, sizeof(buf), "sparse d=%d k=%d n=%d beta=%g", d, k, n,
                  beta);
  } else {
    std::snprintf(buf, sizeof(buf), "scaling d=%d n=%d beta=%g gamma=%g", d, n,
                  beta, gamma);
  }
  std::string out = buf;
  if (!learner.empty()) out += " learner=" + learner;
  return out;
}

using ThetaFn = std::function<std::vector<double>(const Dataset&)>;

// Shared enumeration. For the sparse identity c = d/k is the mean scale on
// the support; for the scaling identity k = d and c = 1.
IdentityCheckResult Enumerate(IdentityKind kind, int d, int k, int n,
                              double beta, double gamma, double coins,
                              const ThetaFn& theta_fn,
                              const std::string& learner_name) {
  const std::vector<std::vector<std::int8_t>> space = DataSpace(d, k);
  const double terms =
      std::pow(static_cast<double>(space.size()), n) * std::max(coins, 1.0);
  if (terms > kEnumerationCeiling) {
    throw ResourceLimitError("identity oracle: enumeration exceeds 1e7 terms");
  }
  const double c =
      kind == IdentityKind::kSparse ? static_cast<double>(d) / k : 1.0;
  const int degree = kind == IdentityKind::kSparse ? n + 2 : n + 3;
  const QuadratureRule rule = PriorQuadrature({beta, gamma, 1}, degree);
  const std::size_t nodes = rule.nodes.size();
  const double support_weight =
      std::pow(1.0 / BinomialCoefficient(d, k), static_cast<double>(n));

  std::vector<std::size_t> index(n, 0);
  std::vector<double> e_f(d), e_fg(d), e_mf(d), prefix(d + 1), suffix(d + 1);
  std::vector<double> f(nodes), g(nodes);
  double lhs = 0.0;
  double rhs = 0.0;
  while (true) {
    Dataset data(d);
    for (int i = 0; i < n; ++i) data.Append(space[index[i]]);
    const std::vector<double> theta = theta_fn(data);
    if (static_cast<int>(theta.size()) != d) {
      throw std::invalid_argument("identity oracle: learner output dimension");
    }
    for (int j = 0; j < d; ++j) {
      for (std::size_t q = 0; q < nodes; ++q) {
        const double x = rule.nodes[q];
        double like = 1.0;
        double score = 0.0;
        for (int i = 0; i < n; ++i) {
          const int z = data.row(i)[j];
          if (z == 0) continue;
          like *= 0.5 * (1.0 + c * x * z);
          score += z - c * x;
        }
        f[q] = like;
        if (kind == IdentityKind::kSparse) {
          g[q] = like * score;
        } else {
          // sum_t Lambda (z_t - x) prod_t' (1 + z_t' x) / 2
          //   = (1 - (x/gamma)^2) sum_t (z_t / 2) prod_{t' != t} (1 + z_t' x) / 2.
          const double r = x / gamma;
          double sum = 0.0;
          for (int t = 0; t < n; ++t) {
            double others = 0.5 * data.row(t)[j];
            for (int u = 0; u < n; ++u) {
              if (u != t) others *= 0.5 * (1.0 + data.row(u)[j] * x);
            }
            sum += others;
          }
          g[q] = (1.0 - r * r) * sum;
        }
      }
      double a = 0.0, b = 0.0, m = 0.0;
      for (std::size_t q = 0; q < nodes; ++q) {
        a += rule.weights[q] * f[q];
        b += rule.weights[q] * g[q];
        m += rule.weights[q] * rule.nodes[q] * f[q];
      }
      e_f[j] = a;
      e_fg[j] = b;
      e_mf[j] = m;
    }
    prefix[0] = 1.0;
    for (int j = 0; j < d; ++j) prefix[j + 1] = prefix[j] * e_f[j];
    suffix[d] = 1.0;
    for (int j = d - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * e_f[j];
    double l = 0.0, r = 0.0;
    for (int j = 0; j < d; ++j) {
      const double others = prefix[j] * suffix[j + 1];
      l += theta[j] * e_fg[j] * others;
      r += theta[j] * e_mf[j] * others;
    }
    lhs += support_weight * l;
    rhs += support_weight * r;

    int pos = n - 1;
    while (pos >= 0 && ++index[pos] == space.size()) index[pos--] = 0;
    if (pos < 0) break;
  }
  rhs *= kind == IdentityKind::kSparse ? 2.0 * beta * c
                                       : 2.0 * beta / (gamma * gamma);
  IdentityCheckResult result;
  result.lhs = lhs;
  result.rhs = rhs;
  result.rel_error = RelativeError(lhs, rhs);
  result.instance_descriptor =
      Describe(kind, d, k, n, beta, gamma, learner_name);
  return result;
}

void CheckSparseArgs(int d, int k, int n, double beta) {
  if (d < 1 || k < 1 || k > d) {
    throw std::invalid_argument("VerifySparseIdentity: need 1 <= k <= d");
  }
  if (n < 1) throw std::invalid_argument("VerifySparseIdentity: n must be >= 1");
  if (!(beta >= 1.0)) {
    throw std::invalid_argument("VerifySparseIdentity: beta must be >= 1");
  }
}

void CheckScalingArgs(int d, int n, double beta, double gamma) {
  if (d < 1 || n < 1) {
    throw std::invalid_argument("VerifyScalingIdentity: d, n must be >= 1");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("VerifyScalingIdentity: beta must be > 0");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("VerifyScalingIdentity: gamma must lie in (0, 1]");
  }
}

ThetaFn AverageOverCoins(const CoinLearner& learner,
                         std::span<const std::uint64_t> coins) {
  if (coins.empty()) throw std::invalid_argument("identity oracle: no coins");
  return [&learner, coins](const Dataset& data) {
    std::vector<double> avg;
    for (std::uint64_t coin : coins) {
      const std::vector<double> theta = learner(data, coin);
      if (avg.empty()) avg.assign(theta.size(), 0.0);
      if (theta.size() != avg.size()) {
        throw std::invalid_argument("identity oracle: learner output dimension");
      }
      for (std::size_t j = 0; j < theta.size(); ++j) avg[j] += theta[j];
    }
    for (double& v : avg) v /= static_cast<double>(coins.size());
    return avg;
  };
}

}  // namespace

double RelativeError(double lhs, double rhs) {
  return std::abs(lhs - rhs) /
         std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

IdentityCheckResult VerifySparseIdentity(int d, int k, int n, double beta,
                                         const OracleLearner& learner,
                                         const std::string& learner_name) {
  CheckSparseArgs(d, k, n, beta);
  return Enumerate(IdentityKind::kSparse, d, k, n, beta,
                   static_cast<double>(k) / d, 1.0, learner, learner_name);
}

IdentityCheckResult VerifySparseIdentity(int d, int k, int n, double beta,
                                         const CoinLearner& learner,
                                         std::span<const std::uint64_t> coins,
                                         const std::string& learner_name) {
  CheckSparseArgs(d, k, n, beta);
  return Enumerate(IdentityKind::kSparse, d, k, n, beta,
                   static_cast<double>(k) / d,
                   static_cast<double>(coins.size()),
                   AverageOverCoins(learner, coins), learner_name);
}

IdentityCheckResult VerifyScalingIdentity(int d, int n, double beta,
                                          double gamma,
                                          const OracleLearner& learner,
                                          const std::string& learner_name) {
  CheckScalingArgs(d, n, beta, gamma);
  return Enumerate(IdentityKind::kScaling, d, d, n, beta, gamma, 1.0, learner,
                   learner_name);
}

IdentityCheckResult VerifyScalingIdentity(int d, int n, double beta,
                                          double gamma,
                                          const CoinLearner& learner,
                                          std::span<const std::uint64_t> coins,
                                          const std::string& learner_name) {
  CheckScalingArgs(d, n, beta, gamma);
  return Enumerate(IdentityKind::kScaling, d, d, n, beta, gamma,
                   static_cast<double>(coins.size()),
                   AverageOverCoins(learner, coins), learner_name);
}

MeanCi MonteCarloSparseLhs(int d, int k, int n, double beta,
                           const OracleLearner& learner, std::size_t draws,
                           CounterRng& rng) {
  CheckSparseArgs(d, k, n, beta);
  if (draws < 2) throw std::invalid_argument("MonteCarloSparseLhs: draws < 2");
  const BetaPrior prior{beta, static_cast<double>(k) / d, d};
  const double c = static_cast<double>(d) / k;
  std::vector<double> values(draws);
  Dataset data(d);
  for (std::size_t t = 0; t < draws; ++t) {
    const SparsePopulation pop(SamplePrior(prior, rng), k);
    pop.SampleDataset(rng, n, &data);
    const std::vector<double> theta = learner(data);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto z = data.row(i);
      for (int j = 0; j < d; ++j) {
        if (z[j] != 0) sum += theta[j] * (z[j] - c * pop.mu().values[j]);
      }
    }
    values[t] = sum;
  }
  return MeanWithCi(values);
}

MeanCi MonteCarloScalingLhs(int d, int n, double beta, double gamma,
                            const OracleLearner& learner, std::size_t draws,
                            CounterRng& rng) {
  CheckScalingArgs(d, n, beta, gamma);
  if (draws < 2) throw std::invalid_argument("MonteCarloScalingLhs: draws < 2");
  const BetaPrior prior{beta, gamma, d};
  std::vector<double> values(draws);
  std::vector<double> lambda(d);
  Dataset data(d);
  for (std::size_t t = 0; t < draws; ++t) {
    const SparsePopulation pop(SamplePrior(prior, rng), d);
    const std::vector<double>& mu = pop.mu().values;
    for (int j = 0; j < d; ++j) {
      const double r = mu[j] / gamma;
      lambda[j] = (1.0 - r * r) / (1.0 - mu[j] * mu[j]);
    }
    pop.SampleDataset(rng, n, &data);
    const std::vector<double> theta = learner(data);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto z = data.row(i);
      for (int j = 0; j < d; ++j) sum += theta[j] * lambda[j] * (z[j] - mu[j]);
    }
    values[t] = sum;
  }
  return MeanWithCi(values);
}

BetaMomentCheck CheckBetaAbsMoment(double beta, double gamma,
                                   std::size_t n_samples, CounterRng& rng) {
  if (!(beta >= 1.0)) {
    throw std::invalid_argument("CheckBetaAbsMoment: beta must be >= 1");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("CheckBetaAbsMoment: gamma must lie in (0, 1]");
  }
  if (n_samples < 10000) {
    throw std::invalid_argument("CheckBetaAbsMoment: n_samples must be >= 1e4");
  }
  const BetaPrior prior{beta, gamma, 1};
  std::vector<double> values(n_samples);
  for (double& v : values) v = std::abs(SamplePriorCoordinate(prior, rng));
  const MeanCi ci = MeanWithCi(values);
  BetaMomentCheck check;
  check.estimate = ci.mean;
  check.half_width = ci.half_width;
  check.bound = gamma / (3.0 * std::sqrt(beta));
  check.pass = check.estimate + check.half_width >= check.bound;
  return check;
}

CardMomentsResult CheckCardMoments(
    std::span<const std::vector<double>> vectors,
    std::span<const double> betas) {
  if (vectors.empty() || vectors.size() != betas.size()) {
    throw std::invalid_argument(
        "CheckCardMoments: need matching nonempty vectors and betas");
  }
  CardMomentsResult result;
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    const std::vector<double>& a = vectors[t];
    if (a.empty()) throw std::invalid_argument("CheckCardMoments: empty vector");
    const double n = static_cast<double>(a.size());
    double a1 = 0.0, a2 = 0.0;
    std::size_t count = 0;
    for (double x : a) {
      a1 += x;
      a2 += x * x;
      if (x >= betas[t] / n) ++count;
    }
    const double excess = std::max(a1 - betas[t], 0.0);
    const double bound = a2 == 0.0 ? 0.0 : excess * excess / a2;
    ++result.checked;
    if (static_cast<double>(count) < bound) {
      result.pass = false;
      result.index = t;
      result.beta = betas[t];
      result.count = count;
      result.bound = bound;
      return result;
    }
  }
  return result;
}

std::vector<NamedLearner> GridLearners(int d, int k) {
  const ProblemSpec box = ProblemSpec::BoxLp(d, 2.0, k);
  std::vector<NamedLearner> learners;
  learners.push_back({"clipped_mean", [](const Dataset& data) {
                        std::vector<double> m = data.Mean();
                        for (double& v : m) v = std::clamp(v, -1.0, 1.0);
                        return m;
                      }});
  learners.push_back({"support_argmax_mean", [box](const Dataset& data) {
                        return SupportArgmax(box, data.Mean()).theta;
                      }});
  learners.push_back({"cube_of_mean", [](const Dataset& data) {
                        std::vector<double> m = data.Mean();
                        for (double& v : m) v = v * v * v;
                        return m;
                      }});
  return learners;
}

VerifyGridResult RunVerifyGrid(double tolerance) {
  VerifyGridResult grid;
  auto add = [&](IdentityCheckResult r) {
    grid.max_rel_error = std::max(grid.max_rel_error, r.rel_error);
    grid.checks.push_back(std::move(r));
  };
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k <= d; ++k) {
      for (const NamedLearner& l : GridLearners(d, k)) {
        for (int n = 1; n <= 2; ++n) {
          for (double beta : {1.0, 2.0, 5.0}) {
            add(VerifySparseIdentity(d, k, n, beta, l.learner, l.name));
          }
        }
      }
    }
  }
  for (double beta : {1.0, 2.0, 5.0}) {
    IdentityCheckResult r = VerifySparseIdentity(
        1, 1, 1, beta, GridLearners(1, 1).front().learner, "identity");
    const double closed = 2.0 * beta / (2.0 * beta + 1.0);
    for (double side : {r.lhs, r.rhs}) {
      IdentityCheckResult anchor;
      anchor.lhs = side;
      anchor.rhs = closed;
      anchor.rel_error = RelativeError(side, closed);
      anchor.instance_descriptor = r.instance_descriptor + " vs 2b/(2b+1)";
      add(anchor);
    }
  }
  for (int d = 1; d <= 2; ++d) {
    for (const NamedLearner& l : GridLearners(d, d)) {
      for (int n = 1; n <= 2; ++n) {
        for (double beta : {1.0, 3.0}) {
          for (double gamma : {0.3, 0.9}) {
            add(VerifyScalingIdentity(d, n, beta, gamma, l.learner, l.name));
          }
          const IdentityCheckResult sparse =
              VerifySparseIdentity(d, d, n, beta, l.learner, l.name);
          const IdentityCheckResult scaling =
              VerifyScalingIdentity(d, n, beta, 1.0, l.learner, l.name);
          add(scaling);
          for (bool left : {true, false}) {
            IdentityCheckResult cross;
            cross.lhs = left ? sparse.lhs : sparse.rhs;
            cross.rhs = left ? scaling.lhs : scaling.rhs;
            cross.rel_error = RelativeError(cross.lhs, cross.rhs);
            cross.instance_descriptor = sparse.instance_descriptor +
                                        (left ? " lhs" : " rhs") +
                                        " vs scaling gamma=1";
            add(cross);
          }
        }
      }
    }
  }
  grid.pass = grid.max_rel_error <= tolerance;
  return grid;
}

}  // namespace fingertrace
