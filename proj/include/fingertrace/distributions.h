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
#ifndef FINGERTRACE_DISTRIBUTIONS_H_
#define FINGERTRACE_DISTRIBUTIONS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fingertrace/random.h"

namespace fingertrace {

// A coordinate-mean vector together with the box it must live in.
struct MeanVector {
  std::vector<double> values;
  double box_bound = 1.0;

  std::size_t dim() const { return values.size(); }

  // Throws std::invalid_argument if empty or some |values[j]| > box_bound.
  void Validate() const;
};

// A vector in {-1, 0, +1}^d and its sorted support.
struct TernarySample {
  std::vector<std::int8_t> entries;
  std::vector<int> support;

  // Builds the support from the entries; throws on non-ternary values.
  static TernarySample FromEntries(std::vector<std::int8_t> entries);
};

// n ternary samples of a common dimension, stored row-major.
class Dataset {
 public:
  explicit Dataset(std::size_t dim) : dim_(dim) {}
  Dataset(std::size_t dim, std::size_t n) : dim_(dim), data_(dim * n, 0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const std::int8_t> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<std::int8_t> mutable_row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }

  void Append(std::span<const std::int8_t> z);
  void Append(const TernarySample& z) { Append(z.entries); }

  // The first m rows.
  Dataset Prefix(std::size_t m) const;

  // Coordinatewise average of the rows.
  std::vector<double> Mean() const;

 private:
  std::size_t dim_;
  std::vector<std::int8_t> data_;
};

// The sparse family D_{mu,k}: a uniformly random size-k support, and on it
// independent signs with P(z_j = +1) = (1 + (d/k) mu_j) / 2.
// With k = d this is the product distribution on {-1,+1}^d with mean mu.
class SparsePopulation {
 public:
  // Throws std::invalid_argument unless 1 <= k <= d = mu.dim() and
  // |mu_j| <= k/d.
  SparsePopulation(MeanVector mu, int k);

  const MeanVector& mu() const { return mu_; }
  int k() const { return k_; }
  int d() const { return static_cast<int>(mu_.dim()); }

  TernarySample Sample(CounterRng& rng) const;

  // Writes one draw into `out` (length d). Faster than Sample() for k = d.
  void SampleInto(CounterRng& rng, std::span<std::int8_t> out) const;

  void SampleDataset(CounterRng& rng, std::size_t n, Dataset* out) const;

 private:
  MeanVector mu_;
  int k_;
  // P(+1) quantized to 31 bits; +1 iff (word >> 1) <= threshold.
  std::vector<std::int32_t> threshold_;
};

// Uniform size-k subset of {0, ..., d-1}, sorted. Partial Fisher-Yates.
std::vector<int> SampleSupport(int d, int k, CounterRng& rng);

// Exact mass of z under D_{mu,k}; 0 when ||z||_0 != k.
double Pmf(const SparsePopulation& pop, std::span<const std::int8_t> z);

double BinomialCoefficient(int n, int k);

// Product of d rescaled symmetric beta laws on [-gamma, gamma], density
// proportional to (1 - (x/gamma)^2)^(beta - 1).
struct BetaPrior {
  double beta = 1.0;
  double gamma = 1.0;
  int d = 1;

  void Validate() const;
};

// gamma * (G1 - G2) / (G1 + G2) with G1, G2 ~ Gamma(beta, 1).
MeanVector SamplePrior(const BetaPrior& prior, CounterRng& rng);
double SamplePriorCoordinate(const BetaPrior& prior, CounterRng& rng);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Jacobi rule for one coordinate of the prior with
// ceil((max_degree + 1) / 2) nodes, exact through max_degree.
QuadratureRule PriorQuadrature(const BetaPrior& prior, int max_degree);

}  // namespace fingertrace

#endif  // FINGERTRACE_DISTRIBUTIONS_H_
