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
#include "fingertrace/distributions.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "fingertrace/kernels.h"

namespace fingertrace {
namespace {

constexpr double kBoxSlack = 1e-12;

std::int32_t SignThreshold(double p_plus) {
  const double scaled = std::round(std::clamp(p_plus, 0.0, 1.0) * 0x1.0p31);
  return static_cast<std::int32_t>(static_cast<std::int64_t>(scaled) - 1);
}

}  // namespace

void MeanVector::Validate() const {
  if (values.empty()) {
    throw std::invalid_argument("MeanVector: dimension must be >= 1");
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(std::abs(values[j]) <= box_bound * (1.0 + kBoxSlack))) {
      throw std::invalid_argument("MeanVector: |mu[" + std::to_string(j) +
                                  "]| exceeds box bound " +
                                  std::to_string(box_bound));
    }
  }
}

TernarySample TernarySample::FromEntries(std::vector<std::int8_t> entries) {
  TernarySample z;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    if (entries[j] < -1 || entries[j] > 1) {
      throw std::invalid_argument("TernarySample: entries must be in {-1,0,1}");
    }
    if (entries[j] != 0) z.support.push_back(static_cast<int>(j));
  }
  z.entries = std::move(entries);
  return z;
}

void Dataset::Append(std::span<const std::int8_t> z) {
  if (z.size() != dim_) {
    throw std::invalid_argument("Dataset: sample dimension mismatch");
  }
  data_.insert(data_.end(), z.begin(), z.end());
}

Dataset Dataset::Prefix(std::size_t m) const {
  if (m > size()) throw std::invalid_argument("Dataset: prefix too long");
  Dataset out(dim_);
  out.data_.assign(data_.begin(), data_.begin() + m * dim_);
  return out;
}

std::vector<double> Dataset::Mean() const {
  if (empty()) throw std::invalid_argument("Dataset: empty");
  std::vector<std::int32_t> acc(dim_, 0);
  const KernelTable& kernels = ActiveKernels();
  for (std::size_t i = 0; i < size(); ++i) {
    kernels.accumulate_ternary(row(i).data(), acc.data(), dim_);
  }
  std::vector<double> mean(dim_);
  const double n = static_cast<double>(size());
  for (std::size_t j = 0; j < dim_; ++j) mean[j] = acc[j] / n;
  return mean;
}

SparsePopulation::SparsePopulation(MeanVector mu, int k)
    : mu_(std::move(mu)), k_(k) {
  const int d = static_cast<int>(mu_.dim());
  if (d < 1) throw std::invalid_argument("SparsePopulation: d must be >= 1");
  if (k < 1 || k > d) {
    throw std::invalid_argument("SparsePopulation: k must lie in [1, d]");
  }
  mu_.box_bound = static_cast<double>(k) / d;
  mu_.Validate();
  const double scale = static_cast<double>(d) / k;
  threshold_.resize(d);
  for (int j = 0; j < d; ++j) {
    threshold_[j] = SignThreshold((1.0 + scale * mu_.values[j]) / 2.0);
  }
}

std::vector<int> SampleSupport(int d, int k, CounterRng& rng) {
  if (d < 1 || k < 1 || k > d) {
    throw std::invalid_argument("SampleSupport: need 1 <= k <= d");
  }
  std::vector<int> index(d);
  std::iota(index.begin(), index.end(), 0);
  if (k < d) {
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(index[i], index[pick(rng)]);
    }
    index.resize(k);
    std::sort(index.begin(), index.end());
  }
  return index;
}

void SparsePopulation::SampleInto(CounterRng& rng,
                                  std::span<std::int8_t> out) const {
  const int d = this->d();
  if (static_cast<int>(out.size()) != d) {
    throw std::invalid_argument("SparsePopulation: output length != d");
  }
  const KernelTable& kernels = ActiveKernels();
  if (k_ == d) {
    std::vector<std::uint32_t> words(d);
    rng.Fill(words);
    kernels.signs_from_words(words.data(), threshold_.data(), out.data(), d);
    return;
  }
  const std::vector<int> support = SampleSupport(d, k_, rng);
  std::fill(out.begin(), out.end(), std::int8_t{0});
  for (int j : support) {
    const auto u = static_cast<std::int32_t>(rng() >> 1);
    out[j] = u <= threshold_[j] ? std::int8_t{1} : std::int8_t{-1};
  }
}

TernarySample SparsePopulation::Sample(CounterRng& rng) const {
  std::vector<std::int8_t> entries(d());
  SampleInto(rng, entries);
  return TernarySample::FromEntries(std::move(entries));
}

void SparsePopulation::SampleDataset(CounterRng& rng, std::size_t n,
                                     Dataset* out) const {
  if (out->dim() != static_cast<std::size_t>(d())) {
    throw std::invalid_argument("SparsePopulation: dataset dimension != d");
  }
  *out = Dataset(d(), n);
  if (k_ == d()) {
    // One bulk draw for the whole block; same words as row-by-row filling.
    const std::size_t total = n * static_cast<std::size_t>(d());
    std::vector<std::uint32_t> words(total);
    rng.Fill(words);
    const KernelTable& kernels = ActiveKernels();
    for (std::size_t i = 0; i < n; ++i) {
      kernels.signs_from_words(words.data() + i * d(), threshold_.data(),
                               out->mutable_row(i).data(), d());
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) SampleInto(rng, out->mutable_row(i));
}

double BinomialCoefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

double Pmf(const SparsePopulation& pop, std::span<const std::int8_t> z) {
  const int d = pop.d();
  if (static_cast<int>(z.size()) != d) {
    throw std::invalid_argument("Pmf: dimension mismatch");
  }
  const double scale = static_cast<double>(d) / pop.k();
  int l0 = 0;
  double mass = 1.0;
  for (int j = 0; j < d; ++j) {
    if (z[j] < -1 || z[j] > 1) {
      throw std::invalid_argument("Pmf: entries must be in {-1,0,1}");
    }
    if (z[j] == 0) continue;
    ++l0;
    mass *= (1.0 + scale * pop.mu().values[j] * z[j]) / 2.0;
  }
  if (l0 != pop.k()) return 0.0;
  return mass / BinomialCoefficient(d, pop.k());
}

void BetaPrior::Validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("BetaPrior: beta must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("BetaPrior: gamma must lie in (0, 1]");
  }
  if (d < 1) throw std::invalid_argument("BetaPrior: d must be >= 1");
}

double SamplePriorCoordinate(const BetaPrior& prior, CounterRng& rng) {
  std::gamma_distribution<double> gamma_law(prior.beta, 1.0);
  const double g1 = gamma_law(rng);
  const double g2 = gamma_law(rng);
  const double total = g1 + g2;
  // Both draws underflow only for tiny beta; the midpoint is then as good
  // as any other point.
  if (!(total > 0.0)) return 0.0;
  return std::clamp(prior.gamma * (g1 - g2) / total, -prior.gamma,
                    prior.gamma);
}

MeanVector SamplePrior(const BetaPrior& prior, CounterRng& rng) {
  prior.Validate();
  MeanVector mu;
  mu.box_bound = prior.gamma;
  mu.values.resize(prior.d);
  for (double& v : mu.values) v = SamplePriorCoordinate(prior, rng);
  return mu;
}

}  // namespace fingertrace
