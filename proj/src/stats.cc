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
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "fingertrace/parallel.h"
#include "fingertrace/stats.h"

namespace fingertrace {

int DefaultThreadCount() {
  if (const char* env = std::getenv("FINGERTRACE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double PairwiseSum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return PairwiseSum(xs.first(half)) + PairwiseSum(xs.subspan(half));
}

MeanCi MeanWithCi(std::span<const double> xs) {
  MeanCi out;
  out.count = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = PairwiseSum(xs) / n;
  if (xs.size() > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sq[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
    }
    out.sd = std::sqrt(PairwiseSum(sq) / (n - 1.0));
    out.half_width = kZ95 * out.sd / std::sqrt(n);
  }
  return out;
}

double BinomialHalfWidth(double p, std::size_t m) {
  if (m == 0) return 0.0;
  return kZ95 * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(m));
}

}  // namespace fingertrace
