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
#ifndef FINGERTRACE_STATS_H_
#define FINGERTRACE_STATS_H_

#include <cstddef>
#include <span>

namespace fingertrace {

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

// Recursive pairwise sum; the result depends only on the order of xs.
double PairwiseSum(std::span<const double> xs);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // kZ95 * sample sd / sqrt(count)
  double sd = 0.0;
  std::size_t count = 0;
};

MeanCi MeanWithCi(std::span<const double> xs);

// kZ95 * sqrt(p (1 - p) / m).
double BinomialHalfWidth(double p, std::size_t m);

}  // namespace fingertrace

#endif  // FINGERTRACE_STATS_H_
