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
#include <cstdint>
#include <cstdlib>

#include "fingertrace/kernels.h"
#include "kernels/philox_round.h"

namespace fingertrace {
namespace {

void PhiloxBlocksScalar(std::uint64_t key, std::uint64_t first_block,
                        std::size_t n_blocks, std::uint32_t* out) {
  const auto k = internal::StreamKey(key);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const auto words =
        internal::PhiloxBlock(internal::StreamCounter(first_block + b), k);
    for (int i = 0; i < 4; ++i) out[4 * b + i] = words[i];
  }
}

void SignsFromWordsScalar(const std::uint32_t* words,
                          const std::int32_t* threshold, std::int8_t* out,
                          std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    const auto u = static_cast<std::int32_t>(words[j] >> 1);
    out[j] = u <= threshold[j] ? std::int8_t{1} : std::int8_t{-1};
  }
}

double TernaryAffineDotScalar(const std::int8_t* z, const double* w,
                              const double* b, std::size_t d) {
  double sum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double zj = z[j];
    sum += zj * w[j] - std::abs(zj) * b[j];
  }
  return sum;
}

void AccumulateTernaryScalar(const std::int8_t* z, std::int32_t* acc,
                             std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) acc[j] += z[j];
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{
      "scalar",
      &PhiloxBlocksScalar,
      &SignsFromWordsScalar,
      &TernaryAffineDotScalar,
      &AccumulateTernaryScalar,
  };
  return table;
}

}  // namespace fingertrace
