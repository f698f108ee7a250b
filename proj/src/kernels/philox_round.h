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
#ifndef FINGERTRACE_SRC_KERNELS_PHILOX_ROUND_H_
#define FINGERTRACE_SRC_KERNELS_PHILOX_ROUND_H_

#include <array>
#include <cstdint>

namespace fingertrace::internal {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;
inline constexpr int kPhiloxRounds = 10;

inline std::array<std::uint32_t, 4> PhiloxBlock(
    std::array<std::uint32_t, 4> x, std::array<std::uint32_t, 2> k) {
  for (int r = 0; r < kPhiloxRounds; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
         static_cast<std::uint32_t>(p0)};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return x;
}

// Counter layout used by CounterRng: {lo(block), hi(block), 0, 0}.
inline std::array<std::uint32_t, 4> StreamCounter(std::uint64_t block) {
  return {static_cast<std::uint32_t>(block),
          static_cast<std::uint32_t>(block >> 32), 0u, 0u};
}

inline std::array<std::uint32_t, 2> StreamKey(std::uint64_t key) {
  return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

}  // namespace fingertrace::internal

#endif  // FINGERTRACE_SRC_KERNELS_PHILOX_ROUND_H_
