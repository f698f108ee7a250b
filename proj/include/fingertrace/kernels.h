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
#ifndef FINGERTRACE_KERNELS_H_
#define FINGERTRACE_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fingertrace {

// Inner loops of the Monte Carlo path. Every entry has a scalar reference
// implementation; wider variants must agree with it bit-for-bit on integer
// kernels and to rounding on the floating-point reduction.
struct KernelTable {
  std::string_view name;

  // Philox4x32-10 blocks [first_block, first_block + n_blocks) of stream
  // `key`; writes 4 * n_blocks words.
  void (*philox_blocks)(std::uint64_t key, std::uint64_t first_block,
                        std::size_t n_blocks, std::uint32_t* out);

  // out[j] = +1 if (words[j] >> 1) <= threshold[j] else -1.
  // A threshold of -1 never fires, 2^31 - 1 always does.
  void (*signs_from_words)(const std::uint32_t* words,
                           const std::int32_t* threshold, std::int8_t* out,
                           std::size_t d);

  // sum_j z[j] * w[j] - |z[j]| * b[j] for ternary z.
  double (*ternary_affine_dot)(const std::int8_t* z, const double* w,
                               const double* b, std::size_t d);

  // acc[j] += z[j].
  void (*accumulate_ternary)(const std::int8_t* z, std::int32_t* acc,
                             std::size_t d);
};

const KernelTable& ScalarKernels();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* Avx2Kernels();

// The table used by the library. Picks the widest supported variant once per
// process; FINGERTRACE_KERNELS=scalar forces the reference path.
const KernelTable& ActiveKernels();

}  // namespace fingertrace

#endif  // FINGERTRACE_KERNELS_H_
