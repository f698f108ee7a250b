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
// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cstdint>
#include <cstdlib>
#include <cstring>

#include "fingertrace/kernels.h"
#include "kernels/philox_round.h"

namespace fingertrace {
namespace {

// Per-lane 32x32 -> (hi, lo) for eight lanes.
inline void MulHiLo(__m256i a, __m256i m, __m256i* hi, __m256i* lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  *lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  *hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

void PhiloxBlocksAvx2(std::uint64_t key, std::uint64_t first_block,
                      std::size_t n_blocks, std::uint32_t* out) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(internal::kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(internal::kPhiloxM1));
  const auto k_init = internal::StreamKey(key);

  std::size_t b = 0;
  for (; b + 8 <= n_blocks; b += 8) {
    alignas(32) std::uint32_t lo_ctr[8];
    alignas(32) std::uint32_t hi_ctr[8];
    for (int i = 0; i < 8; ++i) {
      const std::uint64_t blk = first_block + b + i;
      lo_ctr[i] = static_cast<std::uint32_t>(blk);
      hi_ctr[i] = static_cast<std::uint32_t>(blk >> 32);
    }
    __m256i x0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo_ctr));
    __m256i x1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi_ctr));
    __m256i x2 = _mm256_setzero_si256();
    __m256i x3 = _mm256_setzero_si256();
    std::uint32_t k0 = k_init[0];
    std::uint32_t k1 = k_init[1];
    for (int r = 0; r < internal::kPhiloxRounds; ++r) {
      __m256i hi0, lo0, hi1, lo1;
      MulHiLo(x0, m0, &hi0, &lo0);
      MulHiLo(x2, m1, &hi1, &lo1);
      const __m256i kv0 = _mm256_set1_epi32(static_cast<int>(k0));
      const __m256i kv1 = _mm256_set1_epi32(static_cast<int>(k1));
      x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), kv0);
      x1 = lo1;
      x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), kv1);
      x3 = lo0;
      k0 += internal::kPhiloxW0;
      k1 += internal::kPhiloxW1;
    }
    // 4x8 transpose into block-major order.
    const __m256i t01lo = _mm256_unpacklo_epi32(x0, x1);
    const __m256i t23lo = _mm256_unpacklo_epi32(x2, x3);
    const __m256i t01hi = _mm256_unpackhi_epi32(x0, x1);
    const __m256i t23hi = _mm256_unpackhi_epi32(x2, x3);
    const __m256i b04 = _mm256_unpacklo_epi64(t01lo, t23lo);
    const __m256i b15 = _mm256_unpackhi_epi64(t01lo, t23lo);
    const __m256i b26 = _mm256_unpacklo_epi64(t01hi, t23hi);
    const __m256i b37 = _mm256_unpackhi_epi64(t01hi, t23hi);
    auto* dst = reinterpret_cast<__m256i*>(out + 4 * b);
    _mm256_storeu_si256(dst + 0, _mm256_permute2x128_si256(b04, b15, 0x20));
    _mm256_storeu_si256(dst + 1, _mm256_permute2x128_si256(b26, b37, 0x20));
    _mm256_storeu_si256(dst + 2, _mm256_permute2x128_si256(b04, b15, 0x31));
    _mm256_storeu_si256(dst + 3, _mm256_permute2x128_si256(b26, b37, 0x31));
  }
  for (; b < n_blocks; ++b) {
    const auto words =
        internal::PhiloxBlock(internal::StreamCounter(first_block + b), k_init);
    for (int i = 0; i < 4; ++i) out[4 * b + i] = words[i];
  }
}

inline __m256i SignLanes(const std::uint32_t* words, const std::int32_t* thr) {
  const __m256i u = _mm256_srli_epi32(
      _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words)), 1);
  const __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(thr));
  const __m256i gt = _mm256_cmpgt_epi32(u, t);
  return _mm256_or_si256(_mm256_add_epi32(gt, gt), _mm256_set1_epi32(1));
}

void SignsFromWordsAvx2(const std::uint32_t* words,
                        const std::int32_t* threshold, std::int8_t* out,
                        std::size_t d) {
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  std::size_t j = 0;
  for (; j + 32 <= d; j += 32) {
    const __m256i a = SignLanes(words + j, threshold + j);
    const __m256i b = SignLanes(words + j + 8, threshold + j + 8);
    const __m256i c = SignLanes(words + j + 16, threshold + j + 16);
    const __m256i e = SignLanes(words + j + 24, threshold + j + 24);
    const __m256i ab = _mm256_packs_epi32(a, b);
    const __m256i ce = _mm256_packs_epi32(c, e);
    const __m256i bytes =
        _mm256_permutevar8x32_epi32(_mm256_packs_epi16(ab, ce), order);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + j), bytes);
  }
  for (; j < d; ++j) {
    const auto u = static_cast<std::int32_t>(words[j] >> 1);
    out[j] = u <= threshold[j] ? std::int8_t{1} : std::int8_t{-1};
  }
}

inline __m256d LoadTernary4(const std::int8_t* z) {
  std::int32_t packed;
  std::memcpy(&packed, z, sizeof(packed));
  return _mm256_cvtepi32_pd(_mm_cvtepi8_epi32(_mm_cvtsi32_si128(packed)));
}

double TernaryAffineDotAvx2(const std::int8_t* z, const double* w,
                            const double* b, std::size_t d) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    const __m256d z0 = LoadTernary4(z + j);
    const __m256d z1 = LoadTernary4(z + j + 4);
    const __m256d t0 = _mm256_sub_pd(
        _mm256_mul_pd(z0, _mm256_loadu_pd(w + j)),
        _mm256_mul_pd(_mm256_andnot_pd(sign_mask, z0), _mm256_loadu_pd(b + j)));
    const __m256d t1 = _mm256_sub_pd(
        _mm256_mul_pd(z1, _mm256_loadu_pd(w + j + 4)),
        _mm256_mul_pd(_mm256_andnot_pd(sign_mask, z1),
                      _mm256_loadu_pd(b + j + 4)));
    acc0 = _mm256_add_pd(acc0, t0);
    acc1 = _mm256_add_pd(acc1, t1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < d; ++j) {
    const double zj = z[j];
    sum += zj * w[j] - std::abs(zj) * b[j];
  }
  return sum;
}

void AccumulateTernaryAvx2(const std::int8_t* z, std::int32_t* acc,
                           std::size_t d) {
  std::size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    const __m256i zi = _mm256_cvtepi8_epi32(
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(z + j)));
    auto* dst = reinterpret_cast<__m256i*>(acc + j);
    _mm256_storeu_si256(dst, _mm256_add_epi32(_mm256_loadu_si256(dst), zi));
  }
  for (; j < d; ++j) acc[j] += z[j];
}

}  // namespace

const KernelTable* Avx2Kernels() {
  static const KernelTable table{
      "avx2",
      &PhiloxBlocksAvx2,
      &SignsFromWordsAvx2,
      &TernaryAffineDotAvx2,
      &AccumulateTernaryAvx2,
  };
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
}

}  // namespace fingertrace
