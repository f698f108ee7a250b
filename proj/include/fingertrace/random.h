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
#ifndef FINGERTRACE_RANDOM_H_
#define FINGERTRACE_RANDOM_H_

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace fingertrace {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit key selects the stream and a 64-bit block counter walks it;
// every block yields four 32-bit words. Words are handed out in order, so a
// bulk Fill() and repeated operator() calls produce the same sequence.
// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (buffered_ == 0) Refill();
    return buffer_[4 - buffered_--];
  }

  // Writes the next out.size() words of the stream.
  void Fill(std::span<std::uint32_t> out);

  // Uniform in [0, 1) with 53 random bits.
  double NextUnit() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t block() const { return block_; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> Block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

 private:
  void Refill();

  std::uint64_t key_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

// Purpose tags keep the substreams of one trial disjoint.
enum class Purpose : std::uint64_t {
  kPrior = 1,
  kTrainData = 2,
  kFreshData = 3,
  kNullData = 4,
  kLearner = 5,
  kIndependentData = 6,
  kPilot = 7,
  kOracle = 8,
  kLipschitz = 9,
};

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// substream id = Mix64(Mix64(Mix64(seed + golden) ^ trial) ^ purpose).
constexpr std::uint64_t SubstreamId(std::uint64_t master_seed,
                                    std::uint64_t trial_index,
                                    std::uint64_t purpose) {
  std::uint64_t h = Mix64(master_seed + 0x9e3779b97f4a7c15ULL);
  h = Mix64(h ^ trial_index);
  return Mix64(h ^ purpose);
}

inline CounterRng Substream(std::uint64_t master_seed, std::uint64_t trial,
                            Purpose purpose) {
  return CounterRng(
      SubstreamId(master_seed, trial, static_cast<std::uint64_t>(purpose)));
}

}  // namespace fingertrace

#endif  // FINGERTRACE_RANDOM_H_
