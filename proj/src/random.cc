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
#include "fingertrace/random.h"

#include "fingertrace/kernels.h"
#include "kernels/philox_round.h"

namespace fingertrace {

std::array<std::uint32_t, 4> CounterRng::Block(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  return internal::PhiloxBlock(ctr, key);
}

void CounterRng::Refill() {
  buffer_ = internal::PhiloxBlock(internal::StreamCounter(block_++),
                                  internal::StreamKey(key_));
  buffered_ = 4;
}

void CounterRng::Fill(std::span<std::uint32_t> out) {
  std::size_t i = 0;
  while (i < out.size() && buffered_ > 0) out[i++] = (*this)();
  const std::size_t whole = (out.size() - i) / 4;
  if (whole > 0) {
    ActiveKernels().philox_blocks(key_, block_, whole, out.data() + i);
    block_ += whole;
    i += 4 * whole;
  }
  while (i < out.size()) out[i++] = (*this)();
}

}  // namespace fingertrace
