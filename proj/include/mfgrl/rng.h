// Copyright 2026 The mfgrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFGRL_RNG_H_
#define MFGRL_RNG_H_

#include <array>
#include <cstdint>
#include <span>

namespace mfgrl {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// Coordinates of an independent stream. `domain` separates consumers
// (solver sampling, rollouts, restarts) that would otherwise reuse the same
// (stage, cell, batch, lane) tuple.
struct StreamId {
  uint32_t domain = 0;
  uint32_t stage = 0;
  uint32_t cell = 0;
  uint32_t batch = 0;
  uint32_t lane = 0;
};

// Counter-based random stream. Draw k of the stream keyed by (seed, id) is
// a pure function of (seed, id, k), so workers that own distinct ids never
// share randomness and results do not depend on scheduling.
class RngStream {
 public:
  RngStream(uint64_t seed, StreamId id);

  uint32_t NextU32();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Index drawn from `probs` (assumed to sum to one) by inversion.
  int Categorical(std::span<const double> probs);

 private:
  void Refill();

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> counter_;
  std::array<uint32_t, 4> block_{};
  int used_ = 4;
};

}  // namespace mfgrl

#endif  // MFGRL_RNG_H_
