// Copyright 2026 The qread Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace qread {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of trajectory `index` under root seed `root`: mix64(root ^ mix64(index)).
/// Streams depend only on (root, index), never on scheduling.
inline constexpr std::uint64_t stream_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(root ^ mix64(index));
}

/// Standard-normal draws for one trajectory.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t root, std::uint64_t index) : engine_(stream_seed(root, index)) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qread
