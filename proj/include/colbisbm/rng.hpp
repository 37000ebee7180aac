// Copyright 2026 The colbisbm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLBISBM_RNG_HPP
#define COLBISBM_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace colbisbm {

// Named sub-streams hanging off the single root seed. Every source of
// randomness in the library derives its generator as
// make_rng(root, {stream, ids...}), so results do not depend on thread
// scheduling or on how many sibling tasks run.
enum SeedStream : std::uint64_t {
  kStreamSpectral = 1,
  kStreamPerturb = 2,
  kStreamSweep = 3,
  kStreamSplit = 4,
  kStreamSample = 5,
  kStreamEdges = 6,
  kStreamSigma = 7,
  kStreamDegrade = 8,
  kStreamRestart = 9,
  kStreamSepNetwork = 10,
  kStreamGroup = 11,
  kStreamReplicate = 12,
};

// splitmix64 finalizer; bijective on 64-bit ints.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t seed_stream(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  for (std::uint64_t v : path) seed = mix64(seed ^ mix64(v));
  return seed;
}

inline std::mt19937_64 make_rng(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(seed_stream(seed, path));
}

}  // namespace colbisbm

#endif  // COLBISBM_RNG_HPP
