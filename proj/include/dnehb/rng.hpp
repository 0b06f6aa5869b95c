// Copyright 2026 The dnehb Authors.
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

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace dnehb {

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq with the four
/// 32-bit words (seed_lo, seed_hi, stream_lo, stream_hi); both are pinned by
/// the C++ standard. The value transforms are implemented here instead of
/// using <random> distributions, whose algorithms are implementation-defined:
///
///   uniform()   = (next() >> 11) * 2^-53                 in [0, 1)
///   index(n)    = floor(uniform() * n)                   in [0, n)
///   normal()    = Box-Muller on (1 - uniform(), uniform()), cosine branch
///                 first, sine branch cached for the following call
///
/// Independent streams for the same seed (instance, initial state, graph k)
/// are selected with the `stream` argument.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates, drawing j = index(i + 1) for i = n-1 down to 1.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace streams {
inline constexpr std::uint64_t kInstance = 1;
inline constexpr std::uint64_t kInitialState = 2;
// Graph k of a schedule uses stream kGraphBase + k.
inline constexpr std::uint64_t kGraphBase = std::uint64_t{1} << 40;
}  // namespace streams

}  // namespace dnehb
