// Copyright 2026 The Tripsynth Authors
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

#ifndef TRIPSYNTH_RNG_HPP_
#define TRIPSYNTH_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace tripsynth {

// Counter-based deterministic generator. The output stream is a pure
// function of (seed, counter): word i is splitmix64_mix(seed + i*GAMMA),
// so state is two integers and any draw sequence can be resumed exactly
// by restoring them.
//
// Stream contract (version "tripsynth-rng/1", part of the file formats that
// embed RNG state):
//   * next_u64: SplitMix64 with gamma 0x9E3779B97F4A7C15.
//   * uniform): top 53 bits of next_u64, scaled by 2^-53 -> [0,1).
//   * next_below(b): rejection on next_u64, threshold 2^64 mod b.
//   * gaussian: Marsaglia polar method, second variate discarded; the
//     logarithm is evaluated by a fixed internal polynomial (no libm), so
//     the stream is bit-identical on any IEEE-754 platform.
//   * gaussian with stddev 0 returns the mean and consumes no draws.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}
  SeededRng(std::uint64_t seed, std::uint64_t counter)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  static constexpr std::string_view stream_version() {
    return "tripsynth-rng/1";
  }

  std::uint64_t next_u64();

  // Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  // [0,1) with 53-bit resolution.
  double uniform();
  // [lo, hi).
  double uniform(double lo, double hi);

  double gaussian(double mean, double stddev);

  // Independent substream: a new generator whose seed is a mix of this
  // generator's seed, a purpose tag, and an index. Pure function; the parent
  // consumes nothing.
  SeededRng derive(std::uint64_t tag, std::uint64_t index) const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

namespace detail {
// ln(x) for x > 0 via frexp + atanh series, fixed operation order. Exposed
// for tests; accuracy a few ulp against libm.
double portable_log(double x);
}  // namespace detail

}  // namespace tripsynth

#endif  // TRIPSYNTH_RNG_HPP_
