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

#include "tripsynth/rng.hpp"

#include <cmath>
#include <cstdint>

#include "tripsynth/error.hpp"

namespace tripsynth {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

namespace detail {

double portable_log(double x) {
  if (!(x > 0.0)) {
    throw ValueError("portable_log requires a positive argument");
  }
  int e = 0;
  double m = std::frexp(x, &e);  // exact: m in [0.5, 1)
  // Re-center m into [sqrt(1/2), sqrt(2)) so |z| stays small.
  if (m < 0.70710678118654752440) {
    m = m * 2.0;
    e -= 1;
  }
  const double z = (m - 1.0) / (m + 1.0);
  const double z2 = z * z;
  // ln m = 2 * atanh(z) = 2z * sum z^{2k}/(2k+1), k = 0..11. |z2| <= 0.0295,
  // so the truncation error is far below one ulp of the result.
  double p = 1.0 / 23.0;
  p = p * z2 + 1.0 / 21.0;
  p = p * z2 + 1.0 / 19.0;
  p = p * z2 + 1.0 / 17.0;
  p = p * z2 + 1.0 / 15.0;
  p = p * z2 + 1.0 / 13.0;
  p = p * z2 + 1.0 / 11.0;
  p = p * z2 + 1.0 / 9.0;
  p = p * z2 + 1.0 / 7.0;
  p = p * z2 + 1.0 / 5.0;
  p = p * z2 + 1.0 / 3.0;
  p = p * z2 + 1.0;
  const double ln_m = 2.0 * z * p;
  constexpr double kLn2 = 0.69314718055994530942;
  return static_cast<double>(e) * kLn2 + ln_m;
}

}  // namespace detail

std::uint64_t SeededRng::next_u64() {
  counter_ += 1;
  return mix64(seed_ + counter_ * kGamma);
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
  if (bound == 0) {
    throw ValueError("next_below requires a positive bound");
  }
  // Rejection below 2^64 mod bound keeps the result unbiased.
  const std::uint64_t threshold = (~bound + 1) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw ValueError("uniform requires lo < hi");
  }
  return lo + uniform() * (hi - lo);
}

double SeededRng::gaussian(double mean, double stddev) {
  if (stddev < 0.0) {
    throw ValueError("gaussian requires a nonnegative stddev");
  }
  if (stddev == 0.0) return mean;
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = std::sqrt(-2.0 * detail::portable_log(s) / s);
    return mean + stddev * (u * f);
  }
}

SeededRng SeededRng::derive(std::uint64_t tag, std::uint64_t index) const {
  std::uint64_t s = mix64(seed_ + kGamma);
  s = mix64(s ^ mix64(tag + kGamma));
  s = mix64(s ^ mix64(index + kGamma));
  return SeededRng(s);
}

}  // namespace tripsynth
