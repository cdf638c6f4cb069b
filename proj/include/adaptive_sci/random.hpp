// -*-c++-*---------------------------------------------------------------------------------------
// Copyright 2026 The adaptive_sci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADAPTIVE_SCI_RANDOM_HPP
#define ADAPTIVE_SCI_RANDOM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

// The std:: distributions are implementation-defined, so every draw goes
// through these helpers on top of mt19937_64 to keep outputs bit-identical
// across standard libraries.
namespace adaptive_sci
{
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng & rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng & rng, std::size_t n)
{
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

inline bool bernoulli(Rng & rng, double p) { return uniform01(rng) < p; }

/// Standard normal via Box-Muller (one value per call, the sine branch is discarded).
inline double standard_normal(Rng & rng)
{
  double u1 = uniform01(rng);
  while (u1 <= 0.0) {
    u1 = uniform01(rng);
  }
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derive an independent stream seed from a base seed and a salt (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt)
{
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_RANDOM_HPP
