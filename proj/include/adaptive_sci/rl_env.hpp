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

#ifndef ADAPTIVE_SCI_RL_ENV_HPP
#define ADAPTIVE_SCI_RL_ENV_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/random.hpp"

namespace adaptive_sci
{
/// Admissible compression ratios, strictly increasing.
struct StateSpace
{
  std::vector<int> values{6, 8, 10, 12, 15, 20};

  std::size_t size() const { return values.size(); }
  std::size_t last() const { return values.size() - 1; }
  int bmin() const { return values.front(); }
  int bmax() const { return values.back(); }
  int operator[](std::size_t i) const { return values[i]; }

  void validate() const
  {
    require(values.size() >= 2, "state space needs at least two compression ratios");
    require(values.front() >= 1, "compression ratios must be >= 1");
    for (std::size_t i = 1; i < values.size(); ++i) {
      require(values[i] > values[i - 1], "state space must be strictly increasing");
    }
  }

  std::optional<std::size_t> index_of(int B) const
  {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] == B) return i;
    }
    return std::nullopt;
  }
};

enum class Action { Decrease = 0, Keep = 1, Increase = 2 };

inline constexpr std::array<Action, 3> kActions{Action::Decrease, Action::Keep, Action::Increase};

inline std::string_view to_string(Action a)
{
  switch (a) {
    case Action::Decrease: return "decrease";
    case Action::Keep: return "keep";
    case Action::Increase: return "increase";
  }
  return "keep";
}

inline Action parse_action(std::string_view s)
{
  for (Action a : kActions) {
    if (to_string(a) == s) return a;
  }
  throw ValidationError("unknown action '" + std::string(s) + "'");
}

/// alpha: probability that Increase moves one state (else two).
/// beta: probability that Decrease moves two states (else one).
struct TransitionModel
{
  double alpha = 0.7;
  double beta = 0.3;

  void validate() const
  {
    require(alpha >= 0.0 && alpha <= 1.0, "transition.alpha must lie in [0,1]");
    require(beta >= 0.0 && beta <= 1.0, "transition.beta must lie in [0,1]");
  }
};

struct RewardConfig
{
  double drth = 0.75;
  double psnrth = 26.0;
  double r1 = 1.0;
  double r2 = -1.0;
  double lambda1 = 1.5;
  double lambda2 = 0.5;
  double psnr_low = 24.0;
  double psnr_high = 28.0;

  void validate() const
  {
    require(drth > 0.0 && drth < 1.0, "reward.drth must lie in (0,1)");
    require(r1 > 0.0, "reward.r1 must be positive");
    require(r2 < 0.0, "reward.r2 must be negative");
    require(lambda1 > 1.0 && lambda1 < 2.0, "reward.lambda1 must lie in (1,2)");
    require(lambda2 > 0.0 && lambda2 < 1.0, "reward.lambda2 must lie in (0,1)");
    require(psnr_low < psnr_high, "reward.psnr_low must be below reward.psnr_high");
  }
};

/// Next-state distribution, ordered by next-state index, zero-probability
/// outcomes omitted. Jumps are at most two states; a move that would leave
/// the space is a no-op.
inline std::vector<std::pair<std::size_t, double>> transition_distribution(
  const StateSpace & space, std::size_t s, Action a, const TransitionModel & t)
{
  require(s < space.size(), "state index out of range");
  const std::size_t last = space.last();
  std::vector<std::pair<std::size_t, double>> out;
  const auto add = [&](std::size_t next, double p) {
    if (p <= 0.0) return;
    for (auto & [n, q] : out) {
      if (n == next) {
        q += p;
        return;
      }
    }
    out.emplace_back(next, p);
  };
  switch (a) {
    case Action::Keep:
      add(s, 1.0);
      break;
    case Action::Increase:
      if (s == last) {
        add(s, 1.0);
      } else if (s + 1 == last) {
        add(last, 1.0);
      } else {
        add(s + 1, t.alpha);
        add(s + 2, 1.0 - t.alpha);
      }
      break;
    case Action::Decrease:
      if (s == 0) {
        add(s, 1.0);
      } else if (s == 1) {
        add(0, 1.0);
      } else {
        add(s - 2, t.beta);
        add(s - 1, 1.0 - t.beta);
      }
      break;
  }
  return out;
}

/// Samples the next state index (one uniform draw per call).
inline std::size_t step(
  const StateSpace & space, std::size_t s, Action a, const TransitionModel & t, Rng & rng)
{
  const auto dist = transition_distribution(space, s, a, t);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (const auto & [next, p] : dist) {
    acc += p;
    if (u < acc) return next;
  }
  return dist.back().first;
}

/// Detection-rate reward with optional PSNR modulation.
///   rate <  drth: r1 for Decrease, or Keep at the smallest B; r2 otherwise.
///   rate >= drth: r1 for Increase, or Keep at the largest B; r2 otherwise.
/// With a PSNR above psnrth positive rewards are amplified by lambda1 and
/// penalties damped by lambda2; at or below psnrth the roles swap.
inline double reward(
  Action a, std::size_t s, const StateSpace & space, double detect_rate, std::optional<double> psnr,
  const RewardConfig & cfg)
{
  require(s < space.size(), "state index out of range");
  require(detect_rate >= 0.0 && detect_rate <= 1.0, "detection rate must lie in [0,1]");
  const bool at_min = s == 0;
  const bool at_max = s == space.last();
  double r = 0.0;
  if (detect_rate < cfg.drth) {
    r = (a == Action::Decrease || (a == Action::Keep && at_min)) ? cfg.r1 : cfg.r2;
  } else {
    r = (a == Action::Increase || (a == Action::Keep && at_max)) ? cfg.r1 : cfg.r2;
  }
  if (psnr) {
    if (*psnr > cfg.psnrth) {
      r *= r > 0.0 ? cfg.lambda1 : cfg.lambda2;
    } else {
      r *= r > 0.0 ? cfg.lambda2 : cfg.lambda1;
    }
  }
  return r;
}

/// PSNR-only reward: |PSNR - 24| * B inside the good band, negative below it
/// and positive above it, with the same linear slope on both sides.
inline double psnr_band_reward(double psnr, int B, const RewardConfig & cfg = {})
{
  if (psnr < cfg.psnr_low) {
    return -(cfg.psnr_low - psnr) * B;
  }
  if (psnr <= cfg.psnr_high) {
    return std::abs(psnr - cfg.psnr_low) * B;
  }
  return (psnr - cfg.psnr_low) * B;
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_RL_ENV_HPP
