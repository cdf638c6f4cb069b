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

#ifndef ADAPTIVE_SCI_RL_AGENT_HPP
#define ADAPTIVE_SCI_RL_AGENT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/random.hpp"
#include "adaptive_sci/rl_env.hpp"

namespace adaptive_sci
{
enum class PsnrBand { None = 0, Low = 1, Mid = 2, High = 3 };

inline std::string_view to_string(PsnrBand b)
{
  switch (b) {
    case PsnrBand::None: return "none";
    case PsnrBand::Low: return "low";
    case PsnrBand::Mid: return "mid";
    case PsnrBand::High: return "high";
  }
  return "none";
}

inline PsnrBand parse_psnr_band(std::string_view s)
{
  for (auto b : {PsnrBand::None, PsnrBand::Low, PsnrBand::Mid, PsnrBand::High}) {
    if (to_string(b) == s) return b;
  }
  throw ValidationError("unknown psnr band '" + std::string(s) + "'");
}

struct Observation
{
  std::size_t state = 0;
  int rate_bucket = 0;  // floor(rate * 10) clipped to 0..9
  PsnrBand psnr_band = PsnrBand::None;

  auto operator<=>(const Observation &) const = default;
};

inline int rate_bucket(double rate) { return std::clamp(static_cast<int>(std::floor(rate * 10.0)), 0, 9); }

inline PsnrBand psnr_band(std::optional<double> psnr, const RewardConfig & cfg = {})
{
  if (!psnr) return PsnrBand::None;
  if (*psnr < cfg.psnr_low) return PsnrBand::Low;
  if (*psnr <= cfg.psnr_high) return PsnrBand::Mid;
  return PsnrBand::High;
}

inline Observation make_observation(
  std::size_t state, double rate, std::optional<double> psnr, const RewardConfig & cfg = {})
{
  return {state, rate_bucket(rate), psnr_band(psnr, cfg)};
}

using ActionValues = std::array<double, 3>;

/// Sparse Q table; unseen (observation, action) pairs read as zero.
class QTable
{
public:
  ActionValues values(const Observation & o) const
  {
    const auto it = table_.find(o);
    return it == table_.end() ? ActionValues{0.0, 0.0, 0.0} : it->second;
  }
  double value(const Observation & o, Action a) const { return values(o)[static_cast<int>(a)]; }
  void set(const Observation & o, Action a, double v) { table_[o][static_cast<int>(a)] = v; }

  std::size_t observations() const { return table_.size(); }
  bool empty() const { return table_.empty(); }
  const std::map<Observation, ActionValues> & entries() const { return table_; }

  double max_abs_value() const
  {
    double m = 0.0;
    for (const auto & [o, v] : table_) {
      for (double x : v) m = std::max(m, std::abs(x));
    }
    return m;
  }

  friend bool operator==(const QTable &, const QTable &) = default;

private:
  std::map<Observation, ActionValues> table_;
};

/// First maximum in Decrease < Keep < Increase order.
inline Action argmax_action(const ActionValues & v)
{
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return kActions[best];
}

inline Action select_action(const QTable & q, const Observation & o, double epsilon, Rng & rng)
{
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0,1]");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return kActions[uniform_index(rng, kActions.size())];
  }
  return argmax_action(q.values(o));
}

struct TrainConfig
{
  std::size_t episodes = 500;
  std::size_t steps_per_episode = 50;
  double learning_rate = 0.1;
  double discount = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t seed = 0;

  void validate() const
  {
    require(learning_rate > 0.0 && learning_rate <= 1.0, "train.learning_rate must lie in (0,1]");
    require(discount >= 0.0 && discount < 1.0, "train.discount must lie in [0,1)");
    require(epsilon_start <= 1.0, "train.epsilon_start must be <= 1");
    require(epsilon_end >= 0.0 && epsilon_end <= epsilon_start,
            "train.epsilon_end must lie in [0, epsilon_start]");
  }

  /// Linear decay from epsilon_start (first episode) to epsilon_end (last).
  double epsilon(std::size_t episode) const
  {
    if (episodes <= 1) return epsilon_start;
    const double f = static_cast<double>(episode) / static_cast<double>(episodes - 1);
    return epsilon_start + (epsilon_end - epsilon_start) * f;
  }
};

/// One-step Q-learning update; `next` empty means terminal (no bootstrap).
inline void update(
  QTable & q, const Observation & o, Action a, double r, const std::optional<Observation> & next,
  const TrainConfig & cfg)
{
  require(std::isfinite(r), "reward must be finite");
  double target = r;
  if (next) {
    const auto v = q.values(*next);
    target += cfg.discount * *std::max_element(v.begin(), v.end());
  }
  const double old = q.value(o, a);
  q.set(o, a, old + cfg.learning_rate * (target - old));
}

struct EnvStep
{
  double reward = 0.0;
  Observation next;
  bool done = false;
};

/// Episodic environment driven by train(): reset() samples a start state.
template <typename E>
concept Environment = requires(E env, Rng & rng, Action a) {
  { env.reset(rng) } -> std::same_as<Observation>;
  { env.step(a, rng) } -> std::same_as<EnvStep>;
};

struct TrainResult
{
  QTable table;
  std::vector<double> episode_returns;
  /// Largest |Q| seen after any update.
  double max_abs_q = 0.0;
};

/// Epsilon-greedy tabular Q-learning. The episode step cap is a time limit,
/// not a terminal state, so the last transition still bootstraps.
template <Environment Env>
TrainResult train(Env & env, const TrainConfig & cfg)
{
  cfg.validate();
  TrainResult result;
  Rng rng(cfg.seed);
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    const double eps = cfg.epsilon(e);
    Observation o = env.reset(rng);
    double total = 0.0;
    for (std::size_t k = 0; k < cfg.steps_per_episode; ++k) {
      const Action a = select_action(result.table, o, eps, rng);
      const EnvStep s = env.step(a, rng);
      update(result.table, o, a, s.reward, s.done ? std::nullopt : std::optional(s.next), cfg);
      result.max_abs_q = std::max(result.max_abs_q, std::abs(result.table.value(o, a)));
      total += s.reward;
      o = s.next;
      if (s.done) break;
    }
    result.episode_returns.push_back(total);
  }
  return result;
}

/// Greedy action per observation; observations absent from the table fall
/// back to the all-zero row, i.e. Decrease.
class GreedyPolicy
{
public:
  GreedyPolicy() = default;
  explicit GreedyPolicy(std::map<Observation, Action> table) : table_(std::move(table)) {}

  Action operator()(const Observation & o) const
  {
    const auto it = table_.find(o);
    return it == table_.end() ? Action::Decrease : it->second;
  }
  const std::map<Observation, Action> & table() const { return table_; }

private:
  std::map<Observation, Action> table_;
};

inline GreedyPolicy greedy_policy(const QTable & q)
{
  std::map<Observation, Action> table;
  for (const auto & [o, v] : q.entries()) {
    table.emplace(o, argmax_action(v));
  }
  return GreedyPolicy(std::move(table));
}

/// Rows `state_idx rate_bucket psnr_band action value`; values printed with
/// 17 significant digits so a reload is exact.
inline void save_qtable(const QTable & q, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (const auto & [o, v] : q.entries()) {
    for (Action a : kActions) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v[static_cast<int>(a)]);
      out << o.state << ' ' << o.rate_bucket << ' ' << to_string(o.psnr_band) << ' ' << to_string(a)
          << ' ' << buf << '\n';
    }
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

inline QTable load_qtable(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open Q-table " + path.string());
  }
  QTable q;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Observation o;
    std::string band, action;
    double v = 0.0;
    if (!(ls >> o.state >> o.rate_bucket >> band >> action >> v)) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed Q-table row");
    }
    try {
      o.psnr_band = parse_psnr_band(band);
      if (o.rate_bucket < 0 || o.rate_bucket > 9) {
        throw ValidationError("rate bucket out of range");
      }
      q.set(o, parse_action(action), v);
    } catch (const ValidationError & e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return q;
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_RL_AGENT_HPP
