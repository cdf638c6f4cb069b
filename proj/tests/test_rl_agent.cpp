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

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "adaptive_sci/fixtures.hpp"
#include "adaptive_sci/rl_agent.hpp"

using namespace adaptive_sci;

namespace
{
// Walks the default state space; Increase always earns r1, everything else 0.
struct IncreaseOnlyEnv
{
  StateSpace space;
  std::size_t s = 0;

  Observation reset(Rng & rng)
  {
    s = uniform_index(rng, space.size());
    return {s, 5, PsnrBand::None};
  }

  EnvStep step(Action a, Rng & rng)
  {
    const double r = a == Action::Increase ? 1.0 : 0.0;
    s = adaptive_sci::step(space, s, a, {}, rng);
    // bounce back to the bottom so every state keeps being visited
    if (s == space.last() && bernoulli(rng, 0.5)) s = 0;
    return {r, {s, 5, PsnrBand::None}, false};
  }
};

static_assert(Environment<IncreaseOnlyEnv>);
static_assert(Environment<RegimeEnvironment>);

const Observation kObs{2, 7, PsnrBand::Mid};
}  // namespace

TEST(Observation, Buckets)
{
  EXPECT_EQ(rate_bucket(0.0), 0);
  EXPECT_EQ(rate_bucket(0.75), 7);
  EXPECT_EQ(rate_bucket(0.99), 9);
  EXPECT_EQ(rate_bucket(1.0), 9);
  EXPECT_EQ(psnr_band(std::nullopt), PsnrBand::None);
  EXPECT_EQ(psnr_band(23.9), PsnrBand::Low);
  EXPECT_EQ(psnr_band(24.0), PsnrBand::Mid);
  EXPECT_EQ(psnr_band(28.0), PsnrBand::Mid);
  EXPECT_EQ(psnr_band(28.1), PsnrBand::High);
  for (auto b : {PsnrBand::None, PsnrBand::Low, PsnrBand::Mid, PsnrBand::High}) {
    EXPECT_EQ(parse_psnr_band(to_string(b)), b);
  }
}

TEST(SelectAction, GreedyAndTies)
{
  QTable q;
  q.set(kObs, Action::Decrease, 0.1);
  q.set(kObs, Action::Keep, 0.9);
  q.set(kObs, Action::Increase, 0.3);
  Rng rng(1);
  EXPECT_EQ(select_action(q, kObs, 0.0, rng), Action::Keep);
  QTable flat;
  EXPECT_EQ(select_action(flat, kObs, 0.0, rng), Action::Decrease);
  flat.set(kObs, Action::Keep, 0.5);
  flat.set(kObs, Action::Increase, 0.5);
  EXPECT_EQ(select_action(flat, kObs, 0.0, rng), Action::Keep);
  EXPECT_THROW(select_action(q, kObs, 1.5, rng), ValidationError);
}

TEST(SelectAction, UniformWhenFullyExploring)
{
  QTable q;
  q.set(kObs, Action::Keep, 5.0);
  Rng rng(77);
  std::array<int, 3> counts{};
  for (int i = 0; i < 10000; ++i) ++counts[static_cast<int>(select_action(q, kObs, 1.0, rng))];
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 1.0 / 3.0, 0.02);
}

TEST(Update, ZeroBootstrap)
{
  QTable q;
  TrainConfig c;
  update(q, kObs, Action::Keep, 1.0, Observation{0, 0, PsnrBand::None}, c);
  EXPECT_DOUBLE_EQ(q.value(kObs, Action::Keep), 0.1);
}

TEST(Update, GeometricDecay)
{
  QTable q;
  TrainConfig c;
  q.set(kObs, Action::Increase, 2.0);
  const Observation next{0, 0, PsnrBand::None};
  for (int k = 1; k <= 20; ++k) {
    update(q, kObs, Action::Increase, 0.0, next, c);
    EXPECT_NEAR(q.value(kObs, Action::Increase), 2.0 * std::pow(0.9, k), 1e-12);
  }
}

TEST(Update, ConvergesToTerminalReward)
{
  QTable q;
  TrainConfig c;
  int n = 0;
  while (std::abs(q.value(kObs, Action::Decrease) - 0.7) > 1e-6) {
    update(q, kObs, Action::Decrease, 0.7, std::nullopt, c);
    ++n;
  }
  EXPECT_LE(n, 200);
  EXPECT_THROW(update(q, kObs, Action::Keep, std::nan(""), std::nullopt, c), ValidationError);
}

TEST(Update, BootstrapsFromNextMax)
{
  QTable q;
  TrainConfig c;
  const Observation next{1, 1, PsnrBand::None};
  q.set(next, Action::Keep, 2.0);
  q.set(next, Action::Increase, -1.0);
  update(q, kObs, Action::Keep, 1.0, next, c);
  EXPECT_NEAR(q.value(kObs, Action::Keep), 0.1 * (1.0 + 0.9 * 2.0), 1e-15);
}

TEST(Train, IncreaseOnlyMdp)
{
  IncreaseOnlyEnv env;
  TrainConfig c;
  c.episodes = 300;
  c.steps_per_episode = 30;
  c.seed = 3;
  auto res = train(env, c);
  auto pol = greedy_policy(res.table);
  for (std::size_t s = 0; s + 1 < env.space.size(); ++s) {
    EXPECT_EQ(pol(Observation{s, 5, PsnrBand::None}), Action::Increase) << "state " << s;
  }
  EXPECT_EQ(res.episode_returns.size(), 300u);
}

TEST(Train, ZeroEpisodes)
{
  IncreaseOnlyEnv env;
  TrainConfig c;
  c.episodes = 0;
  auto res = train(env, c);
  EXPECT_TRUE(res.table.empty());
  EXPECT_TRUE(res.episode_returns.empty());
}

TEST(Train, DeterministicAndBounded)
{
  IncreaseOnlyEnv e1, e2;
  TrainConfig c;
  c.episodes = 100;
  c.seed = 11;
  auto a = train(e1, c);
  auto b = train(e2, c);
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(a.episode_returns, b.episode_returns);
  EXPECT_LE(a.max_abs_q, 1.0 / (1.0 - c.discount));
}

TEST(Train, ConfigValidation)
{
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.discount = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.epsilon_end = 0.5;
  c.epsilon_start = 0.2;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  EXPECT_DOUBLE_EQ(c.epsilon(0), 1.0);
  EXPECT_NEAR(c.epsilon(c.episodes - 1), 0.05, 1e-15);
}

TEST(Train, TwoRegimeReturnsImprove)
{
  const StateSpace sp;
  RunConfig rc;
  rc.seed = 4;
  RegimeEnvironment env(training_regimes(4), generate_masks(64, 64, 20, 4, sp.values), rc);
  TrainConfig c;
  c.seed = 4;
  auto res = train(env, c);
  ASSERT_EQ(res.episode_returns.size(), 500u);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    first += res.episode_returns[i];
    last += res.episode_returns[res.episode_returns.size() - 50 + i];
  }
  EXPECT_GE(last, first);
  const RewardConfig r;
  const double bound = std::max(std::abs(r.r1 * r.lambda1), std::abs(r.r2 * r.lambda1)) / (1.0 - c.discount);
  EXPECT_LE(res.max_abs_q, bound);
  const std::size_t max_entries = sp.size() * 10 * 4;
  EXPECT_LE(res.table.observations(), max_entries);
}

TEST(Greedy, DefaultsAndShiftInvariance)
{
  QTable q;
  const Observation a{0, 3, PsnrBand::None};
  const Observation b{4, 9, PsnrBand::High};
  q.set(a, Action::Increase, 1.0);
  q.set(b, Action::Keep, -0.5);
  q.set(b, Action::Decrease, -0.7);
  q.set(b, Action::Increase, -0.6);
  auto p = greedy_policy(q);
  EXPECT_EQ(p(a), Action::Increase);
  EXPECT_EQ(p(b), Action::Keep);
  EXPECT_EQ(p(Observation{5, 0, PsnrBand::Low}), Action::Decrease);
  for (double shift : {-3.0, 0.25, 10.0}) {
    QTable s = q;
    for (Action act : kActions) s.set(b, act, q.value(b, act) + shift);
    EXPECT_EQ(greedy_policy(s)(b), p(b));
  }
}

TEST(QTableFile, RoundTripExact)
{
  QTable q;
  q.set({0, 3, PsnrBand::None}, Action::Increase, 1.0 / 3.0);
  q.set({5, 9, PsnrBand::High}, Action::Keep, -2.718281828459045);
  q.set({2, 0, PsnrBand::Low}, Action::Decrease, 1e-300);
  auto path = std::filesystem::temp_directory_path() / ("q_" + std::to_string(::getpid()) + ".txt");
  save_qtable(q, path);
  EXPECT_EQ(load_qtable(path), q);
  {
    std::ofstream out(path);
    out << "0 12 none keep 1.0\n";
  }
  EXPECT_THROW(load_qtable(path), IoError);
  {
    std::ofstream out(path);
    out << "0 1 none\n";
  }
  EXPECT_THROW(load_qtable(path), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_qtable(path), IoError);
}
