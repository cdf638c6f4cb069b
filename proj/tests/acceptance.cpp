// --------------------------------------------------------------------------------------------
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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "adaptive_sci/fixtures.hpp"

namespace fs = std::filesystem;
using namespace adaptive_sci;

namespace
{
// Pinned tolerances and budgets.
constexpr double kOperatorTol = 1e-10;
constexpr double kFrequencyTol = 0.02;
constexpr double kIdentityTol = 1e-12;
constexpr double kStaticPsnrFloorDb = 40.0;
constexpr double kGainFloorDb = 1.0;
constexpr double kSweepTexture = 0.02;
constexpr int kTransitionSamples = 10000;
constexpr int kSeeds = 5;
constexpr std::size_t kMaxEpisodes = 500;
constexpr std::size_t kPolicyStepBudget = 5;
constexpr std::size_t kBatch = 2;
constexpr std::uint64_t kTrainSeed = 1;
constexpr double kBudget1 = 5.0, kBudget2 = 1.0, kBudget3 = 1.0, kBudget5 = 60.0, kBudget6 = 120.0,
                 kBudget7 = 300.0;

using Clock = std::chrono::steady_clock;

struct Check
{
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string & why)
  {
    if (pass) detail << why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void within_budget(Check & c, double secs, double budget)
{
  if (secs >= budget) {
    std::ostringstream s;
    s << "took " << secs << " s, budget " << budget << " s";
    c.fail(s.str());
  }
}

const StateSpace kSpace;

// 1 ------------------------------------------------------------------------------------------
Check operator_equivalence()
{
  Check c;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t B : {6u, 10u, 15u, 20u}) {
    for (int k = 0; k < 20; ++k) {
      const std::size_t W = 16, H = 16, N = W * H;
      const auto seed = derive_seed(B, static_cast<std::uint64_t>(k));
      const auto masks = generate_masks(W, H, B, seed, {static_cast<int>(std::min<std::size_t>(B, 6))});
      Rng rng(derive_seed(seed, 1));
      Cube x(W, H, B);
      for (std::size_t b = 0; b < B; ++b)
        for (double & v : x.frame(b)) v = uniform01(rng);

      // dense N x NB matrix, column index b * N + i
      std::vector<double> dense(N * N * B, 0.0);
      const auto at = [&](std::size_t i, std::size_t j) -> double & { return dense[i * N * B + j]; };
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t y = 0; y < H; ++y)
          for (std::size_t xx = 0; xx < W; ++xx) at(y * W + xx, b * N + y * W + xx) = masks(xx, y, b);

      std::vector<double> flat(N * B);
      for (std::size_t b = 0; b < B; ++b) std::copy(x.frame(b).begin(), x.frame(b).end(), flat.begin() + b * N);
      Rng unused(0);
      const auto m = sense(x, masks, B, 0.0, unused);
      const auto h = build_operator(masks, B);
      const auto yv = sense_vectorized(h, flat);
      const auto sums = masks.column_sums(B);
      for (std::size_t i = 0; i < N; ++i) {
        double yi = 0.0;
        for (std::size_t j = 0; j < N * B; ++j) yi += at(i, j) * flat[j];
        worst = std::max({worst, std::abs(yi - m.y[i]), std::abs(yi - yv[i])});
        // row i of H H^T, summing over the nonzero columns of row i only
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < N * B; ++j) {
          if (at(i, j) != 0.0) cols.push_back(j);
        }
        for (std::size_t r = 0; r < N; ++r) {
          double hht = 0.0;
          for (std::size_t j : cols) hht += at(i, j) * at(r, j);
          const double want = r == i ? sums[i] : 0.0;
          if (hht != want || (r == i && h.hht_diagonal()[i] != want)) {
            c.fail("H H^T differs from the column sums at B = " + std::to_string(B));
          }
        }
      }
      ++instances;
    }
  }
  if (worst > kOperatorTol) c.fail("sense differs from the dense matrix by " + std::to_string(worst));
  const double secs = seconds_since(t0);
  within_budget(c, secs, kBudget1);
  c.detail << (c.pass ? "" : "; ") << instances << " instances, max |dy| " << worst << ", " << secs << " s";
  return c;
}

// 2 ------------------------------------------------------------------------------------------
Check reward_truth_table()
{
  Check c;
  const auto t0 = Clock::now();
  const RewardConfig cfg;
  // Sign of the unmodulated reward, rows Decrease/Keep/Increase, columns Bmin/interior/Bmax.
  const char * low_rate[3] = {"+++", "+--", "---"};
  const char * high_rate[3] = {"---", "--+", "+++"};
  // Magnitudes: no PSNR, PSNR above psnrth, PSNR at or below psnrth.
  const double pos[3] = {1.0, 1.5, 0.5};
  const double neg[3] = {-1.0, -0.5, -1.5};
  const std::size_t positions[3] = {0, 2, kSpace.last()};
  const std::optional<double> psnrs[3] = {std::nullopt, cfg.psnrth + 2.0, cfg.psnrth - 2.0};
  int rows = 0, agree = 0;
  for (int hi = 0; hi < 2; ++hi) {
    const double rate = hi ? cfg.drth + 0.1 : cfg.drth - 0.1;
    for (int a = 0; a < 3; ++a) {
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          const char sign = (hi ? high_rate : low_rate)[a][p];
          const double want = sign == '+' ? pos[q] : neg[q];
          const double got = reward(kActions[static_cast<std::size_t>(a)], positions[p], kSpace, rate, psnrs[q], cfg);
          ++rows;
          if (got == want) ++agree;
        }
      }
    }
  }
  if (agree != rows) c.fail(std::to_string(rows - agree) + " rows disagree");
  const double secs = seconds_since(t0);
  within_budget(c, secs, kBudget2);
  c.detail << (c.pass ? "" : "; ") << agree << "/" << rows << " rows agree";
  return c;
}

// 3 ------------------------------------------------------------------------------------------
Check transition_fidelity()
{
  Check c;
  const auto t0 = Clock::now();
  const StateSpace sp{{6, 10, 15}};
  const double al = 0.3, be = 0.3;
  const TransitionModel t{al, be};
  // table[s][a] as {next: probability}
  const std::map<std::size_t, double> table[3][3] = {
    {{{0, 1.0}}, {{0, 1.0}}, {{1, al}, {2, 1.0 - al}}},
    {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}},
    {{{0, be}, {1, 1.0 - be}}, {{2, 1.0}}, {{2, 1.0}}}};
  Rng rng(31337);
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto dist = transition_distribution(sp, s, kActions[a], t);
      double sum = 0.0;
      std::map<std::size_t, double> exact;
      for (auto [n, p] : dist) {
        sum += p;
        exact[n] += p;
      }
      if (sum != 1.0) c.fail("distribution does not sum to 1");
      if (exact != table[s][a]) c.fail("distribution differs from the table");
      std::map<std::size_t, double> freq;
      for (int i = 0; i < kTransitionSamples; ++i) freq[step(sp, s, kActions[a], t, rng)] += 1.0 / kTransitionSamples;
      for (std::size_t n = 0; n < 3; ++n) {
        const auto it = table[s][a].find(n);
        worst = std::max(worst, std::abs(freq[n] - (it == table[s][a].end() ? 0.0 : it->second)));
      }
    }
  }
  if (worst > kFrequencyTol) c.fail("frequency off by " + std::to_string(worst));
  const double secs = seconds_since(t0);
  within_budget(c, secs, kBudget3);
  c.detail << (c.pass ? "" : "; ") << "max frequency error " << worst;
  return c;
}

// 4 ------------------------------------------------------------------------------------------
Check static_identity()
{
  Check c;
  const auto masks = generate_masks(64, 64, 20, 404, kSpace.values);
  Rng rng(5);
  Image frame(64, 64);
  for (double & p : frame.pixels()) p = uniform01(rng);
  double worst = 0.0;
  for (int B : kSpace.values) {
    const std::vector<Image> frames(static_cast<std::size_t>(B), frame);
    const auto m = sense(Cube::from_frames(frames), masks, static_cast<std::size_t>(B), 0.0, rng);
    const auto n = normalize(m, masks);
    for (std::size_t i = 0; i < frame.size(); ++i) worst = std::max(worst, std::abs(n.ybar[i] - frame[i]));
  }
  if (worst > kIdentityTol) c.fail("normalized measurement differs by " + std::to_string(worst));
  c.detail << (c.pass ? "" : "; ") << "max |ybar - x| " << worst;
  return c;
}

// Mean GAP-TV PSNR over the complete windows of B frames among the first `frames`.
double windows_psnr(const FrameSequence & v, const MaskStack & masks, std::size_t B, std::size_t frames)
{
  std::vector<Cube> est, truth;
  Rng rng(0);
  for (std::size_t first = 0; first + B <= frames; first += B) {
    truth.push_back(Cube::from_frames(std::span<const Image>(v.frames).subspan(first, B)));
    est.push_back(gap_tv(sense(truth.back(), masks, B, 0.0, rng), masks, ReconstructionConfig{}));
  }
  return psnr(est, truth).psnr_db;
}

// 5 ------------------------------------------------------------------------------------------
Check reconstruction_trends()
{
  Check c;
  const auto t0 = Clock::now();
  double lo = 0.0, hi = 0.0, static_min = 1e9;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto masks = generate_masks(64, 64, 20, derive_seed(seed, 50), kSpace.values);
    const auto mv = moving_fixture(seed, 120);
    lo += windows_psnr(mv.video, masks, 6, 120) / kSeeds;
    hi += windows_psnr(mv.video, masks, 20, 120) / kSeeds;
    const auto st = static_fixture(seed, 60);
    static_min = std::min(static_min, windows_psnr(st.video, masks, 6, 60));
  }
  if (!(lo > hi)) c.fail("moving PSNR at B=6 does not exceed B=20");
  if (static_min < kStaticPsnrFloorDb) c.fail("static PSNR at B=6 below the floor");
  const double secs = seconds_since(t0);
  within_budget(c, secs, kBudget5);
  c.detail << (c.pass ? "" : "; ") << "moving B=6 " << lo << " dB vs B=20 " << hi << " dB, static B=6 min "
           << static_min << " dB, " << secs << " s";
  return c;
}

// 6 ------------------------------------------------------------------------------------------
Check noise_monotonicity()
{
  Check c;
  const auto t0 = Clock::now();
  const double sigmas[] = {0.0, 0.005, 0.01, 0.05, 0.1};
  std::ostringstream table;
  for (int B : {6, 10, 15}) {
    double prev_psnr = 1e9, prev_rate = 2.0;
    table << " B=" << B << ":";
    for (double sigma : sigmas) {
      double p = 0.0, r = 0.0;
      for (int s = 1; s <= kSeeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        PatrolSpec spec;
        spec.duration = 120;
        spec.seed = seed;
        spec.texture = kSweepTexture;
        const auto fx = render(patrol_scene(spec));
        const auto masks = generate_masks(64, 64, 20, derive_seed(seed, 60), kSpace.values);
        RunConfig cfg;
        cfg.with_reconstruction = true;
        cfg.batch_size = 1;
        cfg.sigma = sigma;
        cfg.seed = seed;
        const auto log = run_fixed(fx.video, fx.track, masks, B, cfg);
        p += *log.summary.mean_psnr / kSeeds;
        r += log.summary.mean_detection_rate / kSeeds;
      }
      if (p > prev_psnr) c.fail("PSNR rises with noise at B=" + std::to_string(B));
      if (r > prev_rate) c.fail("detection rate rises with noise at B=" + std::to_string(B));
      prev_psnr = p;
      prev_rate = r;
      char buf[48];
      std::snprintf(buf, sizeof(buf), " %.2f/%.3f", p, r);
      table << buf;
    }
  }
  // Without texture, blurred edges of the flat object can sit exactly on the
  // detector threshold; reported for reference, not judged.
  std::ostringstream flat;
  for (double sigma : sigmas) {
    double r = 0.0;
    for (int s = 1; s <= kSeeds; ++s) {
      const auto seed = static_cast<std::uint64_t>(s);
      const auto fx = moving_fixture(seed, 120);
      RunConfig cfg;
      cfg.batch_size = 1;
      cfg.sigma = sigma;
      cfg.seed = seed;
      r += run_fixed(fx.video, fx.track, generate_masks(64, 64, 20, derive_seed(seed, 60), kSpace.values), 10,
                     cfg).summary.mean_detection_rate / kSeeds;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), " %.3f", r);
    flat << buf;
  }
  const double secs = seconds_since(t0);
  within_budget(c, secs, kBudget6);
  c.detail << (c.pass ? "" : "; ") << "texture " << kSweepTexture << ", psnr/rate by sigma" << table.str()
           << "; untextured B=10 rate" << flat.str() << ", " << secs << " s";
  return c;
}

struct TrainedPolicy
{
  GreedyPolicy policy;
  std::size_t episodes = 0;
  double seconds = 0.0;
};

TrainedPolicy train_policy()
{
  const auto t0 = Clock::now();
  RunConfig rc;
  rc.batch_size = kBatch;
  rc.seed = derive_seed(kTrainSeed, 99);
  RegimeEnvironment env(training_regimes(derive_seed(kTrainSeed, 5)),
                        generate_masks(64, 64, 20, derive_seed(kTrainSeed, 3), kSpace.values), rc);
  TrainConfig tc;
  tc.episodes = kMaxEpisodes;
  tc.seed = derive_seed(kTrainSeed, 17);
  const auto res = train(env, tc);
  return {greedy_policy(res.table), res.episode_returns.size(), seconds_since(t0)};
}

// 7 ------------------------------------------------------------------------------------------
Check policy_behaviour(const TrainedPolicy & tp)
{
  Check c;
  const auto t0 = Clock::now();
  if (tp.episodes > kMaxEpisodes) c.fail("trained for more than the episode budget");
  int runs = 0, ok = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(1000 + s);  // never used in training
    const auto masks = generate_masks(64, 64, 20, derive_seed(seed, 70), kSpace.values);
    const LabeledVideo scenes[2] = {static_fixture(seed, 400), fast_fixture(seed, 400)};
    const int targets[2] = {kSpace.bmax(), kSpace.bmin()};
    for (int k = 0; k < 2; ++k) {
      for (int start : kSpace.values) {
        RunConfig cfg;
        cfg.batch_size = kBatch;
        cfg.initial_B = start;
        cfg.seed = seed;
        const auto log = run_adaptive(scenes[k].video, scenes[k].track, masks, tp.policy, cfg);
        ++runs;
        bool reached = start == targets[k];
        for (std::size_t i = 0; i < kPolicyStepBudget && i < log.steps.size(); ++i) {
          reached = reached || log.steps[i].next_B == targets[k];
        }
        const bool held = log.steps.size() >= kPolicyStepBudget &&
                          log.steps[kPolicyStepBudget - 1].next_B == targets[k];
        if (reached && held) {
          ++ok;
        } else {
          c.fail(std::string(k == 0 ? "static" : "fast") + " seed " + std::to_string(seed) + " from B=" +
                 std::to_string(start) + " misses B=" + std::to_string(targets[k]));
        }
      }
    }
  }
  const double secs = seconds_since(t0) + tp.seconds;
  within_budget(c, secs, kBudget7);
  c.detail << (c.pass ? "" : "; ") << ok << "/" << runs << " runs on target, " << tp.episodes
           << " episodes, " << secs << " s";
  return c;
}

// 8 ------------------------------------------------------------------------------------------
Check adaptive_gain(const TrainedPolicy & tp)
{
  Check c;
  const auto t0 = Clock::now();
  double gain = 0.0, rate_delta = 0.0;
  std::ostringstream per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto fx = three_segment_fixture(seed);
    const auto masks = generate_masks(64, 64, 20, derive_seed(seed, 9), kSpace.values);
    RunConfig cfg;
    cfg.with_reconstruction = true;
    cfg.batch_size = kBatch;
    cfg.seed = seed;
    const auto adaptive = run_adaptive(fx.video, fx.track, masks, tp.policy, cfg);
    std::vector<EpisodeLog> fixed;
    // the nearest baseline is the only one the criterion needs
    int nearest = kSpace.bmin();
    for (int B : kSpace.values) {
      if (std::abs(B - adaptive.summary.mean_B) < std::abs(nearest - adaptive.summary.mean_B)) nearest = B;
    }
    fixed.push_back(run_fixed(fx.video, fx.track, masks, nearest, cfg));
    const auto report = compare(adaptive, fixed);
    const auto & base = report.nearest_baseline();
    gain += *base.delta_psnr / kSeeds;
    rate_delta += base.delta_detection_rate / kSeeds;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " [seed %d: mean B %.2f vs B=%d, %+.2f dB, rate %+.3f]", s,
                  adaptive.summary.mean_B, base.B, *base.delta_psnr, base.delta_detection_rate);
    per_seed << buf;
  }
  if (gain < kGainFloorDb) c.fail("mean PSNR gain below " + std::to_string(kGainFloorDb) + " dB");
  if (rate_delta < 0.0) c.fail("mean detection rate below the baseline");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean gain %+.2f dB, rate %+.3f, %.0f s;", gain, rate_delta, seconds_since(t0));
  c.detail << (c.pass ? "" : "; ") << buf << per_seed.str();
  return c;
}

// 9 ------------------------------------------------------------------------------------------
std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Check cli_determinism()
{
  Check c;
  const fs::path dir = fs::temp_directory_path() / ("adaptive_sci_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cfg = dir / "run.ini";
  {
    std::ofstream out(cfg);
    out << "[train]\nepisodes = 60\n"
        << "[run]\nbatch_size = 2\nreconstruction = true\nsigma = 0.01\n"
        << "[paths]\nvideo = " << (dir / "video" / "manifest.txt").string() << "\n"
        << "masks = " << (dir / "masks.scim").string() << "\n"
        << "qtable = " << (dir / "q.txt").string() << "\n";
  }
  const std::string sim = std::string("\"") + SCI_SIM_PATH + "\" --config \"" + cfg.string() + "\" --seed 5 ";
  const auto sh = [&](const std::string & args) {
    const std::string cmd = sim + args + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) c.fail("'" + args + "' exited with " + std::to_string(rc));
  };
  sh("generate --fixture moving --out \"" + (dir / "video").string() + "\"");
  sh("masks --width 64 --height 64");
  sh("train");
  sh("run --out \"" + (dir / "a.csv").string() + "\"");
  sh("run --out \"" + (dir / "b.csv").string() + "\"");
  const auto a = slurp(dir / "a.csv");
  const auto b = slurp(dir / "b.csv");
  if (a.empty()) c.fail("empty log");
  if (a != b) c.fail("logs differ");
  c.detail << (c.pass ? "" : "; ") << a.size() << " bytes, identical = " << (a == b ? "yes" : "no");
  fs::remove_all(dir);
  return c;
}

void report(int id, const std::string & name, const Check & c, int & failures)
{
  std::printf("[%s] %d %s: %s\n", c.pass ? "PASS" : "FAIL", id, name.c_str(), c.detail.str().c_str());
  std::fflush(stdout);
  if (!c.pass) ++failures;
}
}  // namespace

int main(int argc, char ** argv)
{
  // Optional arguments select criteria by number; none runs all nine.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int n) { return only.empty() || only.count(n) > 0; };
  int failures = 0;
  if (want(1)) report(1, "operator equivalence", operator_equivalence(), failures);
  if (want(2)) report(2, "reward truth table", reward_truth_table(), failures);
  if (want(3)) report(3, "transition fidelity", transition_fidelity(), failures);
  if (want(4)) report(4, "static-scene identity", static_identity(), failures);
  if (want(5)) report(5, "reconstruction trends", reconstruction_trends(), failures);
  if (want(6)) report(6, "noise monotonicity", noise_monotonicity(), failures);
  if (want(7) || want(8)) {
    const auto policy = train_policy();
    if (want(7)) report(7, "learned policy behaviour", policy_behaviour(policy), failures);
    if (want(8)) report(8, "adaptive vs fixed gain", adaptive_gain(policy), failures);
  }
  if (want(9)) report(9, "run determinism", cli_determinism(), failures);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
