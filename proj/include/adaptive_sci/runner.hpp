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

#ifndef ADAPTIVE_SCI_RUNNER_HPP
#define ADAPTIVE_SCI_RUNNER_HPP

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "adaptive_sci/detect.hpp"
#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/random.hpp"
#include "adaptive_sci/reconstruct.hpp"
#include "adaptive_sci/rl_agent.hpp"
#include "adaptive_sci/rl_env.hpp"
#include "adaptive_sci/sci_forward.hpp"
#include "adaptive_sci/video_io.hpp"

namespace adaptive_sci
{
struct RunConfig
{
  StateSpace space;
  TransitionModel transition;
  RewardConfig reward;
  DetectorConfig detector;
  ReconstructionConfig reconstruction;
  std::size_t batch_size = 4;
  std::optional<int> initial_B;  // uniform over the state space when empty
  bool with_reconstruction = false;
  bool with_psnr_shaping = false;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const
  {
    space.validate();
    transition.validate();
    reward.validate();
    detector.validate();
    reconstruction.validate();
    require(batch_size >= 1, "run.batch_size must be >= 1");
    require(sigma >= 0.0, "run.sigma must be >= 0");
    require(!with_psnr_shaping || with_reconstruction,
            "run.psnr_shaping requires run.reconstruction = true");
    require(!initial_B || space.index_of(*initial_B).has_value(),
            "run.initial_B must be one of the state space values");
  }

  std::uint64_t noise_seed() const { return derive_seed(seed, 1); }
  std::uint64_t transition_seed() const { return derive_seed(seed, 2); }
  std::uint64_t initial_state_seed() const { return derive_seed(seed, 3); }
};

/// Result of sensing, detecting and (optionally) reconstructing one batch.
struct BatchOutcome
{
  double detection_rate = 0.0;
  std::optional<double> psnr;
};

/// Senses cfg.batch_size consecutive windows of B frames starting at `first`.
inline BatchOutcome capture_batch(
  const FrameSequence & video, const GroundTruthTrack & track, const MaskStack & masks,
  std::size_t first, std::size_t B, const RunConfig & cfg, Rng & noise_rng)
{
  require(first + cfg.batch_size * B <= video.size(), "batch runs past the end of the video");
  std::vector<NormalizedMeasurement> normalized;
  std::vector<std::vector<BoundingBox>> windows;
  std::vector<Cube> truth;
  std::vector<Cube> estimates;
  for (std::size_t k = 0; k < cfg.batch_size; ++k) {
    const std::size_t offset = first + k * B;
    Cube x = Cube::from_frames(std::span<const Image>(video.frames).subspan(offset, B));
    const Measurement m = sense(x, masks, B, cfg.sigma, noise_rng, offset);
    normalized.push_back(normalize(m, masks));
    windows.push_back(window_hulls(track, offset, B));
    if (cfg.with_reconstruction) {
      estimates.push_back(gap_tv(m, masks, cfg.reconstruction));
      truth.push_back(std::move(x));
    }
  }
  BatchOutcome out;
  out.detection_rate = detection_rate(normalized, windows, cfg.detector);
  if (cfg.with_reconstruction) {
    out.psnr = psnr(estimates, truth).psnr_db;
  }
  return out;
}

struct StepRecord
{
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;  // inclusive
  int B = 0;
  Action action = Action::Keep;
  int next_B = 0;
  double reward = 0.0;
  double detection_rate = 0.0;
  std::optional<double> psnr;
  double wall_ms = 0.0;

  std::size_t frames() const { return last_frame - first_frame + 1; }
  std::size_t measurements() const { return frames() / static_cast<std::size_t>(B); }
};

struct LogSummary
{
  double mean_B = 0.0;
  std::optional<double> mean_psnr;  // frame-weighted
  double mean_detection_rate = 0.0;  // frame-weighted
  std::size_t total_frames = 0;
  std::size_t measurements = 0;
  std::size_t dropped_frames = 0;
  double frames_per_measurement = 0.0;
};

inline LogSummary summarize(const std::vector<StepRecord> & steps, std::size_t dropped_frames)
{
  LogSummary s;
  s.dropped_frames = dropped_frames;
  double psnr_acc = 0.0;
  double rate_acc = 0.0;
  bool have_psnr = !steps.empty();
  for (const auto & r : steps) {
    const auto n = static_cast<double>(r.frames());
    s.total_frames += r.frames();
    s.measurements += r.measurements();
    rate_acc += r.detection_rate * n;
    if (r.psnr) {
      psnr_acc += *r.psnr * n;
    } else {
      have_psnr = false;
    }
  }
  if (s.total_frames > 0) {
    const auto total = static_cast<double>(s.total_frames);
    s.mean_detection_rate = rate_acc / total;
    if (have_psnr) s.mean_psnr = psnr_acc / total;
    s.mean_B = total / static_cast<double>(s.measurements);
    s.frames_per_measurement = s.mean_B;
  }
  return s;
}

struct EpisodeLog
{
  std::string source;  // identifies the video and masks the run consumed
  std::optional<int> fixed_B;
  std::vector<StepRecord> steps;
  LogSummary summary;
};

/// FNV-1a over the pixel values of every frame.
inline std::uint64_t video_fingerprint(const FrameSequence & video)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto & f : video.frames) {
    for (double p : f.pixels()) {
      const auto bits = std::bit_cast<std::uint64_t>(p);
      for (int k = 0; k < 64; k += 8) {
        h ^= (bits >> k) & 0xFF;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

inline std::string run_source_id(const FrameSequence & video, const MaskStack & masks)
{
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(video_fingerprint(video)));
  return video.name + "/" + std::to_string(video.size()) + "x" + std::to_string(video.width()) + "x" +
         std::to_string(video.height()) + "/" + hash + "/masks:" + std::to_string(masks.seed());
}

using PolicyFn = std::function<Action(const Observation &)>;

/// The capture loop: sense a batch at the current B, score it, ask the
/// policy for an action, log the reward, move to the next B. Trailing frames
/// that cannot fill a batch at the current B are dropped.
inline EpisodeLog run_adaptive(
  const FrameSequence & video, const GroundTruthTrack & track, const MaskStack & masks,
  const PolicyFn & policy, const RunConfig & cfg)
{
  cfg.validate();
  video.validate();
  require(track.size() == video.size(), "ground-truth track must cover every video frame");
  require(masks.width() == video.width() && masks.height() == video.height(),
          "mask and video dimensions differ");
  require(static_cast<std::size_t>(cfg.space.bmax()) <= masks.bmax(),
          "mask stack is shallower than the largest compression ratio");

  Rng noise_rng(cfg.noise_seed());
  Rng transition_rng(cfg.transition_seed());
  std::size_t s = 0;
  if (cfg.initial_B) {
    s = *cfg.space.index_of(*cfg.initial_B);
  } else {
    Rng init_rng(cfg.initial_state_seed());
    s = uniform_index(init_rng, cfg.space.size());
  }
  require(cfg.batch_size * static_cast<std::size_t>(cfg.space[s]) <= video.size(),
          "video is shorter than one batch at the initial compression ratio");

  EpisodeLog log;
  log.source = run_source_id(video, masks);
  std::size_t pos = 0;
  while (true) {
    const auto B = static_cast<std::size_t>(cfg.space[s]);
    const std::size_t need = cfg.batch_size * B;
    if (pos + need > video.size()) break;
    const auto t0 = std::chrono::steady_clock::now();
    const BatchOutcome outcome = capture_batch(video, track, masks, pos, B, cfg, noise_rng);
    const std::optional<double> shaping = cfg.with_psnr_shaping ? outcome.psnr : std::nullopt;
    const Observation obs = make_observation(s, outcome.detection_rate, shaping, cfg.reward);
    const Action a = policy(obs);
    const double r = reward(a, s, cfg.space, outcome.detection_rate, shaping, cfg.reward);
    const std::size_t next = step(cfg.space, s, a, cfg.transition, transition_rng);
    const auto t1 = std::chrono::steady_clock::now();

    StepRecord rec;
    rec.first_frame = pos;
    rec.last_frame = pos + need - 1;
    rec.B = cfg.space[s];
    rec.action = a;
    rec.next_B = cfg.space[next];
    rec.reward = r;
    rec.detection_rate = outcome.detection_rate;
    rec.psnr = outcome.psnr;
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    log.steps.push_back(rec);
    pos += need;
    s = next;
  }
  log.summary = summarize(log.steps, video.size() - pos);
  return log;
}

/// run_adaptive with the action pinned to Keep.
inline EpisodeLog run_fixed(
  const FrameSequence & video, const GroundTruthTrack & track, const MaskStack & masks, int B,
  RunConfig cfg)
{
  require(cfg.space.index_of(B).has_value(), "fixed B = " + std::to_string(B) + " is not in the state space");
  cfg.initial_B = B;
  auto log = run_adaptive(video, track, masks, [](const Observation &) { return Action::Keep; }, cfg);
  log.fixed_B = B;
  return log;
}

struct BaselineDelta
{
  int B = 0;
  LogSummary summary;
  std::optional<double> delta_psnr;  // adaptive minus fixed
  double delta_detection_rate = 0.0;
};

struct ComparisonReport
{
  LogSummary adaptive;
  std::vector<BaselineDelta> baselines;
  std::size_t nearest = 0;  // index into baselines

  const BaselineDelta & nearest_baseline() const { return baselines.at(nearest); }

  bool covers(const StateSpace & space) const
  {
    for (int B : space.values) {
      bool found = false;
      for (const auto & b : baselines) found = found || b.B == B;
      if (!found) return false;
    }
    return true;
  }
};

/// Deltas of the adaptive run against every fixed-B run; `nearest` marks the
/// baseline whose B is closest to the adaptive mean B (smaller B on ties).
inline ComparisonReport compare(const EpisodeLog & adaptive, const std::vector<EpisodeLog> & fixed)
{
  require(!fixed.empty(), "comparison needs at least one fixed-B log");
  ComparisonReport report;
  report.adaptive = adaptive.summary;
  double best_distance = 0.0;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    const auto & f = fixed[i];
    require(f.source == adaptive.source, "logs come from different videos or masks: '" + f.source +
                                           "' vs '" + adaptive.source + "'");
    BaselineDelta d;
    if (f.fixed_B) {
      d.B = *f.fixed_B;
    } else {
      require(!f.steps.empty(), "fixed-B log " + std::to_string(i) + " is empty");
      d.B = f.steps.front().B;
      for (const auto & r : f.steps) {
        require(r.B == d.B, "log " + std::to_string(i) + " does not hold B constant");
      }
    }
    d.summary = f.summary;
    if (adaptive.summary.mean_psnr && f.summary.mean_psnr) {
      d.delta_psnr = *adaptive.summary.mean_psnr - *f.summary.mean_psnr;
    }
    d.delta_detection_rate = adaptive.summary.mean_detection_rate - f.summary.mean_detection_rate;
    const double distance = std::abs(adaptive.summary.mean_B - d.B);
    const bool closer = i == 0 || distance < best_distance ||
                        (distance == best_distance && d.B < report.baselines[report.nearest].B);
    report.baselines.push_back(d);
    if (closer) {
      best_distance = distance;
      report.nearest = i;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------------------------
// CSV

namespace detail
{
inline std::string fmt6(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::ofstream open_csv(const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}
}  // namespace detail

inline constexpr const char * kLogCsvHeader =
  "first_frame,last_frame,B,action,next_B,reward,detection_rate,psnr";

/// One header row plus one row per step. Wall-clock timing is opt-in because
/// it is the only non-deterministic field.
inline void emit_csv(const EpisodeLog & log, const std::filesystem::path & path, bool with_timing = false)
{
  auto out = detail::open_csv(path);
  out << kLogCsvHeader << (with_timing ? ",wall_ms" : "") << '\n';
  for (const auto & r : log.steps) {
    out << r.first_frame << ',' << r.last_frame << ',' << r.B << ',' << to_string(r.action) << ','
        << r.next_B << ',' << detail::fmt6(r.reward) << ',' << detail::fmt6(r.detection_rate) << ','
        << (r.psnr ? detail::fmt6(*r.psnr) : "");
    if (with_timing) out << ',' << detail::fmt6(r.wall_ms);
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

inline constexpr const char * kReportCsvHeader =
  "run,B,mean_B,mean_psnr,mean_detection_rate,delta_psnr,delta_detection_rate,nearest";

inline void emit_csv(const ComparisonReport & report, const std::filesystem::path & path)
{
  auto out = detail::open_csv(path);
  const auto opt = [](const std::optional<double> & v) { return v ? detail::fmt6(*v) : std::string(); };
  out << kReportCsvHeader << '\n';
  out << "adaptive,," << detail::fmt6(report.adaptive.mean_B) << ',' << opt(report.adaptive.mean_psnr)
      << ',' << detail::fmt6(report.adaptive.mean_detection_rate) << ",,,\n";
  for (std::size_t i = 0; i < report.baselines.size(); ++i) {
    const auto & b = report.baselines[i];
    out << "fixed," << b.B << ',' << detail::fmt6(b.summary.mean_B) << ',' << opt(b.summary.mean_psnr)
        << ',' << detail::fmt6(b.summary.mean_detection_rate) << ',' << opt(b.delta_psnr) << ','
        << detail::fmt6(b.delta_detection_rate) << ',' << (i == report.nearest ? 1 : 0) << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

/// Parses a log written by emit_csv (timing column optional).
inline std::vector<StepRecord> read_log_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind(kLogCsvHeader, 0) != 0) {
    throw IoError(path.string() + ": missing episode-log header");
  }
  std::vector<StepRecord> steps;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() < 8) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected at least 8 fields");
    }
    try {
      StepRecord r;
      r.first_frame = std::stoull(fields[0]);
      r.last_frame = std::stoull(fields[1]);
      r.B = std::stoi(fields[2]);
      r.action = parse_action(fields[3]);
      r.next_B = std::stoi(fields[4]);
      r.reward = std::stod(fields[5]);
      r.detection_rate = std::stod(fields[6]);
      if (!fields[7].empty()) r.psnr = std::stod(fields[7]);
      if (fields.size() > 8 && !fields[8].empty()) r.wall_ms = std::stod(fields[8]);
      steps.push_back(r);
    } catch (const std::exception & e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------------------------
// Training environment

struct LabeledVideo
{
  FrameSequence video;
  GroundTruthTrack track;
};

/// Episodes over a set of scene regimes (e.g. static and fast). Each reset
/// draws a regime, a start state and a start frame; after every step the
/// regime switches with probability `switch_probability`. Rewards follow the
/// detection-rate rule, PSNR-modulated when cfg.with_psnr_shaping is set.
class RegimeEnvironment
{
public:
  RegimeEnvironment(
    std::vector<LabeledVideo> regimes, MaskStack masks, RunConfig cfg, double switch_probability = 0.1)
  : regimes_(std::move(regimes)), masks_(std::move(masks)), cfg_(std::move(cfg)),
    switch_probability_(switch_probability), noise_rng_(cfg_.noise_seed())
  {
    cfg_.validate();
    require(!regimes_.empty(), "environment needs at least one regime");
    require(switch_probability_ >= 0.0 && switch_probability_ <= 1.0,
            "switch probability must lie in [0,1]");
    const auto need = cfg_.batch_size * static_cast<std::size_t>(cfg_.space.bmax());
    for (const auto & r : regimes_) {
      require(r.video.size() >= need, "regime video shorter than one batch at the largest B");
      require(r.track.size() == r.video.size(), "regime track must cover every frame");
      require(r.video.width() == masks_.width() && r.video.height() == masks_.height(),
              "regime video and mask dimensions differ");
    }
  }

  Observation reset(Rng & rng)
  {
    regime_ = uniform_index(rng, regimes_.size());
    state_ = uniform_index(rng, cfg_.space.size());
    pos_ = random_start(rng);
    capture();
    return observation();
  }

  EnvStep step(Action a, Rng & rng)
  {
    const double r = reward(a, state_, cfg_.space, rate_, shaping(), cfg_.reward);
    pos_ += cfg_.batch_size * static_cast<std::size_t>(cfg_.space[state_]);
    state_ = adaptive_sci::step(cfg_.space, state_, a, cfg_.transition, rng);
    if (regimes_.size() > 1 && bernoulli(rng, switch_probability_)) {
      regime_ = (regime_ + 1 + uniform_index(rng, regimes_.size() - 1)) % regimes_.size();
      pos_ = random_start(rng);
    }
    if (pos_ + batch_frames() > regimes_[regime_].video.size()) {
      pos_ = 0;
    }
    capture();
    return {r, observation(), false};
  }

  std::size_t regime() const { return regime_; }
  std::size_t state() const { return state_; }
  double last_detection_rate() const { return rate_; }

private:
  std::size_t batch_frames() const
  {
    return cfg_.batch_size * static_cast<std::size_t>(cfg_.space[state_]);
  }

  std::size_t random_start(Rng & rng) const
  {
    const auto & v = regimes_[regime_].video;
    return uniform_index(rng, v.size() - batch_frames() + 1);
  }

  std::optional<double> shaping() const { return cfg_.with_psnr_shaping ? psnr_ : std::nullopt; }

  Observation observation() const { return make_observation(state_, rate_, shaping(), cfg_.reward); }

  // Noise-free captures are deterministic, so they are memoized.
  void capture()
  {
    const auto B = static_cast<std::size_t>(cfg_.space[state_]);
    const auto key = std::make_tuple(regime_, pos_, B);
    if (cfg_.sigma == 0.0) {
      if (const auto it = cache_.find(key); it != cache_.end()) {
        rate_ = it->second.detection_rate;
        psnr_ = it->second.psnr;
        return;
      }
    }
    const auto & r = regimes_[regime_];
    const auto outcome = capture_batch(r.video, r.track, masks_, pos_, B, cfg_, noise_rng_);
    if (cfg_.sigma == 0.0) cache_.emplace(key, outcome);
    rate_ = outcome.detection_rate;
    psnr_ = outcome.psnr;
  }

  std::vector<LabeledVideo> regimes_;
  MaskStack masks_;
  RunConfig cfg_;
  double switch_probability_;
  Rng noise_rng_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, BatchOutcome> cache_;
  std::size_t regime_ = 0;
  std::size_t state_ = 0;
  std::size_t pos_ = 0;
  double rate_ = 0.0;
  std::optional<double> psnr_;
};

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_RUNNER_HPP
