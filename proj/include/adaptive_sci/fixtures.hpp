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

// Synthetic scenes shared by the tests, the acceptance suite and the CLI.

#ifndef ADAPTIVE_SCI_FIXTURES_HPP
#define ADAPTIVE_SCI_FIXTURES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "adaptive_sci/random.hpp"
#include "adaptive_sci/runner.hpp"
#include "adaptive_sci/video_io.hpp"

namespace adaptive_sci
{
/// Square objects patrolling horizontal lanes and bouncing off the side walls.
struct PatrolSpec
{
  int width = 64;
  int height = 64;
  int duration = 240;
  std::size_t objects = 1;
  int size = 10;
  double intensity = 1.0;
  double background = 0.2;
  double speed = 2.0;  // pixels per frame
  std::uint64_t seed = 0;
  double texture = 0.0;  // background texture amplitude
};

/// Velocity segments that bounce an object between x = lo and x = hi.
inline std::vector<VelocitySegment> bounce_segments(double x, double v, double lo, double hi, int duration)
{
  std::vector<VelocitySegment> out;
  if (v == 0.0) {
    out.push_back({static_cast<std::size_t>(duration), 0.0, 0.0});
    return out;
  }
  int t = 0;
  while (t < duration) {
    const double room = v > 0.0 ? hi - x : x - lo;
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(room / std::abs(v))));
    out.push_back({n, v, 0.0});
    x += v * static_cast<double>(n);
    v = -v;
    t += static_cast<int>(n);
  }
  return out;
}

inline SceneSpec patrol_scene(const PatrolSpec & p)
{
  SceneSpec s;
  s.width = p.width;
  s.height = p.height;
  s.duration = p.duration;
  s.seed = p.seed;
  s.background = p.background;
  s.texture_amplitude = p.texture;
  s.name = "patrol";
  Rng rng(derive_seed(p.seed, 100));
  const double lo = 1.0;
  const double hi = static_cast<double>(p.width - p.size - 1);
  const double lane = static_cast<double>(p.height) / static_cast<double>(std::max<std::size_t>(p.objects, 1));
  for (std::size_t j = 0; j < p.objects; ++j) {
    SceneObject o;
    o.width = p.size;
    o.height = p.size;
    o.intensity = p.intensity;
    o.x = std::round(lo + uniform01(rng) * (hi - lo));
    o.y = std::floor(lane * static_cast<double>(j) + 0.5 * (lane - p.size));
    const double v = bernoulli(rng, 0.5) ? p.speed : -p.speed;
    o.segments = bounce_segments(o.x, v, lo, hi, p.duration);
    s.objects.push_back(o);
  }
  return s;
}

inline LabeledVideo render(const SceneSpec & spec)
{
  auto [video, track] = generate_scene(spec);
  return {std::move(video), std::move(track)};
}

/// One bright 10x10 object on a dark 64x64 background that never moves.
inline LabeledVideo static_fixture(std::uint64_t seed, int duration = 240)
{
  PatrolSpec p;
  p.duration = duration;
  p.speed = 0.0;
  p.seed = seed;
  return render(patrol_scene(p));
}

/// The canonical moving-object scene: one 10x10 object at 2 px/frame.
inline LabeledVideo moving_fixture(std::uint64_t seed, int duration = 240)
{
  PatrolSpec p;
  p.duration = duration;
  p.speed = 2.0;
  p.seed = seed;
  return render(patrol_scene(p));
}

/// One 10x10 object at 5 px/frame: detection fails at every B.
inline LabeledVideo fast_fixture(std::uint64_t seed, int duration = 240)
{
  PatrolSpec p;
  p.duration = duration;
  p.speed = 5.0;
  p.seed = seed;
  return render(patrol_scene(p));
}

/// Two regimes the policy is trained on.
inline std::vector<LabeledVideo> training_regimes(std::uint64_t seed, int duration = 480)
{
  return {static_fixture(derive_seed(seed, 1), duration), fast_fixture(derive_seed(seed, 2), duration)};
}

/// Lengths (in output frames) of the normal, frozen and fast segments.
struct ThreeSegmentSpec
{
  std::size_t normal = 600;
  std::size_t frozen = 1200;
  std::size_t fast = 120;
  std::size_t skip = 2;
  PatrolSpec scene{64, 64, 0, 3, 10, 0.7, 0.2, 1.0, 0};
};

/// Normal-speed motion, then the last normal frame held, then the motion
/// resumed with frames skipped.
inline LabeledVideo three_segment_fixture(std::uint64_t seed, const ThreeSegmentSpec & t = {})
{
  auto p = t.scene;
  p.seed = seed;
  p.duration = static_cast<int>(t.normal + t.fast * t.skip);
  const auto source = render(patrol_scene(p));
  RetimePlan plan;
  plan.segments = {
    {0, t.normal, RetimeMode::Normal, 1},
    {t.normal, t.normal + 1, RetimeMode::Freeze, t.frozen},
    {t.normal + 1, source.video.size(), RetimeMode::Skip, t.skip}};
  auto [video, track] = retime(source.video, source.track, plan);
  video.name = "three_segment";
  return {std::move(video), std::move(track)};
}
}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_FIXTURES_HPP
