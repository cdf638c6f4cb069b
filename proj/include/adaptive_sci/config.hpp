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

// Plain-text configuration: `key = value` lines under [section] headers.
// A section may repeat ([object], [retime]); keys inside a section are unique
// except where a loader says otherwise. Unknown keys and sections are errors.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/rl_agent.hpp"
#include "adaptive_sci/runner.hpp"
#include "adaptive_sci/video_io.hpp"

namespace adaptive_sci
{
struct ConfigEntry
{
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection
{
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;
};

struct ConfigFile
{
  std::vector<ConfigSection> sections;

  std::vector<const ConfigSection *> all(const std::string & name) const
  {
    std::vector<const ConfigSection *> out;
    for (const auto & s : sections) {
      if (s.name == name) out.push_back(&s);
    }
    return out;
  }

  const ConfigSection * find(const std::string & name) const
  {
    auto v = all(name);
    require(v.size() <= 1, "section [" + name + "] may appear only once");
    return v.empty() ? nullptr : v.front();
  }
};

namespace detail
{
inline std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string where(const ConfigEntry & e, const std::string & section)
{
  return "line " + std::to_string(e.line) + ": " + section + "." + e.key;
}
}  // namespace detail

inline ConfigFile parse_config(std::istream & in)
{
  ConfigFile cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find_first_of("#;");
    const auto line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2,
              "line " + std::to_string(line_no) + ": malformed section header");
      cfg.sections.push_back({detail::trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "line " + std::to_string(line_no) + ": expected key = value");
    require(!cfg.sections.empty(), "line " + std::to_string(line_no) + ": key outside any section");
    auto key = detail::trim(line.substr(0, eq));
    require(!key.empty(), "line " + std::to_string(line_no) + ": empty key");
    cfg.sections.back().entries.push_back({key, detail::trim(line.substr(eq + 1)), line_no});
  }
  return cfg;
}

inline ConfigFile parse_config_string(const std::string & text)
{
  std::istringstream in(text);
  return parse_config(in);
}

inline ConfigFile load_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

/// Typed reader over one section. Every key must be consumed, and each key
/// may appear once unless read with `list`.
class SectionReader
{
public:
  explicit SectionReader(const ConfigSection & s) : section_(s), used_(s.entries.size(), false) {}

  template <class T>
  void get(const std::string & key, T & out)
  {
    const ConfigEntry * hit = nullptr;
    for (std::size_t i = 0; i < section_.entries.size(); ++i) {
      if (section_.entries[i].key != key) continue;
      require(hit == nullptr, detail::where(section_.entries[i], section_.name) + " repeated");
      hit = &section_.entries[i];
      used_[i] = true;
    }
    if (hit != nullptr) out = parse<T>(*hit);
  }

  template <class T>
  void get(const std::string & key, std::optional<T> & out)
  {
    T tmp{};
    bool seen = false;
    for (const auto & e : section_.entries) seen = seen || e.key == key;
    if (!seen) return;
    get(key, tmp);
    out = tmp;
  }

  std::vector<ConfigEntry> list(const std::string & key)
  {
    std::vector<ConfigEntry> out;
    for (std::size_t i = 0; i < section_.entries.size(); ++i) {
      if (section_.entries[i].key == key) {
        used_[i] = true;
        out.push_back(section_.entries[i]);
      }
    }
    return out;
  }

  void finish() const
  {
    for (std::size_t i = 0; i < used_.size(); ++i) {
      require(used_[i], detail::where(section_.entries[i], section_.name) + ": unknown key");
    }
  }

  const std::string & name() const { return section_.name; }

  template <class T>
  T parse(const ConfigEntry & e) const
  {
    const auto & v = e.value;
    const auto fail = [&]() { return ValidationError(detail::where(e, section_.name) + ": bad value '" + v + "'"); };
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      throw fail();
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::istringstream in(v);
      std::vector<int> out;
      std::string tok;
      while (in >> tok) out.push_back(parse_number<int>(tok, fail));
      return out;
    } else {
      return parse_number<T>(v, fail);
    }
  }

private:
  template <class T, class F>
  static T parse_number(const std::string & s, const F & fail)
  {
    T out{};
    const auto * end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    if (ec != std::errc() || p != end) throw fail();
    return out;
  }

  const ConfigSection & section_;
  std::vector<bool> used_;
};

inline const std::vector<std::string> & known_sections()
{
  static const std::vector<std::string> names{
    "scene", "object", "retime", "masks", "states", "transition", "reward",
    "detector", "reconstruction", "run", "train", "paths"};
  return names;
}

inline void check_sections(const ConfigFile & cfg)
{
  for (const auto & s : cfg.sections) {
    bool ok = false;
    for (const auto & n : known_sections()) ok = ok || n == s.name;
    require(ok, "line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
  }
}

inline Shape parse_shape(const std::string & s)
{
  if (s == "rectangle") return Shape::Rectangle;
  if (s == "disc") return Shape::Disc;
  throw ValidationError("unknown shape '" + s + "'");
}

inline RetimeMode parse_retime_mode(const std::string & s)
{
  if (s == "normal") return RetimeMode::Normal;
  if (s == "freeze") return RetimeMode::Freeze;
  if (s == "skip") return RetimeMode::Skip;
  throw ValidationError("unknown retime mode '" + s + "'");
}

/// [scene] plus one [object] section per object. An object's motion is a list
/// of `segment = frames vx vy` lines; the last velocity holds afterwards.
inline SceneSpec scene_from_config(const ConfigFile & cfg)
{
  SceneSpec spec;
  if (const auto * s = cfg.find("scene")) {
    SectionReader r(*s);
    r.get("width", spec.width);
    r.get("height", spec.height);
    r.get("duration", spec.duration);
    r.get("seed", spec.seed);
    r.get("background", spec.background);
    r.get("texture", spec.texture_amplitude);
    r.get("fps", spec.fps);
    r.get("name", spec.name);
    r.finish();
  }
  for (const auto * s : cfg.all("object")) {
    SectionReader r(*s);
    SceneObject o;
    std::string shape = "rectangle";
    r.get("shape", shape);
    o.shape = parse_shape(shape);
    r.get("width", o.width);
    r.get("height", o.height);
    r.get("intensity", o.intensity);
    r.get("x", o.x);
    r.get("y", o.y);
    for (const auto & e : r.list("segment")) {
      std::istringstream in(e.value);
      VelocitySegment seg;
      in >> seg.frames >> seg.vx >> seg.vy;
      require(!in.fail(), detail::where(e, "object") + ": expected 'frames vx vy'");
      o.segments.push_back(seg);
    }
    r.finish();
    spec.objects.push_back(std::move(o));
  }
  spec.validate();
  return spec;
}

/// [retime] sections in order; `begin`/`end` are source frame indices.
inline std::optional<RetimePlan> retime_from_config(const ConfigFile & cfg)
{
  auto sections = cfg.all("retime");
  if (sections.empty()) return std::nullopt;
  RetimePlan plan;
  for (const auto * s : sections) {
    SectionReader r(*s);
    RetimeSegment seg;
    std::string mode = "normal";
    r.get("begin", seg.begin);
    r.get("end", seg.end);
    r.get("mode", mode);
    r.get("factor", seg.factor);
    r.finish();
    seg.mode = parse_retime_mode(mode);
    plan.segments.push_back(seg);
  }
  return plan;
}

struct MaskConfig
{
  std::uint64_t seed = 0;
  int bmax = 20;
};

inline MaskConfig masks_from_config(const ConfigFile & cfg, const StateSpace & space)
{
  MaskConfig m;
  m.bmax = space.bmax();
  if (const auto * s = cfg.find("masks")) {
    SectionReader r(*s);
    r.get("seed", m.seed);
    r.get("bmax", m.bmax);
    r.finish();
  }
  require(m.bmax >= space.bmax(), "masks.bmax must cover the largest state");
  return m;
}

/// Run-time configuration: every section feeding RunConfig.
inline RunConfig run_from_config(const ConfigFile & cfg)
{
  RunConfig rc;
  if (const auto * s = cfg.find("states")) {
    SectionReader r(*s);
    r.get("values", rc.space.values);
    r.finish();
  }
  if (const auto * s = cfg.find("transition")) {
    SectionReader r(*s);
    r.get("alpha", rc.transition.alpha);
    r.get("beta", rc.transition.beta);
    r.finish();
  }
  if (const auto * s = cfg.find("reward")) {
    SectionReader r(*s);
    r.get("drth", rc.reward.drth);
    r.get("psnrth", rc.reward.psnrth);
    r.get("r1", rc.reward.r1);
    r.get("r2", rc.reward.r2);
    r.get("lambda1", rc.reward.lambda1);
    r.get("lambda2", rc.reward.lambda2);
    r.get("psnr_low", rc.reward.psnr_low);
    r.get("psnr_high", rc.reward.psnr_high);
    r.finish();
  }
  if (const auto * s = cfg.find("detector")) {
    SectionReader r(*s);
    r.get("threshold", rc.detector.threshold);
    r.get("min_area", rc.detector.min_area);
    r.get("iou_threshold", rc.detector.iou_threshold);
    r.finish();
  }
  if (const auto * s = cfg.find("reconstruction")) {
    SectionReader r(*s);
    r.get("max_iters", rc.reconstruction.max_iters);
    r.get("tv_weight", rc.reconstruction.tv_weight);
    r.get("tv_inner_iters", rc.reconstruction.tv_inner_iters);
    r.get("tol", rc.reconstruction.tol);
    r.get("accelerate", rc.reconstruction.accelerate);
    r.finish();
  }
  if (const auto * s = cfg.find("run")) {
    SectionReader r(*s);
    r.get("batch_size", rc.batch_size);
    r.get("initial_B", rc.initial_B);
    r.get("reconstruction", rc.with_reconstruction);
    r.get("psnr_shaping", rc.with_psnr_shaping);
    r.get("sigma", rc.sigma);
    r.get("seed", rc.seed);
    r.finish();
  }
  rc.validate();
  return rc;
}

struct TrainSettings
{
  TrainConfig train;
  double switch_probability = 0.1;
};

inline TrainSettings train_from_config(const ConfigFile & cfg)
{
  TrainSettings t;
  if (const auto * s = cfg.find("train")) {
    SectionReader r(*s);
    r.get("episodes", t.train.episodes);
    r.get("steps", t.train.steps_per_episode);
    r.get("learning_rate", t.train.learning_rate);
    r.get("discount", t.train.discount);
    r.get("epsilon_start", t.train.epsilon_start);
    r.get("epsilon_end", t.train.epsilon_end);
    r.get("seed", t.train.seed);
    r.get("switch_probability", t.switch_probability);
    r.finish();
  }
  t.train.validate();
  require(t.switch_probability >= 0.0 && t.switch_probability <= 1.0,
          "train.switch_probability must lie in [0,1]");
  return t;
}

/// File locations used by the CLI; every entry is optional.
struct PathConfig
{
  std::map<std::string, std::string> entries;

  std::optional<std::string> get(const std::string & key) const
  {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
};

inline PathConfig paths_from_config(const ConfigFile & cfg)
{
  static const std::vector<std::string> keys{
    "video", "masks", "qtable", "output", "measurements", "regime_static", "regime_fast"};
  PathConfig p;
  if (const auto * s = cfg.find("paths")) {
    SectionReader r(*s);
    for (const auto & k : keys) {
      std::optional<std::string> v;
      r.get(k, v);
      if (v) p.entries[k] = *v;
    }
    r.finish();
  }
  return p;
}

/// Overrides every seed in the file with derived values from one global seed.
inline void apply_global_seed(std::uint64_t seed, SceneSpec * scene, RunConfig * run, TrainConfig * train,
                              MaskConfig * masks)
{
  if (scene != nullptr) scene->seed = derive_seed(seed, 11);
  if (run != nullptr) run->seed = derive_seed(seed, 12);
  if (train != nullptr) train->seed = derive_seed(seed, 13);
  if (masks != nullptr) masks->seed = derive_seed(seed, 14);
}
}  // namespace adaptive_sci
