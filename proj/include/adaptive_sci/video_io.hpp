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

#ifndef ADAPTIVE_SCI_VIDEO_IO_HPP
#define ADAPTIVE_SCI_VIDEO_IO_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/geometry.hpp"
#include "adaptive_sci/image.hpp"
#include "adaptive_sci/random.hpp"

namespace adaptive_sci
{
struct FrameSequence
{
  std::vector<Image> frames;
  double fps = 30.0;
  std::string name;

  std::size_t size() const { return frames.size(); }
  std::size_t width() const { return frames.empty() ? 0 : frames.front().width(); }
  std::size_t height() const { return frames.empty() ? 0 : frames.front().height(); }

  void validate() const
  {
    require(!frames.empty(), "frame sequence is empty");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      require(frames[t].same_shape(frames.front()),
              "frame " + std::to_string(t) + " has different dimensions");
      for (double p : frames[t].pixels()) {
        require(p >= 0.0 && p <= 1.0, "frame " + std::to_string(t) + " has a pixel outside [0,1]");
      }
    }
  }
};

struct TrackedBox
{
  int object_id = 0;
  BoundingBox box;

  friend bool operator==(const TrackedBox &, const TrackedBox &) = default;
};

/// One list of visible-object boxes per frame.
struct GroundTruthTrack
{
  std::vector<std::vector<TrackedBox>> frames;

  std::size_t size() const { return frames.size(); }

  friend bool operator==(const GroundTruthTrack &, const GroundTruthTrack &) = default;
};

/// Per-object hull of the boxes in frames [first, first + count): the
/// footprint a moving object leaves in a measurement spanning those frames.
inline std::vector<BoundingBox> window_hulls(
  const GroundTruthTrack & track, std::size_t first, std::size_t count)
{
  std::map<int, BoundingBox> hulls;
  for (std::size_t t = first; t < first + count && t < track.frames.size(); ++t) {
    for (const auto & tb : track.frames[t]) {
      auto it = hulls.find(tb.object_id);
      if (it == hulls.end()) {
        hulls.emplace(tb.object_id, tb.box);
      } else {
        it->second = hull(it->second, tb.box);
      }
    }
  }
  std::vector<BoundingBox> out;
  out.reserve(hulls.size());
  for (const auto & [id, box] : hulls) {
    out.push_back(box);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Synthetic scenes

enum class Shape { Rectangle, Disc };

/// Constant velocity for `frames` frames. The last segment's velocity persists.
struct VelocitySegment
{
  std::size_t frames = 1;
  double vx = 0.0;
  double vy = 0.0;
};

struct SceneObject
{
  Shape shape = Shape::Rectangle;
  int width = 8;   // disc diameter for Shape::Disc
  int height = 8;
  double intensity = 1.0;
  double x = 0.0;  // top-left at frame 0
  double y = 0.0;
  std::vector<VelocitySegment> segments;
};

struct SceneSpec
{
  int width = 64;
  int height = 64;
  int duration = 1;
  std::uint64_t seed = 0;
  double background = 0.0;
  double texture_amplitude = 0.0;
  double fps = 30.0;
  std::string name = "scene";
  std::vector<SceneObject> objects;

  void validate() const
  {
    require(width >= 1, "scene.width must be >= 1");
    require(height >= 1, "scene.height must be >= 1");
    require(duration >= 1, "scene.duration must be >= 1");
    require(background >= 0.0 && background <= 1.0, "scene.background must lie in [0,1]");
    require(texture_amplitude >= 0.0, "scene.texture must be >= 0");
    require(fps > 0.0, "scene.fps must be positive");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto & o = objects[i];
      const std::string prefix = "object[" + std::to_string(i) + "].";
      require(o.width > 0 && o.width < width, prefix + "width must be positive and smaller than the frame");
      require(o.height > 0 && o.height < height,
              prefix + "height must be positive and smaller than the frame");
      require(o.shape != Shape::Disc || o.width == o.height, prefix + "disc needs width == height");
      require(o.intensity >= 0.0 && o.intensity <= 1.0, prefix + "intensity must lie in [0,1]");
      for (const auto & s : o.segments) {
        require(s.frames >= 1, prefix + "segment frames must be >= 1");
      }
    }
  }
};

/// Top-left position of an object at frame t (integrating the velocity segments).
inline std::pair<double, double> object_position(const SceneObject & o, std::size_t t)
{
  double x = o.x;
  double y = o.y;
  std::size_t step = 0;
  for (std::size_t s = 0; s < o.segments.size() && step < t; ++s) {
    const bool last = s + 1 == o.segments.size();
    const std::size_t n = last ? t - step : std::min(o.segments[s].frames, t - step);
    x += o.segments[s].vx * static_cast<double>(n);
    y += o.segments[s].vy * static_cast<double>(n);
    step += n;
  }
  return {x, y};
}

namespace detail
{
inline std::int64_t round_half_up(double v) { return static_cast<std::int64_t>(std::floor(v + 0.5)); }

/// Paints one object and returns the clipped extent of the painted pixels.
inline std::optional<BoundingBox> paint_object(Image & img, const SceneObject & o, std::size_t t)
{
  const auto [px, py] = object_position(o, t);
  const std::int64_t x0 = round_half_up(px);
  const std::int64_t y0 = round_half_up(py);
  const auto W = static_cast<std::int64_t>(img.width());
  const auto H = static_cast<std::int64_t>(img.height());
  const auto clipped = clip_to_frame({x0, y0, o.width, o.height}, W, H);
  if (!clipped) {
    return std::nullopt;
  }
  if (o.shape == Shape::Rectangle) {
    for (auto y = clipped->y; y < clipped->y + clipped->h; ++y) {
      for (auto x = clipped->x; x < clipped->x + clipped->w; ++x) {
        img(x, y) = o.intensity;
      }
    }
    return clipped;
  }
  const double r = 0.5 * o.width;
  const double cx = static_cast<double>(x0) + r;
  const double cy = static_cast<double>(y0) + r;
  std::int64_t bx0 = W, by0 = H, bx1 = -1, by1 = -1;
  for (auto y = clipped->y; y < clipped->y + clipped->h; ++y) {
    for (auto x = clipped->x; x < clipped->x + clipped->w; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) {
        img(x, y) = o.intensity;
        bx0 = std::min(bx0, x);
        by0 = std::min(by0, y);
        bx1 = std::max(bx1, x);
        by1 = std::max(by1, y);
      }
    }
  }
  if (bx1 < 0) {
    return std::nullopt;
  }
  return BoundingBox{bx0, by0, bx1 - bx0 + 1, by1 - by0 + 1};
}
}  // namespace detail

/// Renders the scene. Later objects paint over earlier ones; each visible
/// object contributes the clipped extent of its painted pixels to the track.
inline std::pair<FrameSequence, GroundTruthTrack> generate_scene(const SceneSpec & spec)
{
  spec.validate();
  const auto W = static_cast<std::size_t>(spec.width);
  const auto H = static_cast<std::size_t>(spec.height);

  Image background(W, H, spec.background);
  if (spec.texture_amplitude > 0.0) {
    Rng rng(spec.seed);
    for (double & p : background.pixels()) {
      p = std::clamp(p + spec.texture_amplitude * (uniform01(rng) - 0.5), 0.0, 1.0);
    }
  }

  FrameSequence seq;
  seq.fps = spec.fps;
  seq.name = spec.name;
  GroundTruthTrack track;
  const auto T = static_cast<std::size_t>(spec.duration);
  seq.frames.reserve(T);
  track.frames.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    Image frame = background;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      if (auto box = detail::paint_object(frame, spec.objects[i], t)) {
        track.frames[t].push_back({static_cast<int>(i), *box});
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return {std::move(seq), std::move(track)};
}

// ---------------------------------------------------------------------------------------------
// Retiming

enum class RetimeMode { Normal, Freeze, Skip };

/// Source frames [begin, end) retimed by `mode`.
struct RetimeSegment
{
  std::size_t begin = 0;
  std::size_t end = 0;
  RetimeMode mode = RetimeMode::Normal;
  std::size_t factor = 1;
};

struct RetimePlan
{
  std::vector<RetimeSegment> segments;

  void validate(std::size_t source_length) const
  {
    require(!segments.empty(), "retime plan has no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto & s = segments[i];
      const std::string prefix = "retime segment " + std::to_string(i) + ": ";
      require(s.begin < s.end, prefix + "empty frame range");
      require(s.end <= source_length, prefix + "range exceeds the source sequence");
      require(s.factor >= 1, prefix + "factor must be >= 1");
      require(s.mode != RetimeMode::Normal || s.factor == 1, prefix + "normal mode needs factor 1");
      if (i > 0) {
        require(s.begin == segments[i - 1].end, prefix + "segments must be contiguous");
      }
    }
  }
};

/// Source frame indices produced by the plan, in output order.
inline std::vector<std::size_t> retime_indices(const RetimePlan & plan, std::size_t source_length)
{
  plan.validate(source_length);
  std::vector<std::size_t> out;
  for (const auto & s : plan.segments) {
    switch (s.mode) {
      case RetimeMode::Normal:
        for (auto t = s.begin; t < s.end; ++t) out.push_back(t);
        break;
      case RetimeMode::Freeze:
        for (auto t = s.begin; t < s.end; ++t) out.insert(out.end(), s.factor, t);
        break;
      case RetimeMode::Skip:
        for (auto t = s.begin; t < s.end; t += s.factor) out.push_back(t);
        break;
    }
  }
  return out;
}

inline std::pair<FrameSequence, GroundTruthTrack> retime(
  const FrameSequence & seq, const GroundTruthTrack & track, const RetimePlan & plan)
{
  require(track.frames.empty() || track.size() == seq.size(),
          "track length does not match the frame sequence");
  const auto idx = retime_indices(plan, seq.size());
  FrameSequence out_seq;
  out_seq.fps = seq.fps;
  out_seq.name = seq.name;
  GroundTruthTrack out_track;
  out_seq.frames.reserve(idx.size());
  for (auto t : idx) {
    out_seq.frames.push_back(seq.frames[t]);
    if (!track.frames.empty()) {
      out_track.frames.push_back(track.frames[t]);
    }
  }
  return {std::move(out_seq), std::move(out_track)};
}

// ---------------------------------------------------------------------------------------------
// Binary 8-bit graymap ("P5") frames, manifests and track files

inline std::uint8_t quantize8(double p)
{
  const double v = std::floor(255.0 * std::clamp(p, 0.0, 1.0) + 0.5);
  return static_cast<std::uint8_t>(v);
}

inline void write_pgm(const Image & img, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    bytes[i] = static_cast<char>(quantize8(img[i]));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

namespace detail
{
/// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream & in, const std::string & path)
{
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) {
    throw IoError(path + ": truncated graymap header");
  }
  return tok;
}

inline std::size_t parse_header_number(const std::string & tok, const std::string & path)
{
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception &) {
    throw IoError(path + ": malformed graymap header field '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw IoError(path + ": malformed graymap header field '" + tok + "'");
  }
  return v;
}
}  // namespace detail

inline Image read_pgm(const std::filesystem::path & path)
{
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + name);
  }
  if (detail::pgm_token(in, name) != "P5") {
    throw IoError(name + ": not a binary graymap (magic P5 expected)");
  }
  const auto w = detail::parse_header_number(detail::pgm_token(in, name), name);
  const auto h = detail::parse_header_number(detail::pgm_token(in, name), name);
  const auto maxval = detail::parse_header_number(detail::pgm_token(in, name), name);
  if (w == 0 || h == 0) {
    throw IoError(name + ": zero image dimension");
  }
  if (maxval != 255) {
    throw IoError(name + ": only maxval 255 is supported");
  }
  std::vector<char> bytes(w * h);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError(name + ": truncated pixel data");
  }
  Image img(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    img[i] = static_cast<double>(static_cast<unsigned char>(bytes[i])) / 255.0;
  }
  return img;
}

/// Track records: `frame_index object_id x y w h`, one per line.
inline void write_track(const GroundTruthTrack & track, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (std::size_t t = 0; t < track.frames.size(); ++t) {
    for (const auto & tb : track.frames[t]) {
      out << t << ' ' << tb.object_id << ' ' << tb.box.x << ' ' << tb.box.y << ' ' << tb.box.w << ' '
          << tb.box.h << '\n';
    }
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

inline GroundTruthTrack read_track(const std::filesystem::path & path, std::size_t frame_count)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open track file " + path.string());
  }
  GroundTruthTrack track;
  track.frames.resize(frame_count);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ls(line);
    std::size_t t = 0;
    TrackedBox tb;
    if (!(ls >> t >> tb.object_id >> tb.box.x >> tb.box.y >> tb.box.w >> tb.box.h)) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed track record");
    }
    if (t >= frame_count) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": frame index out of range");
    }
    if (!tb.box.valid()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": box has non-positive extent");
    }
    track.frames[t].push_back(tb);
  }
  return track;
}

/// Writes frame_NNNNNN.pgm files plus manifest.txt (and track.txt when a
/// track is given) into `dir`. Returns the manifest path.
inline std::filesystem::path save_frames(
  const FrameSequence & seq, const std::filesystem::path & dir,
  const GroundTruthTrack * track = nullptr)
{
  seq.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
  const auto manifest_path = dir / "manifest.txt";
  std::ofstream manifest(manifest_path);
  if (!manifest) {
    throw IoError("cannot open " + manifest_path.string() + " for writing");
  }
  char fps[32];
  std::snprintf(fps, sizeof(fps), "%.10g", seq.fps);
  manifest << "frames " << seq.size() << ' ' << seq.width() << ' ' << seq.height() << ' ' << fps
           << '\n';
  for (std::size_t t = 0; t < seq.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu.pgm", t);
    write_pgm(seq.frames[t], dir / name);
    manifest << name << '\n';
  }
  if (track != nullptr) {
    write_track(*track, dir / "track.txt");
    manifest << "track track.txt\n";
  }
  if (!manifest) {
    throw IoError("failed writing " + manifest_path.string());
  }
  return manifest_path;
}

/// Reads a manifest written by save_frames (paths relative to the manifest).
inline std::pair<FrameSequence, std::optional<GroundTruthTrack>> load_frames(
  const std::filesystem::path & manifest_path)
{
  std::ifstream in(manifest_path);
  if (!in) {
    throw IoError("cannot open manifest " + manifest_path.string());
  }
  const auto base = manifest_path.parent_path();
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(manifest_path.string() + ": empty manifest");
  }
  std::istringstream header(line);
  std::string tag;
  std::size_t count = 0, width = 0, height = 0;
  double fps = 0.0;
  if (!(header >> tag >> count >> width >> height >> fps) || tag != "frames") {
    throw IoError(manifest_path.string() + ": header must be 'frames <count> <width> <height> <fps>'");
  }
  FrameSequence seq;
  seq.fps = fps;
  seq.name = base.filename().string();
  std::optional<std::filesystem::path> track_path;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("track ", 0) == 0) {
      track_path = base / line.substr(6);
      continue;
    }
    Image img = read_pgm(base / line);
    if (img.width() != width || img.height() != height) {
      throw IoError(line + ": dimension mismatch (" + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " vs manifest " + std::to_string(width) + "x" +
                    std::to_string(height) + ")");
    }
    seq.frames.push_back(std::move(img));
  }
  if (seq.size() != count) {
    throw IoError(manifest_path.string() + ": header declares " + std::to_string(count) +
                  " frames but lists " + std::to_string(seq.size()));
  }
  if (count == 0) {
    throw IoError(manifest_path.string() + ": manifest lists no frames");
  }
  std::optional<GroundTruthTrack> track;
  if (track_path) {
    track = read_track(*track_path, seq.size());
  }
  return {std::move(seq), std::move(track)};
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_VIDEO_IO_HPP
