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

#ifndef ADAPTIVE_SCI_GEOMETRY_HPP
#define ADAPTIVE_SCI_GEOMETRY_HPP

#include <algorithm>
#include <cstdint>
#include <optional>

namespace adaptive_sci
{
/// Axis-aligned pixel box: columns [x, x + w), rows [y, y + h).
struct BoundingBox
{
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 0;
  std::int64_t h = 0;

  std::int64_t area() const { return w * h; }
  bool valid() const { return w > 0 && h > 0; }

  friend bool operator==(const BoundingBox &, const BoundingBox &) = default;
};

/// Intersection with the frame [0, width) x [0, height); empty when no overlap.
inline std::optional<BoundingBox> clip_to_frame(
  const BoundingBox & box, std::int64_t width, std::int64_t height)
{
  const auto x0 = std::max<std::int64_t>(box.x, 0);
  const auto y0 = std::max<std::int64_t>(box.y, 0);
  const auto x1 = std::min<std::int64_t>(box.x + box.w, width);
  const auto y1 = std::min<std::int64_t>(box.y + box.h, height);
  if (x1 <= x0 || y1 <= y0) {
    return std::nullopt;
  }
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

/// Smallest box containing both.
inline BoundingBox hull(const BoundingBox & a, const BoundingBox & b)
{
  const auto x0 = std::min(a.x, b.x);
  const auto y0 = std::min(a.y, b.y);
  const auto x1 = std::max(a.x + a.w, b.x + b.w);
  const auto y1 = std::max(a.y + a.h, b.y + b.h);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_GEOMETRY_HPP
