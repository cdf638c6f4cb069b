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

#ifndef ADAPTIVE_SCI_IMAGE_HPP
#define ADAPTIVE_SCI_IMAGE_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adaptive_sci/errors.hpp"

namespace adaptive_sci
{
/// Row-major grayscale image; pixel (x, y) lives at y * width + x.
class Image
{
public:
  Image() = default;
  Image(std::size_t width, std::size_t height, double fill = 0.0)
  : width_(width), height_(height), data_(width * height, fill)
  {
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double & operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  double & operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> pixels() { return data_; }
  std::span<const double> pixels() const { return data_; }

  bool same_shape(const Image & other) const
  {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image &, const Image &) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// A block of `depth` frames stored frame-major: frame b occupies
/// [b * width * height, (b + 1) * width * height). This is also the
/// flattened layout x = [x_1; ...; x_B] used by the sensing operator.
class Cube
{
public:
  Cube() = default;
  Cube(std::size_t width, std::size_t height, std::size_t depth, double fill = 0.0)
  : width_(width), height_(height), depth_(depth), data_(width * height * depth, fill)
  {
  }

  static Cube from_frames(std::span<const Image> frames)
  {
    require(!frames.empty(), "cube needs at least one frame");
    Cube cube(frames[0].width(), frames[0].height(), frames.size());
    for (std::size_t b = 0; b < frames.size(); ++b) {
      require(frames[b].same_shape(frames[0]), "cube frames must share dimensions");
      std::copy(frames[b].pixels().begin(), frames[b].pixels().end(), cube.frame(b).begin());
    }
    return cube;
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t depth() const { return depth_; }
  std::size_t frame_size() const { return width_ * height_; }
  std::size_t size() const { return data_.size(); }

  double & operator()(std::size_t x, std::size_t y, std::size_t b)
  {
    return data_[(b * height_ + y) * width_ + x];
  }
  double operator()(std::size_t x, std::size_t y, std::size_t b) const
  {
    return data_[(b * height_ + y) * width_ + x];
  }

  std::span<double> frame(std::size_t b) { return {data_.data() + b * frame_size(), frame_size()}; }
  std::span<const double> frame(std::size_t b) const
  {
    return {data_.data() + b * frame_size(), frame_size()};
  }

  Image frame_image(std::size_t b) const
  {
    Image img(width_, height_);
    std::copy(frame(b).begin(), frame(b).end(), img.pixels().begin());
    return img;
  }

  std::vector<Image> frames() const
  {
    std::vector<Image> out;
    out.reserve(depth_);
    for (std::size_t b = 0; b < depth_; ++b) {
      out.push_back(frame_image(b));
    }
    return out;
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const Cube & other) const
  {
    return width_ == other.width_ && height_ == other.height_ && depth_ == other.depth_;
  }

  friend bool operator==(const Cube &, const Cube &) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t depth_ = 0;
  std::vector<double> data_;
};

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_IMAGE_HPP
