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

#ifndef ADAPTIVE_SCI_SCI_FORWARD_HPP
#define ADAPTIVE_SCI_SCI_FORWARD_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/image.hpp"
#include "adaptive_sci/random.hpp"

namespace adaptive_sci
{
/// Binary coding patterns C_b(x, y), b = 0..bmax-1. A compression ratio B
/// uses the prefix b < B of the same stack.
class MaskStack
{
public:
  MaskStack() = default;
  MaskStack(std::size_t width, std::size_t height, std::size_t bmax, std::uint64_t seed = 0)
  : width_(width), height_(height), bmax_(bmax), seed_(seed), data_(width * height * bmax, 0)
  {
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t frame_size() const { return width_ * height_; }
  std::size_t bmax() const { return bmax_; }
  std::uint64_t seed() const { return seed_; }

  std::uint8_t operator()(std::size_t x, std::size_t y, std::size_t b) const
  {
    return data_[b * frame_size() + y * width_ + x];
  }
  void set(std::size_t x, std::size_t y, std::size_t b, bool on)
  {
    data_[b * frame_size() + y * width_ + x] = on ? 1 : 0;
  }

  /// Plane b in raster order.
  std::span<const std::uint8_t> plane(std::size_t b) const
  {
    return {data_.data() + b * frame_size(), frame_size()};
  }
  std::span<const std::uint8_t> flat() const { return data_; }

  /// Per-pixel sum of the first B planes.
  Image column_sums(std::size_t B) const
  {
    require(B >= 1 && B <= bmax_, "prefix length " + std::to_string(B) + " outside mask range");
    Image sums(width_, height_);
    for (std::size_t b = 0; b < B; ++b) {
      const auto p = plane(b);
      for (std::size_t i = 0; i < p.size(); ++i) {
        sums[i] += p[i];
      }
    }
    return sums;
  }

  friend bool operator==(const MaskStack &, const MaskStack &) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t bmax_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Bernoulli(0.5) masks, then every pixel that is dark across the shortest
/// usable prefix gets one uniformly chosen plane of that prefix switched on.
inline MaskStack generate_masks(
  std::size_t width, std::size_t height, std::size_t bmax, std::uint64_t seed,
  std::span<const int> state_set)
{
  require(width >= 1 && height >= 1 && bmax >= 1, "mask dimensions must be >= 1");
  require(!state_set.empty(), "state set is empty");
  const int bmin = *std::min_element(state_set.begin(), state_set.end());
  require(bmin >= 1, "smallest compression ratio must be >= 1");
  require(static_cast<std::size_t>(bmin) <= bmax, "smallest compression ratio exceeds bmax");

  MaskStack masks(width, height, bmax, seed);
  Rng rng(seed);
  for (std::size_t b = 0; b < bmax; ++b) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        masks.set(x, y, b, bernoulli(rng, 0.5));
      }
    }
  }
  const auto prefix = static_cast<std::size_t>(bmin);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      bool lit = false;
      for (std::size_t b = 0; b < prefix && !lit; ++b) {
        lit = masks(x, y, b) != 0;
      }
      if (!lit) {
        masks.set(x, y, uniform_index(rng, prefix), true);
      }
    }
  }
  return masks;
}

inline MaskStack generate_masks(
  std::size_t width, std::size_t height, std::size_t bmax, std::uint64_t seed,
  std::initializer_list<int> state_set)
{
  return generate_masks(width, height, bmax, seed, std::span<const int>(state_set.begin(), state_set.size()));
}

struct Measurement
{
  Image y;
  std::size_t B = 0;
  double sigma = 0.0;
  std::size_t frame_offset = 0;
};

struct NormalizedMeasurement
{
  Image ybar;
  std::size_t B = 0;
};

/// y = sum_b C_b .* X_b + z. sigma is the noise level of the normalized
/// measurement ybar = y / sum_b C_b, which lies in [0,1]; so z at pixel i is
/// sigma * sum_b C_b(i) * n_i with n ~ N(0,1) drawn in raster order.
inline Measurement sense(
  const Cube & x, const MaskStack & masks, std::size_t B, double sigma, Rng & rng,
  std::size_t frame_offset = 0)
{
  require(B >= 1 && B <= masks.bmax(), "B = " + std::to_string(B) + " outside mask range");
  require(x.depth() == B, "cube has " + std::to_string(x.depth()) + " frames, expected B = " +
                            std::to_string(B));
  require(x.width() == masks.width() && x.height() == masks.height(),
          "cube and mask dimensions differ");
  require(sigma >= 0.0, "noise sigma must be >= 0");

  Measurement m{Image(x.width(), x.height()), B, sigma, frame_offset};
  auto y = m.y.pixels();
  for (std::size_t b = 0; b < B; ++b) {
    const auto c = masks.plane(b);
    const auto xb = x.frame(b);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += c[i] * xb[i];
    }
  }
  if (sigma > 0.0) {
    const Image sums = masks.column_sums(B);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += sigma * sums[i] * standard_normal(rng);
    }
  }
  return m;
}

/// ybar = y / sum_b C_b.
inline NormalizedMeasurement normalize(const Measurement & m, const MaskStack & masks)
{
  require(m.y.width() == masks.width() && m.y.height() == masks.height(),
          "measurement and mask dimensions differ");
  const Image sums = masks.column_sums(m.B);
  NormalizedMeasurement out{Image(m.y.width(), m.y.height()), m.B};
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (sums[i] == 0.0) {
      throw ValidationError("mask column sum is zero at pixel " + std::to_string(i) +
                            " (mask prefix invariant violated)");
    }
    out.ybar[i] = m.y[i] / sums[i];
  }
  return out;
}

/// H = [D_1, ..., D_B]: N x (N B) with diagonal blocks D_b = diag(vec(C_b)).
class SensingOperator
{
public:
  SensingOperator(const MaskStack & masks, std::size_t B)
  : n_(masks.frame_size()), depth_(B), width_(masks.width()), height_(masks.height())
  {
    require(B >= 1 && B <= masks.bmax(), "B = " + std::to_string(B) + " outside mask range");
    diagonals_.resize(n_ * depth_);
    for (std::size_t b = 0; b < depth_; ++b) {
      const auto p = masks.plane(b);
      std::copy(p.begin(), p.end(), diagonals_.begin() + static_cast<std::ptrdiff_t>(b * n_));
    }
    hht_.assign(n_, 0.0);
    for (std::size_t b = 0; b < depth_; ++b) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double d = diagonals_[b * n_ + i];
        hht_[i] += d * d;
      }
    }
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return n_ * depth_; }
  std::size_t depth() const { return depth_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  /// Diagonal entry of block b at pixel i.
  double diagonal(std::size_t b, std::size_t i) const { return diagonals_[b * n_ + i]; }

  std::vector<double> apply(std::span<const double> x) const
  {
    require(x.size() == cols(), "operator input has length " + std::to_string(x.size()) +
                                  ", expected " + std::to_string(cols()));
    std::vector<double> y(n_, 0.0);
    for (std::size_t b = 0; b < depth_; ++b) {
      for (std::size_t i = 0; i < n_; ++i) {
        y[i] += diagonals_[b * n_ + i] * x[b * n_ + i];
      }
    }
    return y;
  }

  std::vector<double> apply_transpose(std::span<const double> y) const
  {
    require(y.size() == rows(), "transpose input has length " + std::to_string(y.size()) +
                                  ", expected " + std::to_string(rows()));
    std::vector<double> x(n_ * depth_);
    for (std::size_t b = 0; b < depth_; ++b) {
      for (std::size_t i = 0; i < n_; ++i) {
        x[b * n_ + i] = diagonals_[b * n_ + i] * y[i];
      }
    }
    return x;
  }

  /// H H^T is diagonal; this is its diagonal, the per-pixel mask column sum.
  std::span<const double> hht_diagonal() const { return hht_; }

private:
  std::size_t n_;
  std::size_t depth_;
  std::size_t width_;
  std::size_t height_;
  std::vector<double> diagonals_;
  std::vector<double> hht_;
};

inline SensingOperator build_operator(const MaskStack & masks, std::size_t B)
{
  return SensingOperator(masks, B);
}

inline std::vector<double> sense_vectorized(const SensingOperator & h, std::span<const double> x_flat)
{
  return h.apply(x_flat);
}

// ---------------------------------------------------------------------------------------------
// Mask container: "SCIM", u32 width, u32 height, u32 bmax, u64 seed (little-endian), then
// bmax bit planes, each `height` rows of ceil(width / 8) bytes, MSB first.

namespace detail
{
template <typename T>
void put_le(std::vector<char> & out, T v)
{
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const char> in, std::size_t offset)
{
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}
}  // namespace detail

inline constexpr std::size_t kMaskHeaderBytes = 4 + 4 + 4 + 4 + 8;

inline std::vector<char> encode_masks(const MaskStack & masks)
{
  std::vector<char> out{'S', 'C', 'I', 'M'};
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(masks.width()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(masks.height()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(masks.bmax()));
  detail::put_le<std::uint64_t>(out, masks.seed());
  const std::size_t row_bytes = (masks.width() + 7) / 8;
  for (std::size_t b = 0; b < masks.bmax(); ++b) {
    for (std::size_t y = 0; y < masks.height(); ++y) {
      std::vector<unsigned char> row(row_bytes, 0);
      for (std::size_t x = 0; x < masks.width(); ++x) {
        if (masks(x, y, b)) {
          row[x / 8] |= static_cast<unsigned char>(0x80u >> (x % 8));
        }
      }
      out.insert(out.end(), row.begin(), row.end());
    }
  }
  return out;
}

inline MaskStack decode_masks(std::span<const char> bytes)
{
  if (bytes.size() < kMaskHeaderBytes || std::memcmp(bytes.data(), "SCIM", 4) != 0) {
    throw IoError("not a mask file (magic SCIM expected)");
  }
  const auto width = detail::get_le<std::uint32_t>(bytes, 4);
  const auto height = detail::get_le<std::uint32_t>(bytes, 8);
  const auto bmax = detail::get_le<std::uint32_t>(bytes, 12);
  const auto seed = detail::get_le<std::uint64_t>(bytes, 16);
  if (width == 0 || height == 0 || bmax == 0) {
    throw IoError("mask file has a zero dimension");
  }
  const std::size_t row_bytes = (width + 7) / 8;
  const std::size_t expected = kMaskHeaderBytes + std::size_t{bmax} * height * row_bytes;
  if (bytes.size() != expected) {
    throw IoError("mask file has " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string(expected));
  }
  MaskStack masks(width, height, bmax, seed);
  std::size_t offset = kMaskHeaderBytes;
  for (std::size_t b = 0; b < bmax; ++b) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const auto byte = static_cast<unsigned char>(bytes[offset + x / 8]);
        masks.set(x, y, b, (byte & (0x80u >> (x % 8))) != 0);
      }
      offset += row_bytes;
    }
  }
  return masks;
}

inline void save_masks(const MaskStack & masks, const std::filesystem::path & path)
{
  const auto bytes = encode_masks(masks);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

inline MaskStack load_masks(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open mask file " + path.string());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_masks(bytes);
  } catch (const IoError & e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_SCI_FORWARD_HPP
