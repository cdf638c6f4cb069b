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

#ifndef ADAPTIVE_SCI_RECONSTRUCT_HPP
#define ADAPTIVE_SCI_RECONSTRUCT_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/image.hpp"
#include "adaptive_sci/sci_forward.hpp"

namespace adaptive_sci
{
struct ReconstructionConfig
{
  std::size_t max_iters = 60;
  double tv_weight = 0.07;
  std::size_t tv_inner_iters = 5;
  double tol = 1e-4;
  // Feed the accumulated residual back into each projection (accelerated GAP).
  bool accelerate = true;

  void validate() const
  {
    require(max_iters >= 1, "reconstruction.max_iters must be >= 1");
    require(tv_weight > 0.0, "reconstruction.tv_weight must be positive");
    require(tv_inner_iters >= 1, "reconstruction.tv_inner_iters must be >= 1");
    require(tol > 0.0 && tol < 1.0, "reconstruction.tol must lie in (0,1)");
  }
};

struct QualityReport
{
  double psnr_db = 0.0;
  std::vector<double> per_frame_psnr;
  double mse = 0.0;
};

inline constexpr double kPsnrCapDb = 100.0;

/// x_b = C_b .* ybar: consistent with the measurement when it is noise-free.
inline Cube backproject_init(const Measurement & m, const MaskStack & masks)
{
  const auto nm = normalize(m, masks);
  Cube x(m.y.width(), m.y.height(), m.B);
  for (std::size_t b = 0; b < m.B; ++b) {
    const auto c = masks.plane(b);
    auto xb = x.frame(b);
    for (std::size_t i = 0; i < xb.size(); ++i) {
      xb[i] = c[i] * nm.ybar[i];
    }
  }
  return x;
}

/// Anisotropic ROF denoising of one frame,
///   min_u 1/2 |u - f|^2 + weight (|D_x u|_1 + |D_y u|_1),
/// by projected gradient ascent on the dual (p_x, p_y) in [-weight, weight].
/// The dual variables are read as a warm start and updated in place;
/// u = f - D^T p on return.
inline void tv_denoise_frame(
  std::span<const double> f, std::span<double> u, std::span<double> px, std::span<double> py,
  std::size_t width, std::size_t height, double weight, std::size_t iters)
{
  constexpr double step = 0.2;  // < 2 / |D|^2 = 1/4
  const std::size_t n = width * height;
  const auto primal = [&]() {
    for (std::size_t y = 0; y < height; ++y) {
      const std::size_t row = y * width;
      u[row] = f[row] + px[row];
      for (std::size_t x = 1; x < width; ++x) {
        const std::size_t i = row + x;
        u[i] = f[i] + px[i] - px[i - 1];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += py[i];
    }
    for (std::size_t i = width; i < n; ++i) {
      u[i] -= py[i - width];
    }
  };
  primal();
  for (std::size_t k = 0; k < iters; ++k) {
    // dual ascent with forward differences; the last column / row carry no flux
    for (std::size_t y = 0; y < height; ++y) {
      const std::size_t row = y * width;
      for (std::size_t x = 0; x + 1 < width; ++x) {
        const std::size_t i = row + x;
        px[i] = std::clamp(px[i] + step * (u[i + 1] - u[i]), -weight, weight);
      }
    }
    for (std::size_t i = 0; i + width < n; ++i) {
      py[i] = std::clamp(py[i] + step * (u[i + width] - u[i]), -weight, weight);
    }
    primal();
  }
}

struct GapTvResult
{
  Cube cube;
  std::size_t iterations = 0;
  bool converged = false;
  /// |y - H x| of each denoised iterate, before its next projection.
  std::vector<double> residual_norms;
  /// |y - H x| entering and |y - H z| leaving each projection step.
  std::vector<double> projection_in;
  std::vector<double> projection_out;
};

namespace detail
{
/// r = y - H x
inline void measurement_residual(
  const Measurement & m, const MaskStack & masks, const Cube & x, std::span<double> r)
{
  std::copy(m.y.pixels().begin(), m.y.pixels().end(), r.begin());
  for (std::size_t b = 0; b < m.B; ++b) {
    const auto c = masks.plane(b);
    const auto xb = x.frame(b);
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] -= c[i] * xb[i];
    }
  }
}

inline double residual_norm(const Measurement & m, const MaskStack & masks, const Cube & x)
{
  std::vector<double> r(m.y.size());
  measurement_residual(m, masks, x, r);
  double acc = 0.0;
  for (double v : r) acc += v * v;
  return std::sqrt(acc);
}
}  // namespace detail

/// Generalized alternating projection with frame-wise anisotropic TV.
/// Starts from x_b = ybar for every b (consistent with the measurement and
/// exact for a static scene), then alternates
///   z = x + H^T diag(sum_b C_b)^-1 (y - H x)
///   x = TV-denoise(z) frame by frame
/// until the relative change drops below cfg.tol or max_iters is reached.
/// With cfg.accelerate the projection targets y plus the running sum of
/// residuals instead of y, which removes most of the contrast loss the TV
/// step leaves at its fixed point.
inline GapTvResult gap_tv_solve(
  const Measurement & m, const MaskStack & masks, const ReconstructionConfig & cfg)
{
  cfg.validate();
  const auto nm = normalize(m, masks);
  const Image sums = masks.column_sums(m.B);
  const std::size_t W = m.y.width();
  const std::size_t H = m.y.height();
  const std::size_t N = W * H;

  GapTvResult result;
  Cube x(W, H, m.B);
  for (std::size_t b = 0; b < m.B; ++b) {
    std::copy(nm.ybar.pixels().begin(), nm.ybar.pixels().end(), x.frame(b).begin());
  }
  Cube z = x;
  std::vector<double> residual(N);
  std::vector<double> feedback(N, 0.0);
  std::vector<double> before;
  // per-frame TV dual variables, warm-started across outer iterations
  std::vector<double> px(N * m.B, 0.0);
  std::vector<double> py(N * m.B, 0.0);

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    // projection onto {x : H x = y}; exact because H H^T is diagonal
    detail::measurement_residual(m, masks, x, residual);
    double in = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      in += residual[i] * residual[i];
      if (cfg.accelerate) {
        feedback[i] += residual[i];
        residual[i] = feedback[i];
      }
      residual[i] /= sums[i];
    }
    result.projection_in.push_back(std::sqrt(in));
    for (std::size_t b = 0; b < m.B; ++b) {
      const auto c = masks.plane(b);
      const auto xb = x.frame(b);
      auto zb = z.frame(b);
      for (std::size_t i = 0; i < N; ++i) {
        zb[i] = xb[i] + c[i] * residual[i];
      }
    }
    result.projection_out.push_back(detail::residual_norm(m, masks, z));

    double change = 0.0;
    double norm = 0.0;
    for (std::size_t b = 0; b < m.B; ++b) {
      before.assign(x.frame(b).begin(), x.frame(b).end());
      tv_denoise_frame(
        z.frame(b), x.frame(b), std::span<double>(px).subspan(b * N, N),
        std::span<double>(py).subspan(b * N, N), W, H, cfg.tv_weight, cfg.tv_inner_iters);
      const auto xb = x.frame(b);
      for (std::size_t i = 0; i < N; ++i) {
        const double d = xb[i] - before[i];
        change += d * d;
        norm += before[i] * before[i];
      }
    }
    result.residual_norms.push_back(detail::residual_norm(m, masks, x));
    result.iterations = it + 1;
    if (change == 0.0 || (norm > 0.0 && std::sqrt(change / norm) < cfg.tol)) {
      result.converged = true;
      break;
    }
  }
  for (double & v : x.flat()) {
    v = std::clamp(v, 0.0, 1.0);
  }
  result.cube = std::move(x);
  return result;
}

inline Cube gap_tv(const Measurement & m, const MaskStack & masks, const ReconstructionConfig & cfg)
{
  return gap_tv_solve(m, masks, cfg).cube;
}

inline double frame_psnr(double mse)
{
  if (mse <= 0.0) {
    return kPsnrCapDb;
  }
  return std::min(kPsnrCapDb, -10.0 * std::log10(mse));
}

/// Per-frame PSNR (unit peak) averaged in dB over every frame of every cube in the group.
inline QualityReport psnr(std::span<const Cube> estimate, std::span<const Cube> truth)
{
  require(estimate.size() == truth.size(), "video groups differ in measurement count");
  QualityReport report;
  double total_sq = 0.0;
  std::size_t total_px = 0;
  for (std::size_t g = 0; g < estimate.size(); ++g) {
    require(estimate[g].same_shape(truth[g]), "cube " + std::to_string(g) + " shapes differ");
    for (std::size_t b = 0; b < estimate[g].depth(); ++b) {
      const auto e = estimate[g].frame(b);
      const auto t = truth[g].frame(b);
      double sq = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double d = e[i] - t[i];
        sq += d * d;
      }
      total_sq += sq;
      total_px += e.size();
      report.per_frame_psnr.push_back(frame_psnr(sq / static_cast<double>(e.size())));
    }
  }
  require(!report.per_frame_psnr.empty(), "psnr of an empty video group");
  double sum = 0.0;
  for (double p : report.per_frame_psnr) sum += p;
  report.psnr_db = sum / static_cast<double>(report.per_frame_psnr.size());
  report.mse = total_px > 0 ? total_sq / static_cast<double>(total_px) : 0.0;
  return report;
}

inline QualityReport psnr(const Cube & estimate, const Cube & truth)
{
  return psnr(std::span<const Cube>(&estimate, 1), std::span<const Cube>(&truth, 1));
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_RECONSTRUCT_HPP
