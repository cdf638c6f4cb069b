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

#ifndef ADAPTIVE_SCI_DETECT_HPP
#define ADAPTIVE_SCI_DETECT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "adaptive_sci/errors.hpp"
#include "adaptive_sci/geometry.hpp"
#include "adaptive_sci/image.hpp"
#include "adaptive_sci/sci_forward.hpp"

namespace adaptive_sci
{
struct Detection
{
  BoundingBox box;
  double confidence = 0.0;
};

struct DetectorConfig
{
  double threshold = 0.3;
  std::size_t min_area = 12;
  double iou_threshold = 0.5;

  void validate() const
  {
    require(threshold > 0.0 && threshold < 1.0, "detector.threshold must lie in (0,1)");
    require(min_area >= 1, "detector.min_area must be >= 1");
    require(iou_threshold > 0.0 && iou_threshold <= 1.0, "detector.iou_threshold must lie in (0,1]");
  }
};

/// Median pixel value; the mean of the two middle values for an even count.
inline double median_value(std::span<const double> pixels)
{
  require(!pixels.empty(), "median of an empty image");
  std::vector<double> v(pixels.begin(), pixels.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Foreground = pixels deviating from the median by more than `threshold`;
/// each 4-connected foreground component of at least `min_area` pixels is one
/// detection. Components are reported in raster order of their first pixel.
inline std::vector<Detection> blob_detect(const Image & img, double threshold, std::size_t min_area)
{
  require(threshold > 0.0 && threshold < 1.0, "blob threshold must lie in (0,1)");
  require(min_area >= 1, "blob min_area must be >= 1");
  const std::size_t W = img.width();
  const std::size_t H = img.height();
  const double background = median_value(img.pixels());

  std::vector<std::uint8_t> fg(img.size(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    fg[i] = std::abs(img[i] - background) > threshold ? 1 : 0;
  }

  std::vector<Detection> out;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < img.size(); ++seed) {
    if (fg[seed] != 1) continue;
    fg[seed] = 2;
    stack.assign(1, seed);
    std::size_t area = 0;
    double contrast = 0.0;
    std::size_t x0 = W, y0 = H, x1 = 0, y1 = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % W;
      const std::size_t y = i / W;
      ++area;
      contrast += std::abs(img[i] - background);
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      const auto visit = [&](std::size_t j) {
        if (fg[j] == 1) {
          fg[j] = 2;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < W) visit(i + 1);
      if (y > 0) visit(i - W);
      if (y + 1 < H) visit(i + W);
    }
    if (area < min_area) continue;
    Detection d;
    d.box = {static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0),
             static_cast<std::int64_t>(x1 - x0 + 1), static_cast<std::int64_t>(y1 - y0 + 1)};
    d.confidence = std::min(1.0, contrast / static_cast<double>(area) / (2.0 * threshold));
    out.push_back(d);
  }
  return out;
}

inline std::vector<Detection> blob_detect(
  const NormalizedMeasurement & m, double threshold, std::size_t min_area)
{
  return blob_detect(m.ybar, threshold, min_area);
}

inline double iou(const BoundingBox & a, const BoundingBox & b)
{
  const auto ix = std::max<std::int64_t>(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const auto iy = std::max<std::int64_t>(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const auto inter = ix * iy;
  const auto uni = a.area() + b.area() - inter;
  if (inter == 0 || uni <= 0) {
    return 0.0;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct MatchPair
{
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult
{
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> pairs;
  /// Per detection (input order): true when it was matched.
  std::vector<bool> is_true_positive;
};

/// Processing order: confidence descending, then box x ascending, then y ascending.
inline std::vector<std::size_t> detection_order(std::span<const Detection> dets)
{
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].confidence != dets[b].confidence) return dets[a].confidence > dets[b].confidence;
    if (dets[a].box.x != dets[b].box.x) return dets[a].box.x < dets[b].box.x;
    return dets[a].box.y < dets[b].box.y;
  });
  return order;
}

/// Greedy matching: each detection takes the unmatched ground truth of highest
/// IoU when that IoU exceeds the threshold. A second detection of an already
/// matched ground truth is a false positive.
inline MatchResult match(
  std::span<const Detection> dets, std::span<const BoundingBox> gts, double iou_thresh = 0.5)
{
  require(iou_thresh > 0.0 && iou_thresh <= 1.0, "iou threshold must lie in (0,1]");
  MatchResult r;
  r.is_true_positive.assign(dets.size(), false);
  std::vector<bool> taken(gts.size(), false);
  for (const std::size_t d : detection_order(dets)) {
    double best = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best > iou_thresh) {
      taken[best_gt] = true;
      r.is_true_positive[d] = true;
      r.pairs.push_back({d, best_gt, best});
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = gts.size() - r.tp;
  return r;
}

/// Detections and ground truths of one measurement.
struct DetectionFrame
{
  std::vector<Detection> detections;
  std::vector<BoundingBox> ground_truths;
};

/// All-point interpolated average precision over detections pooled across the
/// batch. With no ground truth at all: 1 when there are also no detections, else 0.
inline double average_precision(std::span<const DetectionFrame> batch, double iou_thresh = 0.5)
{
  struct Scored
  {
    double confidence;
    bool tp;
  };
  std::vector<Scored> pooled;
  std::size_t total_gt = 0;
  for (const auto & frame : batch) {
    const auto m = match(frame.detections, frame.ground_truths, iou_thresh);
    total_gt += frame.ground_truths.size();
    for (const std::size_t d : detection_order(frame.detections)) {
      pooled.push_back({frame.detections[d].confidence, m.is_true_positive[d]});
    }
  }
  if (total_gt == 0) {
    return pooled.empty() ? 1.0 : 0.0;
  }
  if (pooled.empty()) {
    return 0.0;
  }
  std::stable_sort(pooled.begin(), pooled.end(), [](const Scored & a, const Scored & b) {
    return a.confidence > b.confidence;
  });

  std::vector<double> recall(pooled.size());
  std::vector<double> precision(pooled.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    if (pooled[k].tp) ++tp;
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // precision envelope: max precision at any recall >= the current one
  for (std::size_t k = pooled.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

/// Blob detection on each normalized measurement, scored against the
/// per-window ground truth, pooled into one average precision.
inline double detection_rate(
  std::span<const NormalizedMeasurement> batch, std::span<const std::vector<BoundingBox>> gt_windows,
  const DetectorConfig & cfg)
{
  cfg.validate();
  require(batch.size() == gt_windows.size(), "one ground-truth window per measurement required");
  std::vector<DetectionFrame> frames;
  frames.reserve(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    frames.push_back({blob_detect(batch[k], cfg.threshold, cfg.min_area), gt_windows[k]});
  }
  return average_precision(frames, cfg.iou_threshold);
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_DETECT_HPP
