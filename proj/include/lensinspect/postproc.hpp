// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Raw head logits -> final boxes: anchor grid, DFL expectation, sigmoid
// scoring, confidence filter, per-class greedy NMS, letterbox inversion.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "lensinspect/error.hpp"
#include "lensinspect/geometry.hpp"
#include "lensinspect/netgraph.hpp"

namespace lensinspect {

struct GridLevel {
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t stride = 0;
};

struct AnchorPoint {
  double cx = 0;  // grid units, cell center
  double cy = 0;
  std::size_t stride = 0;
};

/// Cell-center anchors, row-major within a level, levels in the given order.
inline std::vector<AnchorPoint> make_anchors(std::span<const GridLevel> levels) {
  std::vector<AnchorPoint> out;
  std::size_t total = 0;
  for (const auto& l : levels) total += l.h * l.w;
  out.reserve(total);
  for (const auto& l : levels) {
    for (std::size_t j = 0; j < l.h; ++j) {
      for (std::size_t i = 0; i < l.w; ++i) out.push_back({i + 0.5, j + 0.5, l.stride});
    }
  }
  return out;
}

inline std::vector<GridLevel> grid_levels(std::size_t input_h, std::size_t input_w) {
  return {{input_h / 8, input_w / 8, 8}, {input_h / 16, input_w / 16, 16}, {input_h / 32, input_w / 32, 32}};
}

struct SideDistances {
  double left = 0, top = 0, right = 0, bottom = 0;
};

/// Expected bin index of one side's softmax distribution.
inline double dfl_side(std::span<const float> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0, acc = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double e = std::exp(static_cast<double>(logits[k]) - m);
    z += e;
    acc += static_cast<double>(k) * e;
  }
  return acc / z;
}

/// `logits` holds 4 * reg_max values laid out side-major (l, t, r, b).
inline SideDistances dfl_expectation(std::span<const float> logits, std::size_t reg_max) {
  if (reg_max == 0 || logits.size() != 4 * reg_max) {
    throw ShapeError("dfl_expectation: expected " + std::to_string(4 * reg_max) + " logits, got " +
                     std::to_string(logits.size()));
  }
  return {dfl_side(logits.subspan(0, reg_max)), dfl_side(logits.subspan(reg_max, reg_max)),
          dfl_side(logits.subspan(2 * reg_max, reg_max)), dfl_side(logits.subspan(3 * reg_max, reg_max))};
}

/// Logits whose softmax expectation is `distance` (two-bin mixture around it).
/// Inverse of dfl_side for distance in [0, reg_max - 1].
inline std::vector<float> encode_distance(double distance, std::size_t reg_max) {
  constexpr float kOff = -30.0f;
  distance = std::clamp(distance, 0.0, static_cast<double>(reg_max - 1));
  std::vector<float> logits(reg_max, kOff);
  const auto lo = static_cast<std::size_t>(std::floor(distance));
  const double frac = distance - static_cast<double>(lo);
  if (lo + 1 >= reg_max || frac <= 0.0) {
    logits[lo] = 0.0f;
    return logits;
  }
  logits[lo] = static_cast<float>(std::max<double>(kOff, std::log(1.0 - frac)));
  logits[lo + 1] = static_cast<float>(std::max<double>(kOff, std::log(frac)));
  return logits;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Emits one box per (anchor, class) whose sigmoid score reaches the
/// threshold. Boxes are in network-input pixels and are not clipped.
inline std::vector<DetectionBox> decode(const FeaturePyramid& pyr, double conf_threshold) {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw ArgumentError("decode: confidence threshold must lie in [0, 1]");
  }
  const std::size_t reg_max = pyr.reg_max;
  const std::size_t nc = pyr.num_classes;
  const std::size_t input_h = pyr.p3.shape().h * 8;
  std::vector<DetectionBox> out;
  std::vector<float> box_logits(4 * reg_max);
  for (const Tensor* level : pyr.levels()) {
    const Shape& s = level->shape();
    if (s.c != 4 * reg_max + nc) {
      throw ShapeError("decode: head map " + s.str() + " needs " + std::to_string(4 * reg_max + nc) + " channels");
    }
    if (s.h == 0) continue;
    const double stride = static_cast<double>(input_h) / static_cast<double>(s.h);
    for (std::size_t j = 0; j < s.h; ++j) {
      for (std::size_t i = 0; i < s.w; ++i) {
        bool any = false;
        for (std::size_t c = 0; c < nc && !any; ++c) any = sigmoid(level->at(0, 4 * reg_max + c, j, i)) >= conf_threshold;
        if (!any) continue;
        for (std::size_t k = 0; k < 4 * reg_max; ++k) box_logits[k] = level->at(0, k, j, i);
        const SideDistances d = dfl_expectation(box_logits, reg_max);
        const double cx = i + 0.5, cy = j + 0.5;
        for (std::size_t c = 0; c < nc; ++c) {
          const double score = sigmoid(level->at(0, 4 * reg_max + c, j, i));
          if (score < conf_threshold) continue;
          out.push_back({(cx - d.left) * stride, (cy - d.top) * stride, (cx + d.right) * stride,
                         (cy + d.bottom) * stride, static_cast<int>(c), score});
        }
      }
    }
  }
  return out;
}

/// Total order used for ranking: confidence descending, then class id, then
/// box coordinates lexicographically ascending.
inline bool ranks_before(const DetectionBox& a, const DetectionBox& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return std::tie(a.class_id, a.x1, a.y1, a.x2, a.y2) < std::tie(b.class_id, b.x1, b.y1, b.x2, b.y2);
}

/// Per-class greedy NMS: keep the best-ranked box, drop same-class boxes
/// with IoU above the threshold, repeat.
inline std::vector<DetectionBox> nms(std::vector<DetectionBox> boxes, double iou_threshold) {
  std::sort(boxes.begin(), boxes.end(), ranks_before);
  std::vector<DetectionBox> kept;
  std::vector<bool> removed(boxes.size(), false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (removed[i]) continue;
    kept.push_back(boxes[i]);
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (!removed[j] && boxes[j].class_id == boxes[i].class_id && iou(boxes[i], boxes[j]) > iou_threshold) {
        removed[j] = true;
      }
    }
  }
  return kept;
}

/// Maps network-input boxes back to original pixels, clipping to the image
/// and dropping boxes that collapse to zero area.
inline std::vector<DetectionBox> unletterbox(std::span<const DetectionBox> boxes, const LetterboxTransform& t) {
  std::vector<DetectionBox> out;
  out.reserve(boxes.size());
  const double W = t.original_w, H = t.original_h;
  for (DetectionBox b : boxes) {
    b.x1 = std::clamp((b.x1 - t.pad_left) / t.scale, 0.0, W);
    b.x2 = std::clamp((b.x2 - t.pad_left) / t.scale, 0.0, W);
    b.y1 = std::clamp((b.y1 - t.pad_top) / t.scale, 0.0, H);
    b.y2 = std::clamp((b.y2 - t.pad_top) / t.scale, 0.0, H);
    if (!is_degenerate(b)) out.push_back(b);
  }
  return out;
}

/// Original pixels -> network-input pixels (no clipping).
template <CornerBox B>
B to_letterbox(B b, const LetterboxTransform& t) {
  b.x1 = b.x1 * t.scale + t.pad_left;
  b.x2 = b.x2 * t.scale + t.pad_left;
  b.y1 = b.y1 * t.scale + t.pad_top;
  b.y2 = b.y2 * t.scale + t.pad_top;
  return b;
}

struct PostprocessConfig {
  double conf_threshold = 0.25;
  double nms_iou = 0.45;
  std::size_t max_detections = 300;
};

inline std::vector<DetectionBox> postprocess(const FeaturePyramid& pyr, const LetterboxTransform& t,
                                             const PostprocessConfig& cfg) {
  if (!(cfg.nms_iou >= 0.0 && cfg.nms_iou <= 1.0)) throw ArgumentError("postprocess: NMS IoU must lie in [0, 1]");
  auto kept = nms(decode(pyr, cfg.conf_threshold), cfg.nms_iou);
  if (kept.size() > cfg.max_detections) kept.resize(cfg.max_detections);
  return unletterbox(kept, t);
}

}  // namespace lensinspect
