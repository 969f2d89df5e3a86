// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>

namespace lensinspect {

// Anything with corner-form x1, y1, x2, y2 members.
template <typename T>
concept CornerBox = requires(const T& b) {
  { b.x1 } -> std::convertible_to<double>;
  { b.y1 } -> std::convertible_to<double>;
  { b.x2 } -> std::convertible_to<double>;
  { b.y2 } -> std::convertible_to<double>;
};

struct Rect {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

/// One predicted object in pixel coordinates.
struct DetectionBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  int class_id = 0;
  double confidence = 0;

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

template <CornerBox B>
double box_area(const B& b) {
  const double w = static_cast<double>(b.x2) - static_cast<double>(b.x1);
  const double h = static_cast<double>(b.y2) - static_cast<double>(b.y1);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

template <CornerBox B>
bool is_degenerate(const B& b) {
  return !(b.x2 > b.x1 && b.y2 > b.y1);
}

struct IouDiagnostics {
  std::size_t degenerate = 0;  // IoU calls that saw a zero-area box
};

/// Intersection over union; 0 for disjoint boxes and for any zero-area box.
template <CornerBox A, CornerBox B>
double iou(const A& a, const B& b, IouDiagnostics* diag = nullptr) {
  if (is_degenerate(a) || is_degenerate(b)) {
    if (diag) ++diag->degenerate;
    return 0.0;
  }
  const double iw = std::min<double>(a.x2, b.x2) - std::max<double>(a.x1, b.x1);
  const double ih = std::min<double>(a.y2, b.y2) - std::max<double>(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (box_area(a) + box_area(b) - inter);
}

/// Scale + pad record mapping original image pixels to network-input pixels:
///   input = original * scale + pad.
struct LetterboxTransform {
  double scale = 1.0;
  int pad_left = 0;
  int pad_top = 0;
  int target_w = 640;
  int target_h = 640;
  int original_w = 640;
  int original_h = 640;
  int content_w = 640;  // resized image extent inside the canvas
  int content_h = 640;
};

inline LetterboxTransform make_letterbox_transform(int width, int height, int target = 640) {
  LetterboxTransform t;
  t.original_w = width;
  t.original_h = height;
  t.target_w = t.target_h = target;
  t.scale = std::min(static_cast<double>(target) / width, static_cast<double>(target) / height);
  t.content_w = std::clamp(static_cast<int>(std::lround(width * t.scale)), 1, target);
  t.content_h = std::clamp(static_cast<int>(std::lround(height * t.scale)), 1, target);
  t.pad_left = (target - t.content_w) / 2;
  t.pad_top = (target - t.content_h) / 2;
  return t;
}

}  // namespace lensinspect
