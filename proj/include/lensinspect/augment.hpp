// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Normalized center-form annotations and the box-aware geometric
// augmentations (rotate, flip, shift) plus Gaussian blur.
//
// Annotation coordinates are kept on a dyadic grid (multiples of 2^-30) so
// mirroring x -> 1 - x is exact and flipping twice restores every value bit
// for bit.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "lensinspect/image.hpp"
#include "lensinspect/rng.hpp"

namespace lensinspect {

struct Annotation {
  int class_id = 0;
  double cx = 0, cy = 0, w = 0, h = 0;  // normalized to image size

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline double snap_unit(double v) {
  constexpr double kGrid = 0x1.0p30;
  return std::round(v * kGrid) / kGrid;
}

/// Builds an annotation from normalized edges, clipped to [0, 1]. Empty
/// when the clipped box has no area.
inline std::optional<Annotation> annotation_from_edges(int class_id, double x1, double y1, double x2, double y2) {
  x1 = snap_unit(std::clamp(x1, 0.0, 1.0));
  x2 = snap_unit(std::clamp(x2, 0.0, 1.0));
  y1 = snap_unit(std::clamp(y1, 0.0, 1.0));
  y2 = snap_unit(std::clamp(y2, 0.0, 1.0));
  if (!(x2 > x1 && y2 > y1)) return std::nullopt;
  return Annotation{class_id, (x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1};
}

/// Annotation invariants: positive size, fully inside the unit square.
inline bool is_valid(const Annotation& a) {
  return a.w > 0 && a.h > 0 && a.cx - a.w / 2 >= 0 && a.cx + a.w / 2 <= 1 && a.cy - a.h / 2 >= 0 &&
         a.cy + a.h / 2 <= 1;
}

inline Rect to_pixels(const Annotation& a, int width, int height) {
  return {(a.cx - a.w / 2) * width, (a.cy - a.h / 2) * height, (a.cx + a.w / 2) * width,
          (a.cy + a.h / 2) * height};
}

struct AugmentOptions {
  double min_visible = 0.25;  // boxes keeping less of their area after clipping are dropped
};

namespace detail {

// Clips an unclipped pixel box; drops it when the visible fraction is too small.
inline std::optional<Annotation> clip_or_drop(int class_id, Rect r, int width, int height, double min_visible) {
  const double full = box_area(r);
  Rect c{std::clamp(r.x1, 0.0, static_cast<double>(width)), std::clamp(r.y1, 0.0, static_cast<double>(height)),
         std::clamp(r.x2, 0.0, static_cast<double>(width)), std::clamp(r.y2, 0.0, static_cast<double>(height))};
  if (full <= 0 || box_area(c) < min_visible * full) return std::nullopt;
  return annotation_from_edges(class_id, c.x1 / width, c.y1 / height, c.x2 / width, c.y2 / height);
}

}  // namespace detail

using AugmentResult = std::pair<Image, std::vector<Annotation>>;

/// Rotates about the image center by `degrees` with the matrix
/// [[cos, -sin], [sin, cos]] in pixel coordinates (y down, so positive angles
/// turn clockwise on screen). Canvas size is kept and uncovered area is
/// black. Each box becomes the axis-aligned hull of its rotated corners.
inline AugmentResult rotate(const Image& img, const std::vector<Annotation>& anns, double degrees,
                            const AugmentOptions& opt = {}) {
  if (degrees < -180.0 || degrees > 180.0) throw ArgumentError("rotate: angle must lie in [-180, 180]");
  if (degrees == 0.0) return {img, anns};
  const double th = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(th), sn = std::sin(th);
  const double cx = img.width / 2.0, cy = img.height / 2.0;

  Image out(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Inverse rotation of the output pixel center.
      const double qx = x + 0.5 - cx, qy = y + 0.5 - cy;
      const double px = cs * qx + sn * qy + cx, py = -sn * qx + cs * qy + cy;
      if (px < 0 || py < 0 || px > img.width || py > img.height) continue;
      double rgb[3];
      sample_bilinear(img, px - 0.5, py - 0.5, rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_u8(rgb[c]);
    }
  }

  std::vector<Annotation> result;
  for (const auto& a : anns) {
    const Rect r = to_pixels(a, img.width, img.height);
    const double xs[4] = {r.x1, r.x2, r.x2, r.x1};
    const double ys[4] = {r.y1, r.y1, r.y2, r.y2};
    Rect hull{1e300, 1e300, -1e300, -1e300};
    for (int i = 0; i < 4; ++i) {
      const double dx = xs[i] - cx, dy = ys[i] - cy;
      const double rx = cs * dx - sn * dy + cx, ry = sn * dx + cs * dy + cy;
      hull.x1 = std::min(hull.x1, rx);
      hull.y1 = std::min(hull.y1, ry);
      hull.x2 = std::max(hull.x2, rx);
      hull.y2 = std::max(hull.y2, ry);
    }
    if (auto b = detail::clip_or_drop(a.class_id, hull, img.width, img.height, opt.min_visible)) result.push_back(*b);
  }
  return {std::move(out), std::move(result)};
}

enum class FlipAxis { none, horizontal, vertical };

inline AugmentResult flip(const Image& img, const std::vector<Annotation>& anns, FlipAxis axis) {
  if (axis == FlipAxis::none) return {img, anns};
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sx = axis == FlipAxis::horizontal ? img.width - 1 - x : x;
      const int sy = axis == FlipAxis::vertical ? img.height - 1 - y : y;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  std::vector<Annotation> result = anns;
  for (auto& a : result) {
    if (axis == FlipAxis::horizontal) a.cx = 1.0 - a.cx;
    if (axis == FlipAxis::vertical) a.cy = 1.0 - a.cy;
  }
  return {std::move(out), std::move(result)};
}

/// Pixel offsets actually applied for fractional shifts (sx, sy).
inline std::pair<int, int> shift_pixels(const Image& img, double sx, double sy) {
  return {static_cast<int>(std::lround(sx * img.width)), static_cast<int>(std::lround(sy * img.height))};
}

/// Translates by (sx * width, sy * height) pixels (rounded), black fill.
inline AugmentResult shift(const Image& img, const std::vector<Annotation>& anns, double sx, double sy,
                           const AugmentOptions& opt = {}) {
  if (std::abs(sx) > 0.5 || std::abs(sy) > 0.5) throw ArgumentError("shift: |Sx| and |Sy| must be <= 0.5");
  const auto [dx, dy] = shift_pixels(img, sx, sy);
  if (dx == 0 && dy == 0) return {img, anns};
  Image out(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    const int src_y = y - dy;
    if (src_y < 0 || src_y >= img.height) continue;
    for (int x = 0; x < img.width; ++x) {
      const int src_x = x - dx;
      if (src_x < 0 || src_x >= img.width) continue;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(src_x, src_y, c);
    }
  }
  std::vector<Annotation> result;
  for (const auto& a : anns) {
    Rect r = to_pixels(a, img.width, img.height);
    r.x1 += dx;
    r.x2 += dx;
    r.y1 += dy;
    r.y2 += dy;
    if (auto b = detail::clip_or_drop(a.class_id, r, img.width, img.height, opt.min_visible)) result.push_back(*b);
  }
  return {std::move(out), std::move(result)};
}

struct AugmentSpec {
  double rotation_degrees = 0;
  FlipAxis flip = FlipAxis::none;
  double shift_x = 0;  // fraction of width
  double shift_y = 0;  // fraction of height
  double blur_sigma = 0;
  std::uint64_t seed = 0;
};

/// Applies rotate, flip, shift, blur in that order.
inline AugmentResult apply(const Image& img, const std::vector<Annotation>& anns, const AugmentSpec& spec,
                           const AugmentOptions& opt = {}) {
  if (spec.blur_sigma < 0) throw ArgumentError("augment: blur sigma must be >= 0");
  auto r = rotate(img, anns, spec.rotation_degrees, opt);
  r = flip(r.first, r.second, spec.flip);
  r = shift(r.first, r.second, spec.shift_x, spec.shift_y, opt);
  r.first = gaussian_blur(r.first, spec.blur_sigma);
  return r;
}

/// Sampling ranges for dataset scaling; each variant draws one AugmentSpec.
struct AugmentPolicy {
  double max_rotation = 180.0;
  double flip_probability = 0.5;  // per axis choice: none / horizontal / vertical
  double max_shift = 0.15;
  double blur_probability = 0.3;
  double max_blur_sigma = 1.5;
  AugmentOptions options;
};

inline AugmentSpec sample_spec(const AugmentPolicy& p, std::uint64_t seed) {
  Rng rng(seed);
  AugmentSpec s;
  s.seed = seed;
  s.rotation_degrees = rng.uniform(-p.max_rotation, p.max_rotation);
  if (rng.coin(p.flip_probability)) s.flip = rng.coin() ? FlipAxis::horizontal : FlipAxis::vertical;
  s.shift_x = rng.uniform(-p.max_shift, p.max_shift);
  s.shift_y = rng.uniform(-p.max_shift, p.max_shift);
  if (rng.coin(p.blur_probability)) s.blur_sigma = rng.uniform(0.0, p.max_blur_sigma);
  return s;
}

}  // namespace lensinspect
