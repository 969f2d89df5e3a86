// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit RGB images and the pixel-level preprocessing steps: orientation
// correction, bilinear resize, letterboxing, Gaussian blur.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lensinspect/error.hpp"
#include "lensinspect/geometry.hpp"
#include "lensinspect/tensor.hpp"

namespace lensinspect {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  std::uint8_t at(int x, int y, int c) const { return pixels[index(x, y) + static_cast<std::size_t>(c)]; }
  std::uint8_t& at(int x, int y, int c) { return pixels[index(x, y) + static_cast<std::size_t>(c)]; }

  friend bool operator==(const Image&, const Image&) = default;
};

inline std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// Applies an EXIF orientation tag (1-8) so the result displays upright.
/// Unknown tags leave the image untouched and append a warning.
inline Image auto_orient(const Image& src, int tag, std::vector<std::string>* warnings = nullptr) {
  if (tag < 1 || tag > 8) {
    if (warnings) warnings->push_back("unknown orientation tag " + std::to_string(tag) + ", treated as 1");
    tag = 1;
  }
  if (tag == 1) return src;
  const int w = src.width, h = src.height;
  const bool swap = tag >= 5;
  Image out(swap ? h : w, swap ? w : h);
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      int sx = ox, sy = oy;
      switch (tag) {
        case 2: sx = w - 1 - ox; break;                         // mirror horizontal
        case 3: sx = w - 1 - ox; sy = h - 1 - oy; break;        // rotate 180
        case 4: sy = h - 1 - oy; break;                         // mirror vertical
        case 5: sx = oy; sy = ox; break;                        // transpose
        case 6: sx = oy; sy = h - 1 - ox; break;                // rotate 90 CW
        case 7: sx = w - 1 - oy; sy = h - 1 - ox; break;        // transverse
        case 8: sx = w - 1 - oy; sy = ox; break;                // rotate 90 CCW
        default: break;
      }
      for (int c = 0; c < 3; ++c) out.at(ox, oy, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

/// Bilinear sample at continuous pixel coordinates (pixel centers at
/// integers). Neighbours outside the image read as black.
inline void sample_bilinear(const Image& img, double x, double y, double rgb[3]) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double ax = x - fx, ay = y - fy;
  rgb[0] = rgb[1] = rgb[2] = 0.0;
  const int xs[2] = {x0, x0 + 1};
  const int ys[2] = {y0, y0 + 1};
  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};
  for (int j = 0; j < 2; ++j) {
    if (ys[j] < 0 || ys[j] >= img.height || wy[j] == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      if (xs[i] < 0 || xs[i] >= img.width || wx[i] == 0.0) continue;
      const double wgt = wx[i] * wy[j];
      for (int c = 0; c < 3; ++c) rgb[c] += wgt * img.at(xs[i], ys[j], c);
    }
  }
}

/// Bilinear resize with half-pixel centers and edge clamping.
inline Image resize_bilinear(const Image& src, int new_w, int new_h) {
  if (src.empty() || new_w <= 0 || new_h <= 0) throw ArgumentError("resize_bilinear: empty image or target");
  if (new_w == src.width && new_h == src.height) return src;
  Image out(new_w, new_h);
  const double kx = static_cast<double>(src.width) / new_w;
  const double ky = static_cast<double>(src.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    const double sy = std::clamp((y + 0.5) * ky - 0.5, 0.0, static_cast<double>(src.height - 1));
    for (int x = 0; x < new_w; ++x) {
      const double sx = std::clamp((x + 0.5) * kx - 0.5, 0.0, static_cast<double>(src.width - 1));
      double rgb[3];
      sample_bilinear(src, sx, sy, rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_u8(rgb[c]);
    }
  }
  return out;
}

/// Aspect-preserving resize onto a black target x target canvas.
inline std::pair<Image, LetterboxTransform> letterbox(const Image& src, int target = 640) {
  if (src.empty()) throw ArgumentError("letterbox: empty image");
  const LetterboxTransform t = make_letterbox_transform(src.width, src.height, target);
  const Image content = resize_bilinear(src, t.content_w, t.content_h);
  Image canvas(target, target, 0);
  for (int y = 0; y < t.content_h; ++y) {
    std::copy_n(content.pixels.begin() + static_cast<std::ptrdiff_t>(content.index(0, y)),
                static_cast<std::size_t>(t.content_w) * 3,
                canvas.pixels.begin() + static_cast<std::ptrdiff_t>(canvas.index(t.pad_left, t.pad_top + y)));
  }
  return {std::move(canvas), t};
}

/// (1, 3, H, W) tensor with values scaled into [0, 1].
inline Tensor to_tensor(const Image& img) {
  Tensor t(Shape{1, 3, static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width)});
  for (int c = 0; c < 3; ++c) {
    float* plane = t.plane(0, static_cast<std::size_t>(c));
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)] =
            static_cast<float>(img.at(x, y, c)) / 255.0f;
      }
    }
  }
  return t;
}

/// Normalized 1-D Gaussian of size 2*ceil(3*sigma)+1. sigma == 0 gives {1}.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (sigma < 0) throw ArgumentError("gaussian_kernel: sigma must be >= 0");
  if (sigma == 0) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + r)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Reflect-101 index (mirror without repeating the edge pixel).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

/// Separable Gaussian blur: horizontal pass then vertical pass, reflective
/// borders, rounding once at the end.
inline Image gaussian_blur(const Image& src, double sigma) {
  const auto k = gaussian_kernel(sigma);
  if (k.size() == 1) return src;
  const int r = static_cast<int>(k.size() / 2);
  const int w = src.width, h = src.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * src.at(reflect_index(x + i, w), y, c);
        tmp[src.index(x, y) + static_cast<std::size_t>(c)] = acc;
      }
    }
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) {
          acc += k[static_cast<std::size_t>(i + r)] * tmp[src.index(x, reflect_index(y + i, h)) + static_cast<std::size_t>(c)];
        }
        out.at(x, y, c) = to_u8(acc);
      }
    }
  }
  return out;
}

}  // namespace lensinspect
