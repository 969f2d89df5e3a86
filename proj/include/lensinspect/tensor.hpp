// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Dense NCHW float tensor and the handful of primitives the detector needs.
// Every primitive is deterministic: conv2d accumulates each output element in
// the fixed order (input channel, kernel row, kernel col) and adds the bias
// last, independent of how many worker threads are used.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lensinspect/error.hpp"

namespace lensinspect {

struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t numel() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    std::ostringstream os;
    os << '(' << n << ',' << c << ',' << h << ',' << w << ')';
    return os.str();
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(shape), data_(shape.numel(), 0.0f) {}
  Tensor(Shape shape, float fill) : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  float at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[offset(n, c, y, x)];
  }
  float& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[offset(n, c, y, x)];
  }

  // Pointer to the (n, c) spatial plane.
  const float* plane(std::size_t n, std::size_t c) const { return data_.data() + offset(n, c, 0, 0); }
  float* plane(std::size_t n, std::size_t c) { return data_.data() + offset(n, c, 0, 0); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_{};
  std::vector<float> data_;
};

struct Window2d {
  std::size_t h = 1;
  std::size_t w = 1;
};

struct ConvParams {
  Tensor weights;             // (out_channels, in_channels, kh, kw)
  std::vector<float> bias;    // out_channels entries, or empty for no bias
  Window2d stride{1, 1};
  Window2d padding{0, 0};

  std::size_t out_channels() const { return weights.shape().n; }
  std::size_t in_channels() const { return weights.shape().c; }
  Window2d kernel() const { return {weights.shape().h, weights.shape().w}; }
};

struct ExecConfig {
  unsigned threads = 1;
};

namespace detail {

inline std::size_t pooled_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p,
                                 const char* op) {
  if (s == 0) throw ShapeError(std::string(op) + ": stride must be positive");
  if (in + 2 * p < k) {
    throw ShapeError(std::string(op) + ": kernel " + std::to_string(k) +
                     " larger than padded extent " + std::to_string(in + 2 * p));
  }
  return (in + 2 * p - k) / s + 1;
}

// Runs fn(begin, end) over [0, count) split into at most `threads` chunks.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline Shape conv_output_shape(const Shape& in, const ConvParams& p) {
  const auto k = p.kernel();
  return {in.n, p.out_channels(),
          detail::pooled_extent(in.h, k.h, p.stride.h, p.padding.h, "conv2d"),
          detail::pooled_extent(in.w, k.w, p.stride.w, p.padding.w, "conv2d")};
}


namespace detail {

// dst[x] += rows[k][x * S] * w[k] for k = 0..n-1 in order.
template <std::size_t S>
inline void accumulate_taps(float* dst, std::size_t width, const float* const* rows, const float* w, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const float* r0 = rows[k];
    const float* r1 = rows[k + 1];
    const float* r2 = rows[k + 2];
    const float* r3 = rows[k + 3];
    const float w0 = w[k], w1 = w[k + 1], w2 = w[k + 2], w3 = w[k + 3];
    for (std::size_t x = 0; x < width; ++x) {
      float v = dst[x];
      v += r0[x * S] * w0;
      v += r1[x * S] * w1;
      v += r2[x * S] * w2;
      v += r3[x * S] * w3;
      dst[x] = v;
    }
  }
  for (; k < n; ++k) {
    const float* r = rows[k];
    const float wk = w[k];
    for (std::size_t x = 0; x < width; ++x) dst[x] += r[x * S] * wk;
  }
}

}  // namespace detail

/// 2-D cross-correlation with zero padding.
///
/// Accumulation per output element runs over (input channel, kernel row,
/// kernel col) in that order starting from zero; the bias is added last.
/// Work is split across output channels, so the result is bit-identical for
/// any `cfg.threads`.
inline Tensor conv2d(const Tensor& input, const ConvParams& p, ExecConfig cfg = {}) {
  const Shape& is = input.shape();
  if (p.weights.shape().c != is.c) {
    throw ShapeError("conv2d: input " + is.str() + " has " + std::to_string(is.c) +
                     " channels but weights " + p.weights.shape().str() + " expect " +
                     std::to_string(p.weights.shape().c));
  }
  if (!p.bias.empty() && p.bias.size() != p.out_channels()) {
    throw ShapeError("conv2d: bias length " + std::to_string(p.bias.size()) +
                     " does not match weights " + p.weights.shape().str());
  }
  const Shape os = conv_output_shape(is, p);
  Tensor out(os);
  const auto [kh, kw] = p.kernel();
  const auto [sh, sw] = p.stride;
  const auto [ph, pw] = p.padding;

  // Zero-padded copy of the input, so every kernel tap reads in bounds.
  // Adding the padded zeros leaves each sum unchanged: accumulators start at
  // +0 and x + 0 == x for every other x.
  const std::size_t pw_h = is.h + 2 * ph, pw_w = is.w + 2 * pw;
  std::vector<float> padded(is.n * is.c * pw_h * pw_w, 0.0f);
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t ci = 0; ci < is.c; ++ci) {
      const float* src = input.plane(n, ci);
      float* dst = padded.data() + (n * is.c + ci) * pw_h * pw_w;
      for (std::size_t y = 0; y < is.h; ++y) {
        std::copy_n(src + y * is.w, is.w, dst + (y + ph) * pw_w + pw);
      }
    }
  }
  const float* wbase = p.weights.data().data();
  const std::size_t taps = is.c * kh * kw;
  const std::size_t ow = os.w;

  // One output row at a time so the accumulator row stays in cache. Taps
  // are applied in (ci, ky, kx) order, four per pass over the row.
  for (std::size_t n = 0; n < is.n; ++n) {
    const float* pin = padded.data() + n * is.c * pw_h * pw_w;
    detail::parallel_for(os.c, cfg.threads, [&](std::size_t co_begin, std::size_t co_end) {
      std::vector<const float*> rows(taps);
      for (std::size_t co = co_begin; co < co_end; ++co) {
        float* acc = out.plane(n, co);
        const float* w = wbase + co * taps;
        for (std::size_t oy = 0; oy < os.h; ++oy) {
          float* dst = acc + oy * ow;
          std::size_t t = 0;
          for (std::size_t ci = 0; ci < is.c; ++ci) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const float* row = pin + (ci * pw_h + oy * sh + ky) * pw_w;
              for (std::size_t kx = 0; kx < kw; ++kx) rows[t++] = row + kx;
            }
          }
          if (sw == 1) {
            detail::accumulate_taps<1>(dst, ow, rows.data(), w, taps);
          } else if (sw == 2) {
            detail::accumulate_taps<2>(dst, ow, rows.data(), w, taps);
          } else {
            for (std::size_t k = 0; k < taps; ++k) {
              for (std::size_t ox = 0; ox < ow; ++ox) dst[ox] += rows[k][ox * sw] * w[k];
            }
          }
        }
        if (!p.bias.empty()) {
          const float b = p.bias[co];
          for (std::size_t i = 0; i < os.plane(); ++i) acc[i] += b;
        }
      }
    });
  }
  return out;
}

struct BatchNormParams {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> mean;
  std::vector<float> var;
  float eps = 1e-3f;

  std::size_t channels() const { return gamma.size(); }
};

inline void validate(const BatchNormParams& bn, std::size_t channels) {
  if (!(bn.eps > 0.0f)) throw ArgumentError("batchnorm: eps must be positive");
  if (bn.gamma.size() != channels || bn.beta.size() != channels || bn.mean.size() != channels ||
      bn.var.size() != channels) {
    throw ShapeError("batchnorm: parameter lengths (" + std::to_string(bn.gamma.size()) + "," +
                     std::to_string(bn.beta.size()) + "," + std::to_string(bn.mean.size()) + "," +
                     std::to_string(bn.var.size()) + ") do not match channel count " +
                     std::to_string(channels));
  }
  for (float v : bn.var) {
    if (!(v >= 0.0f)) throw ArgumentError("batchnorm: running variance must be non-negative");
  }
}

inline Tensor batchnorm(const Tensor& input, const BatchNormParams& bn) {
  const Shape& s = input.shape();
  validate(bn, s.c);
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float inv = 1.0f / std::sqrt(bn.var[c] + bn.eps);
      const float g = bn.gamma[c], b = bn.beta[c], m = bn.mean[c];
      const float* src = input.plane(n, c);
      float* dst = out.plane(n, c);
      for (std::size_t i = 0; i < s.plane(); ++i) dst[i] = g * (src[i] - m) * inv + b;
    }
  }
  return out;
}

inline float silu(float x) { return x / (1.0f + std::exp(-x)); }

inline Tensor silu(const Tensor& input) {
  std::vector<float> v(input.data().begin(), input.data().end());
  for (auto& x : v) x = silu(x);
  return Tensor(input.shape(), std::move(v));
}

/// Max pooling; padded positions never win (they act as -infinity).
inline Tensor maxpool2d(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding) {
  const Shape& s = input.shape();
  const Shape os{s.n, s.c, detail::pooled_extent(s.h, kernel, stride, padding, "maxpool2d"),
                 detail::pooled_extent(s.w, kernel, stride, padding, "maxpool2d")};
  Tensor out(os);
  const auto P = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* src = input.plane(n, c);
      float* dst = out.plane(n, c);
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - P;
        const std::ptrdiff_t ylo = std::max<std::ptrdiff_t>(0, y0);
        const std::ptrdiff_t yhi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(s.h), y0 + static_cast<std::ptrdiff_t>(kernel));
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - P;
          const std::ptrdiff_t xlo = std::max<std::ptrdiff_t>(0, x0);
          const std::ptrdiff_t xhi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(s.w), x0 + static_cast<std::ptrdiff_t>(kernel));
          float m = -std::numeric_limits<float>::infinity();
          for (std::ptrdiff_t y = ylo; y < yhi; ++y) {
            for (std::ptrdiff_t x = xlo; x < xhi; ++x) m = std::max(m, src[y * static_cast<std::ptrdiff_t>(s.w) + x]);
          }
          dst[oy * os.w + ox] = m;
        }
      }
    }
  }
  return out;
}

inline Tensor upsample_nearest2x(const Tensor& input) {
  const Shape& s = input.shape();
  const Shape os{s.n, s.c, s.h * 2, s.w * 2};
  Tensor out(os);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const float* src = input.plane(n, c);
      float* dst = out.plane(n, c);
      for (std::size_t y = 0; y < os.h; ++y) {
        for (std::size_t x = 0; x < os.w; ++x) dst[y * os.w + x] = src[(y / 2) * s.w + x / 2];
      }
    }
  }
  return out;
}

inline Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& first = parts.front()->shape();
  std::size_t channels = 0;
  for (const Tensor* t : parts) {
    const Shape& s = t->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: " + s.str() + " does not match " + first.str() +
                       " in batch/spatial extent");
    }
    channels += s.c;
  }
  Tensor out(Shape{first.n, channels, first.h, first.w});
  for (std::size_t n = 0; n < first.n; ++n) {
    std::size_t c0 = 0;
    for (const Tensor* t : parts) {
      const std::size_t count = t->shape().c * first.plane();
      std::copy_n(t->plane(n, 0), count, out.plane(n, c0));
      c0 += t->shape().c;
    }
  }
  return out;
}

inline Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
  return concat_channels(std::span<const Tensor* const>(parts.begin(), parts.size()));
}

inline Tensor concat_channels(const std::vector<Tensor>& parts) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  for (const auto& t : parts) ptrs.push_back(&t);
  return concat_channels(std::span<const Tensor* const>(ptrs));
}

inline std::vector<Tensor> split_channels(const Tensor& input, std::span<const std::size_t> sizes) {
  const Shape& s = input.shape();
  std::size_t total = 0;
  for (auto v : sizes) total += v;
  if (total != s.c) {
    throw ShapeError("split_channels: sizes sum to " + std::to_string(total) + " but input " +
                     s.str() + " has " + std::to_string(s.c) + " channels");
  }
  std::vector<Tensor> parts;
  parts.reserve(sizes.size());
  std::size_t c0 = 0;
  for (auto count : sizes) {
    Tensor part(Shape{s.n, count, s.h, s.w});
    for (std::size_t n = 0; n < s.n; ++n) {
      std::copy_n(input.plane(n, c0), count * s.plane(), part.plane(n, 0));
    }
    parts.push_back(std::move(part));
    c0 += count;
  }
  return parts;
}

inline std::vector<Tensor> split_channels(const Tensor& input, std::initializer_list<std::size_t> sizes) {
  return split_channels(input, std::span<const std::size_t>(sizes.begin(), sizes.size()));
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape " + a.shape().str() + " vs " + b.shape().str());
  }
  std::vector<float> v(a.size());
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = da[i] + db[i];
  return Tensor(a.shape(), std::move(v));
}

}  // namespace lensinspect
