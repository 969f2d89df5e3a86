// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// YOLOv8n detection graph: layer table, parameter layout, forward pass and
// conv+BN fusion.
//
// Block wiring:
//   Conv     k x k conv (pad k/2) -> BN -> SiLU
//   C2f      1x1 Conv to 2c, split [c, c], `repeat` bottlenecks on the second
//            half (two 3x3 Convs, residual add when `shortcut`), concat of
//            all (2 + repeat) branches, 1x1 Conv to `filters`
//            (c = filters / 2, bottleneck expansion 1.0)
//   SPPF     1x1 Conv to in/2, three chained 5x5/1/2 max-pools, concat of
//            the four branches, 1x1 Conv to `filters`
//   Detect   per scale: box branch Conv3x3 -> Conv3x3 -> conv1x1(4*reg_max)
//            and cls branch Conv3x3 -> Conv3x3 -> conv1x1(num_classes);
//            the two branches are concatenated [box, cls] per scale.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lensinspect/error.hpp"
#include "lensinspect/rng.hpp"
#include "lensinspect/tensor.hpp"

namespace lensinspect {

enum class LayerKind { Input, Conv, C2f, SPPF, Upsample, Concat, Detect };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Input: return "Image";
    case LayerKind::Conv: return "Conv";
    case LayerKind::C2f: return "C2f";
    case LayerKind::SPPF: return "SPPF";
    case LayerKind::Upsample: return "Upsample";
    case LayerKind::Concat: return "Concat";
    case LayerKind::Detect: return "Detect";
  }
  return "?";
}

struct LayerSpec {
  std::string name;  // unique: Conv0..6, C2f0..7, SPPF, Upsample0..1, Concat0..3, Detect
  LayerKind kind = LayerKind::Input;
  std::size_t filters = 0;  // output channels; 0 for Detect (per-scale, see Graph)
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t repeat = 1;
  bool shortcut = false;
  std::vector<std::size_t> inputs;  // row indices of upstream layers

  // Filled in by build_graph for the nominal 640x640 input.
  std::size_t out_channels = 0;
  std::size_t out_h = 0;
  std::size_t out_w = 0;

  // Table label: Upsample/Concat rows share one name there.
  std::string table_label() const {
    if (kind == LayerKind::Upsample || kind == LayerKind::Concat) return to_string(kind);
    return name;
  }
};

// One parameterized convolution of the network.
struct ConvUnitSpec {
  std::string path;
  std::size_t layer = 0;  // owning row of Graph::layers
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  bool batchnorm = true;   // Conv+BN+SiLU block; false for the head's plain 1x1 outputs
  bool activation = true;
};

struct Graph {
  std::vector<LayerSpec> layers;  // row 0 is the input image
  std::size_t num_classes = 2;
  std::size_t reg_max = 16;
  std::size_t input_size = 640;
  bool fused = false;

  std::size_t head_channels() const { return 4 * reg_max + num_classes; }
  std::size_t box_hidden() const;
  std::size_t cls_hidden() const;
  const LayerSpec& layer(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  std::vector<ConvUnitSpec> conv_units() const;
};

struct ConvUnit {
  Tensor weight;                      // (out, in, k, k); empty when the entry is a bare BN
  std::vector<float> bias;            // empty when absent
  std::optional<BatchNormParams> bn;  // present before fusion
};

struct WeightHeader {
  std::uint32_t version = 1;
  std::uint32_t num_classes = 2;
  std::uint32_t reg_max = 16;
  std::uint32_t checksum = 0;  // CRC-32 of the serialized payload, set by save/load
};

struct WeightStore {
  WeightHeader header;
  std::map<std::string, ConvUnit> entries;
};

struct FeaturePyramid {
  Tensor p3;  // stride 8
  Tensor p4;  // stride 16
  Tensor p5;  // stride 32
  std::size_t num_classes = 0;
  std::size_t reg_max = 0;

  std::array<const Tensor*, 3> levels() const { return {&p3, &p4, &p5}; }
};

// Shapes of every row's output, recorded by forward() when requested.
struct ForwardTrace {
  std::vector<std::pair<std::string, Shape>> rows;
  std::array<Shape, 3> head{};
};

/// Assembles the 24-row YOLOv8n table (input image + 23 layers).
inline Graph build_graph(std::size_t num_classes, std::size_t reg_max) {
  if (num_classes < 1) throw ArgumentError("build_graph: num_classes must be >= 1");
  if (reg_max < 2) throw ArgumentError("build_graph: reg_max must be >= 2");
  Graph g;
  g.num_classes = num_classes;
  g.reg_max = reg_max;
  auto& L = g.layers;
  auto row = [&](std::string name, LayerKind kind, std::size_t filters, std::size_t kernel,
                 std::size_t stride, std::size_t repeat, bool shortcut,
                 std::vector<std::size_t> inputs) {
    LayerSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.filters = filters;
    s.kernel = kernel;
    s.stride = stride;
    s.repeat = repeat;
    s.shortcut = shortcut;
    s.inputs = std::move(inputs);
    L.push_back(std::move(s));
    return L.size() - 1;
  };
  using K = LayerKind;
  const auto img = row("Image", K::Input, 3, 0, 1, 1, false, {});
  const auto c0 = row("Conv0", K::Conv, 16, 3, 2, 1, false, {img});
  const auto c1 = row("Conv1", K::Conv, 32, 3, 2, 1, false, {c0});
  const auto f0 = row("C2f0", K::C2f, 32, 1, 1, 1, true, {c1});
  const auto c2 = row("Conv2", K::Conv, 64, 3, 2, 1, false, {f0});
  const auto f1 = row("C2f1", K::C2f, 64, 1, 1, 2, true, {c2});
  const auto c3 = row("Conv3", K::Conv, 128, 3, 2, 1, false, {f1});
  const auto f2 = row("C2f2", K::C2f, 128, 1, 1, 2, true, {c3});
  const auto c4 = row("Conv4", K::Conv, 256, 3, 2, 1, false, {f2});
  const auto f3 = row("C2f3", K::C2f, 256, 1, 1, 1, true, {c4});
  const auto sppf = row("SPPF", K::SPPF, 256, 5, 1, 1, false, {f3});
  const auto u0 = row("Upsample0", K::Upsample, 0, 0, 1, 1, false, {sppf});
  const auto k0 = row("Concat0", K::Concat, 0, 0, 1, 1, false, {u0, f2});
  const auto f4 = row("C2f4", K::C2f, 128, 1, 1, 1, false, {k0});
  const auto u1 = row("Upsample1", K::Upsample, 0, 0, 1, 1, false, {f4});
  const auto k1 = row("Concat1", K::Concat, 0, 0, 1, 1, false, {u1, f1});
  const auto f5 = row("C2f5", K::C2f, 64, 1, 1, 1, false, {k1});
  const auto c5 = row("Conv5", K::Conv, 64, 3, 2, 1, false, {f5});
  const auto k2 = row("Concat2", K::Concat, 0, 0, 1, 1, false, {c5, f4});
  const auto f6 = row("C2f6", K::C2f, 128, 1, 1, 1, false, {k2});
  const auto c6 = row("Conv6", K::Conv, 128, 3, 2, 1, false, {f6});
  const auto k3 = row("Concat3", K::Concat, 0, 0, 1, 1, false, {c6, sppf});
  const auto f7 = row("C2f7", K::C2f, 256, 1, 1, 1, false, {k3});
  row("Detect", K::Detect, 0, 0, 1, 1, false, {f5, f6, f7});

  // Propagate channel counts and nominal spatial sizes.
  for (auto& s : L) {
    switch (s.kind) {
      case K::Input:
        s.out_channels = 3;
        s.out_h = s.out_w = g.input_size;
        break;
      case K::Conv:
      case K::C2f:
      case K::SPPF: {
        const auto& in = L[s.inputs[0]];
        s.out_channels = s.filters;
        s.out_h = (in.out_h + 2 * (s.kind == K::Conv ? s.kernel / 2 : 0) -
                   (s.kind == K::Conv ? s.kernel : 1)) / s.stride + 1;
        s.out_w = s.out_h;
        break;
      }
      case K::Upsample: {
        const auto& in = L[s.inputs[0]];
        s.out_channels = in.out_channels;
        s.out_h = in.out_h * 2;
        s.out_w = in.out_w * 2;
        break;
      }
      case K::Concat: {
        s.out_channels = 0;
        for (auto i : s.inputs) s.out_channels += L[i].out_channels;
        s.out_h = L[s.inputs[0]].out_h;
        s.out_w = L[s.inputs[0]].out_w;
        break;
      }
      case K::Detect:
        s.out_channels = g.head_channels();
        s.out_h = s.out_w = 0;  // multi-scale
        break;
    }
  }
  return g;
}

inline std::size_t Graph::box_hidden() const {
  const std::size_t p3 = layers[layers.back().inputs[0]].out_channels;
  return std::max<std::size_t>({16, p3 / 4, 4 * reg_max});
}

inline std::size_t Graph::cls_hidden() const {
  const std::size_t p3 = layers[layers.back().inputs[0]].out_channels;
  return std::max<std::size_t>(p3, std::min<std::size_t>(num_classes, 100));
}

inline std::size_t Graph::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  throw ArgumentError("no layer named '" + name + "'");
}

inline const LayerSpec& Graph::layer(const std::string& name) const { return layers[index_of(name)]; }

inline std::string module_path(std::size_t row) { return "model." + std::to_string(row - 1); }

/// Every parameterized convolution in execution order.
inline std::vector<ConvUnitSpec> Graph::conv_units() const {
  std::vector<ConvUnitSpec> units;
  auto add_unit = [&](std::string path, std::size_t layer, std::size_t in, std::size_t out,
                      std::size_t k, std::size_t s, bool bn = true, bool act = true) {
    units.push_back({std::move(path), layer, in, out, k, s, bn, act});
  };
  for (std::size_t r = 0; r < layers.size(); ++r) {
    const auto& l = layers[r];
    const std::string base = module_path(r);
    switch (l.kind) {
      case LayerKind::Conv:
        add_unit(base, r, layers[l.inputs[0]].out_channels, l.filters, l.kernel, l.stride);
        break;
      case LayerKind::C2f: {
        const std::size_t in = layers[l.inputs[0]].out_channels;
        const std::size_t c = l.filters / 2;
        add_unit(base + ".cv1", r, in, 2 * c, 1, 1);
        for (std::size_t b = 0; b < l.repeat; ++b) {
          const std::string m = base + ".m." + std::to_string(b);
          add_unit(m + ".cv1", r, c, c, 3, 1);
          add_unit(m + ".cv2", r, c, c, 3, 1);
        }
        add_unit(base + ".cv2", r, (2 + l.repeat) * c, l.filters, 1, 1);
        break;
      }
      case LayerKind::SPPF: {
        const std::size_t in = layers[l.inputs[0]].out_channels;
        add_unit(base + ".cv1", r, in, in / 2, 1, 1);
        add_unit(base + ".cv2", r, (in / 2) * 4, l.filters, 1, 1);
        break;
      }
      case LayerKind::Detect: {
        const std::size_t c2 = box_hidden();
        const std::size_t c3 = cls_hidden();
        for (std::size_t i = 0; i < l.inputs.size(); ++i) {
          const std::size_t ch = layers[l.inputs[i]].out_channels;
          const std::string b = base + ".cv2." + std::to_string(i);
          add_unit(b + ".0", r, ch, c2, 3, 1);
          add_unit(b + ".1", r, c2, c2, 3, 1);
          add_unit(b + ".2", r, c2, 4 * reg_max, 1, 1, false, false);
        }
        for (std::size_t i = 0; i < l.inputs.size(); ++i) {
          const std::size_t ch = layers[l.inputs[i]].out_channels;
          const std::string b = base + ".cv3." + std::to_string(i);
          add_unit(b + ".0", r, ch, c3, 3, 1);
          add_unit(b + ".1", r, c3, c3, 3, 1);
          add_unit(b + ".2", r, c3, num_classes, 1, 1, false, false);
        }
        break;
      }
      default:
        break;
    }
  }
  return units;
}

/// Learnable parameters: conv weights and biases plus BN scale/shift
/// (running statistics are buffers and not counted).
inline std::size_t count_parameters(const Graph& g) {
  std::size_t total = 0;
  for (const auto& u : g.conv_units()) {
    total += u.out_channels * u.in_channels * u.kernel * u.kernel;
    if (u.batchnorm && !g.fused) {
      total += 2 * u.out_channels;
    } else {
      total += u.out_channels;  // bias
    }
  }
  return total;
}

/// Layer count under the module-tree convention: every module object of the
/// network is one layer (block wrappers, their convolutions, BN layers,
/// containers), with the SiLU activation counted once since all blocks share
/// it. Fusion folds each BN into its convolution and removes the BN layer.
inline std::size_t count_layers(const Graph& g) {
  const std::size_t per_unit_bn = g.fused ? 2 : 3;  // wrapper + conv (+ bn)
  std::size_t total = 2 + 1;                        // model root, layer sequence, shared SiLU
  for (const auto& l : g.layers) {
    switch (l.kind) {
      case LayerKind::Input:
        break;
      case LayerKind::Conv:
        total += per_unit_bn;
        break;
      case LayerKind::C2f:
        // block + bottleneck list + cv1/cv2 + per bottleneck (wrapper + 2 convs)
        total += 1 + 1 + 2 * per_unit_bn + l.repeat * (1 + 2 * per_unit_bn);
        break;
      case LayerKind::SPPF:
        total += 1 + 2 * per_unit_bn + 1;  // block + cv1/cv2 + pool
        break;
      case LayerKind::Upsample:
      case LayerKind::Concat:
        total += 1;
        break;
      case LayerKind::Detect: {
        const std::size_t scales = l.inputs.size();
        // head + two branch lists + one sequence per (branch, scale)
        // + two Conv blocks and a plain conv per sequence + DFL module and its conv
        total += 1 + 2 + 2 * scales + 2 * scales * (2 * per_unit_bn + 1) + 2;
        break;
      }
    }
  }
  return total;
}

namespace detail {

inline Tensor run_unit(const Tensor& x, const ConvUnitSpec& spec, const ConvUnit& unit, ExecConfig cfg) {
  ConvParams p;
  p.weights = unit.weight;
  p.bias = unit.bias;
  p.stride = {spec.stride, spec.stride};
  p.padding = {spec.kernel / 2, spec.kernel / 2};
  Tensor y = conv2d(x, p, cfg);
  if (unit.bn) y = batchnorm(y, *unit.bn);
  if (spec.activation) y = silu(y);
  return y;
}

}  // namespace detail

/// Confirms every conv unit has exactly one well-shaped entry and there are
/// no orphans. Throws ModelError naming the offending layer path.
inline void validate_weights(const Graph& g, const WeightStore& w) {
  if (w.header.reg_max != g.reg_max) {
    throw ModelError("weights: reg_max " + std::to_string(w.header.reg_max) +
                     " does not match graph reg_max " + std::to_string(g.reg_max));
  }
  const auto units = g.conv_units();
  for (const auto& u : units) {
    auto it = w.entries.find(u.path);
    if (it == w.entries.end()) throw ModelError("weights: missing entry for layer " + u.path);
    const ConvUnit& e = it->second;
    const Shape expect{u.out_channels, u.in_channels, u.kernel, u.kernel};
    if (e.weight.shape() != expect) {
      throw ModelError("weights: shape mismatch for layer " + u.path + ": file has " +
                       e.weight.shape().str() + ", graph expects " + expect.str());
    }
    const bool wants_bn = u.batchnorm && !g.fused;
    if (wants_bn != e.bn.has_value()) {
      throw ModelError("weights: layer " + u.path +
                       (wants_bn ? " is missing batchnorm parameters" : " has unexpected batchnorm parameters"));
    }
    if (e.bn) validate(*e.bn, u.out_channels);
    if (!wants_bn && e.bias.size() != u.out_channels) {
      throw ModelError("weights: layer " + u.path + " needs a bias of length " +
                       std::to_string(u.out_channels));
    }
    if (wants_bn && !e.bias.empty() && e.bias.size() != u.out_channels) {
      throw ModelError("weights: bias length mismatch for layer " + u.path);
    }
  }
  if (w.entries.size() != units.size()) {
    for (const auto& [path, unit] : w.entries) {
      bool known = false;
      for (const auto& u : units) known = known || u.path == path;
      if (!known) throw ModelError("weights: orphan entry " + path + " has no layer in the graph");
    }
  }
}

/// Runs the network on a (1, 3, H, W) input with H and W multiples of 32
/// (nominally 640x640). Outputs are raw head logits.
inline FeaturePyramid forward(const Graph& g, const WeightStore& w, const Tensor& input,
                              ExecConfig cfg = {}, ForwardTrace* trace = nullptr) {
  const Shape& is = input.shape();
  if (is.n != 1 || is.c != 3 || is.h == 0 || is.w == 0 || is.h % 32 != 0 || is.w % 32 != 0) {
    throw ShapeError("forward: input " + is.str() + " must be (1,3,H,W) with H, W multiples of 32");
  }
  validate_weights(g, w);
  const auto units = g.conv_units();
  std::size_t next_unit = 0;
  auto unit = [&](const Tensor& x) {
    const ConvUnitSpec& spec = units.at(next_unit++);
    return detail::run_unit(x, spec, w.entries.at(spec.path), cfg);
  };
  auto check = [&](const std::string& name, const Tensor& t) {
    if (!t.all_finite()) throw ModelError("forward: non-finite activation in layer " + name);
  };

  std::vector<Tensor> outs(g.layers.size());
  FeaturePyramid pyr;
  pyr.num_classes = g.num_classes;
  pyr.reg_max = g.reg_max;
  for (std::size_t r = 0; r < g.layers.size(); ++r) {
    const LayerSpec& l = g.layers[r];
    const auto in = [&](std::size_t i) -> const Tensor& { return outs[l.inputs[i]]; };
    switch (l.kind) {
      case LayerKind::Input:
        outs[r] = input;
        break;
      case LayerKind::Conv:
        outs[r] = unit(in(0));
        break;
      case LayerKind::C2f: {
        const std::size_t c = l.filters / 2;
        std::vector<Tensor> branches = split_channels(unit(in(0)), {c, c});
        for (std::size_t b = 0; b < l.repeat; ++b) {
          const Tensor& cur = branches.back();
          Tensor y = unit(unit(cur));
          if (l.shortcut) y = add(cur, y);
          branches.push_back(std::move(y));
        }
        outs[r] = unit(concat_channels(branches));
        break;
      }
      case LayerKind::SPPF: {
        std::vector<Tensor> branches;
        branches.push_back(unit(in(0)));
        for (int k = 0; k < 3; ++k) branches.push_back(maxpool2d(branches.back(), l.kernel, 1, l.kernel / 2));
        outs[r] = unit(concat_channels(branches));
        break;
      }
      case LayerKind::Upsample:
        outs[r] = upsample_nearest2x(in(0));
        break;
      case LayerKind::Concat: {
        std::vector<const Tensor*> parts;
        for (auto i : l.inputs) parts.push_back(&outs[i]);
        outs[r] = concat_channels(std::span<const Tensor* const>(parts));
        break;
      }
      case LayerKind::Detect: {
        const std::size_t scales = l.inputs.size();
        std::vector<Tensor> box(scales);
        for (std::size_t i = 0; i < scales; ++i) box[i] = unit(unit(unit(in(i))));
        std::array<Tensor*, 3> dst{&pyr.p3, &pyr.p4, &pyr.p5};
        for (std::size_t i = 0; i < scales; ++i) {
          Tensor cls = unit(unit(unit(in(i))));
          *dst[i] = concat_channels({&box[i], &cls});
          check(l.name, *dst[i]);
        }
        break;
      }
    }
    if (l.kind != LayerKind::Detect) {
      check(l.name, outs[r]);
      if (trace) trace->rows.emplace_back(l.name, outs[r].shape());
    }
    // Free activations no longer referenced downstream.
    for (auto i : l.inputs) {
      bool needed = false;
      for (std::size_t later = r + 1; later < g.layers.size(); ++later) {
        for (auto j : g.layers[later].inputs) needed = needed || j == i;
      }
      if (!needed) outs[i] = Tensor();
    }
  }
  if (trace) trace->head = {pyr.p3.shape(), pyr.p4.shape(), pyr.p5.shape()};
  return pyr;
}

/// Folds every BN into its preceding convolution.
inline std::pair<Graph, WeightStore> fuse(const Graph& g, const WeightStore& w) {
  if (g.fused) return {g, w};
  Graph fg = g;
  fg.fused = true;
  WeightStore fw;
  fw.header = w.header;
  for (const auto& [path, unit] : w.entries) {
    if (!unit.bn) {
      fw.entries.emplace(path, unit);
      continue;
    }
    if (unit.weight.empty()) {
      throw ModelError("fuse: batchnorm in " + path + " has no preceding convolution");
    }
    const BatchNormParams& bn = *unit.bn;
    const Shape s = unit.weight.shape();
    validate(bn, s.n);
    if (!unit.bias.empty() && unit.bias.size() != s.n) {
      throw ModelError("fuse: bias length mismatch in " + path);
    }
    ConvUnit out;
    std::vector<float> wdata(unit.weight.data().begin(), unit.weight.data().end());
    out.bias.resize(s.n);
    const std::size_t per_out = s.c * s.h * s.w;
    for (std::size_t o = 0; o < s.n; ++o) {
      const double scale = static_cast<double>(bn.gamma[o]) /
                           std::sqrt(static_cast<double>(bn.var[o]) + static_cast<double>(bn.eps));
      for (std::size_t i = 0; i < per_out; ++i) {
        wdata[o * per_out + i] = static_cast<float>(wdata[o * per_out + i] * scale);
      }
      const double b = unit.bias.empty() ? 0.0 : unit.bias[o];
      out.bias[o] = static_cast<float>(bn.beta[o] + (b - bn.mean[o]) * scale);
    }
    out.weight = Tensor(s, std::move(wdata));
    fw.entries.emplace(path, std::move(out));
  }
  return {fg, fw};
}

struct RandomWeightOptions {
  double weight_gain = 1.0;
  float bn_eps = 1e-3f;
};

/// Seeded random weights for testing and benchmarking. Conv weights are
/// uniform with variance gain/fan_in; BN statistics are kept near identity.
inline WeightStore random_weights(const Graph& g, std::uint64_t seed, RandomWeightOptions opt = {}) {
  Rng rng(seed);
  WeightStore w;
  w.header.num_classes = static_cast<std::uint32_t>(g.num_classes);
  w.header.reg_max = static_cast<std::uint32_t>(g.reg_max);
  for (const auto& u : g.conv_units()) {
    ConvUnit e;
    const Shape s{u.out_channels, u.in_channels, u.kernel, u.kernel};
    const double fan_in = static_cast<double>(u.in_channels * u.kernel * u.kernel);
    const double a = std::sqrt(3.0 * opt.weight_gain / fan_in);
    std::vector<float> data(s.numel());
    for (auto& v : data) v = static_cast<float>(rng.uniform(-a, a));
    e.weight = Tensor(s, std::move(data));
    const bool bn = u.batchnorm && !g.fused;
    if (bn) {
      BatchNormParams p;
      p.eps = opt.bn_eps;
      for (std::size_t o = 0; o < u.out_channels; ++o) {
        p.gamma.push_back(static_cast<float>(rng.uniform(0.5, 1.5)));
        p.beta.push_back(static_cast<float>(rng.uniform(-0.2, 0.2)));
        p.mean.push_back(static_cast<float>(rng.uniform(-0.2, 0.2)));
        p.var.push_back(static_cast<float>(rng.uniform(0.5, 1.5)));
      }
      e.bn = std::move(p);
    } else {
      for (std::size_t o = 0; o < u.out_channels; ++o) e.bias.push_back(static_cast<float>(rng.uniform(-0.1, 0.1)));
    }
    w.entries.emplace(u.path, std::move(e));
  }
  return w;
}

/// All-zero weights: zero kernels and biases, BN with gamma 1, beta 0,
/// mean 0, var 1.
inline WeightStore zero_weights(const Graph& g, float bn_eps = 1e-3f) {
  WeightStore w;
  w.header.num_classes = static_cast<std::uint32_t>(g.num_classes);
  w.header.reg_max = static_cast<std::uint32_t>(g.reg_max);
  for (const auto& u : g.conv_units()) {
    ConvUnit e;
    e.weight = Tensor(Shape{u.out_channels, u.in_channels, u.kernel, u.kernel});
    if (u.batchnorm && !g.fused) {
      e.bn = BatchNormParams{std::vector<float>(u.out_channels, 1.0f), std::vector<float>(u.out_channels, 0.0f),
                             std::vector<float>(u.out_channels, 0.0f), std::vector<float>(u.out_channels, 1.0f),
                             bn_eps};
    } else {
      e.bias.assign(u.out_channels, 0.0f);
    }
    w.entries.emplace(u.path, std::move(e));
  }
  return w;
}

}  // namespace lensinspect
