// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Hand-built weight sets with known outputs, for tests and the gen-weights
// utility.

#pragma once

#include <cmath>
#include <string>

#include "lensinspect/netgraph.hpp"
#include "lensinspect/postproc.hpp"

namespace lensinspect {

/// Random network whose class logits are pinned to -40 (no detections).
inline WeightStore silent_weights(const Graph& g, std::uint64_t seed) {
  WeightStore w = random_weights(g, seed);
  for (std::size_t s = 0; s < 3; ++s) {
    ConvUnit& u = w.entries.at(module_path(g.layers.size() - 1) + ".cv3." + std::to_string(s) + ".2");
    std::fill(u.weight.mutable_data().begin(), u.weight.mutable_data().end(), 0.0f);
    std::fill(u.bias.begin(), u.bias.end(), -40.0f);
  }
  return w;
}

struct FixtureBox {
  int class_id = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // network-input pixels
};

/// Weights that fire exactly one detection, `box`, at the top-left stride-8
/// cell whatever the input image.
///
/// The backbone and neck are all zero, so every feature map is zero. In the
/// stride-8 class branch the first conv's BN shift makes two constant
/// channels; the second conv reads them through a tap one row up and a tap
/// one column left, which only the zero padding can silence. Cell (0, 0) is
/// therefore the only cell where both taps see padding, and the final 1x1
/// conv turns that into a single high logit. Box logits are constant biases
/// encoding the requested side distances.
inline WeightStore fixture_weights(const Graph& g, const FixtureBox& box) {
  if (g.fused) throw ArgumentError("fixture_weights: build from an unfused graph");
  if (box.class_id < 0 || static_cast<std::size_t>(box.class_id) >= g.num_classes) {
    throw ArgumentError("fixture_weights: class id out of range");
  }
  const double stride = 8.0, center = 0.5 * stride;
  const double sides[4] = {(center - box.x1) / stride, (center - box.y1) / stride, (box.x2 - center) / stride,
                           (box.y2 - center) / stride};
  for (double s : sides) {
    if (s < 0 || s > static_cast<double>(g.reg_max - 1)) {
      throw ArgumentError("fixture_weights: box is not reachable from the top-left stride-8 cell");
    }
  }
  WeightStore w = zero_weights(g);
  const std::string head = module_path(g.layers.size() - 1);
  for (std::size_t s = 0; s < 3; ++s) {
    ConvUnit& reg = w.entries.at(head + ".cv2." + std::to_string(s) + ".2");
    for (std::size_t side = 0; side < 4; ++side) {
      const auto logits = encode_distance(sides[side], g.reg_max);
      std::copy(logits.begin(), logits.end(), reg.bias.begin() + static_cast<std::ptrdiff_t>(side * g.reg_max));
    }
    ConvUnit& cls = w.entries.at(head + ".cv3." + std::to_string(s) + ".2");
    std::fill(cls.bias.begin(), cls.bias.end(), -40.0f);
  }

  const float beta = 3.0f;
  const float level = static_cast<float>(beta / (1.0 + std::exp(-beta)));  // SiLU(beta)
  ConvUnit& first = w.entries.at(head + ".cv3.0.0");
  first.bn->beta[0] = beta;
  first.bn->beta[1] = beta;
  ConvUnit& second = w.entries.at(head + ".cv3.0.1");
  second.weight.at(0, 0, 0, 1) = -1.0f / level;  // reads (y - 1, x)
  second.weight.at(1, 1, 1, 0) = -1.0f / level;  // reads (y, x - 1)
  ConvUnit& last = w.entries.at(head + ".cv3.0.2");
  const auto c = static_cast<std::size_t>(box.class_id);
  last.weight.at(c, 0, 0, 0) = 100.0f;
  last.weight.at(c, 1, 0, 0) = 100.0f;
  last.bias[c] = 10.0f;
  return w;
}

}  // namespace lensinspect
