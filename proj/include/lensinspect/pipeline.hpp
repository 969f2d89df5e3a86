// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Detection pipeline (preprocess -> inference -> postprocess) with per-stage
// timing, and the conveyor-feed stream simulation.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lensinspect/image.hpp"
#include "lensinspect/netgraph.hpp"
#include "lensinspect/postproc.hpp"

namespace lensinspect {

struct StageTimings {
  double preprocess_ms = 0;
  double inference_ms = 0;
  double postprocess_ms = 0;

  double total_ms() const { return preprocess_ms + inference_ms + postprocess_ms; }
};

struct Detection {
  std::vector<DetectionBox> boxes;  // original image pixels, ranked
  LetterboxTransform transform;
  StageTimings timings;
};

struct DetectorConfig {
  PostprocessConfig post;
  int input_size = 640;
  ExecConfig exec;
};

class Detector {
 public:
  Detector(Graph graph, WeightStore weights, DetectorConfig cfg = {})
      : graph_(std::move(graph)), weights_(std::move(weights)), cfg_(cfg) {
    validate_weights(graph_, weights_);
  }

  const Graph& graph() const { return graph_; }
  const DetectorConfig& config() const { return cfg_; }

  Detection detect(const Image& image) const {
    using clock = std::chrono::steady_clock;
    const auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
    Detection out;
    const auto t0 = clock::now();
    auto [canvas, transform] = letterbox(image, cfg_.input_size);
    const Tensor input = to_tensor(canvas);
    const auto t1 = clock::now();
    const FeaturePyramid pyr = forward(graph_, weights_, input, cfg_.exec);
    const auto t2 = clock::now();
    out.boxes = postprocess(pyr, transform, cfg_.post);
    const auto t3 = clock::now();
    out.transform = transform;
    out.timings = {ms(t1 - t0), ms(t2 - t1), ms(t3 - t2)};
    return out;
  }

 private:
  Graph graph_;
  WeightStore weights_;
  DetectorConfig cfg_;
};

/// "image class conf x1 y1 x2 y2" with fixed precision.
inline std::string format_detection_line(const std::string& image, const std::string& class_name,
                                         const DetectionBox& b) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s %s %.6f %.2f %.2f %.2f %.2f", image.c_str(), class_name.c_str(), b.confidence,
                b.x1, b.y1, b.x2, b.y2);
  return buf;
}

struct FrameRecord {
  std::size_t index = 0;
  std::string name;
  double arrival_ms = 0;  // simulated conveyor clock
  double start_ms = 0;
  bool dropped = false;
  StageTimings timings;
  std::vector<DetectionBox> boxes;
};

struct StreamSummary {
  std::size_t frames = 0;
  std::size_t processed = 0;
  std::size_t dropped = 0;
  StageTimings mean;
  StageTimings p50;
  StageTimings p95;
  double wall_seconds = 0;
  double fps = 0;  // processed frames / wall-clock seconds of the processing loop
  double target_fps = 0;
};

struct StreamResult {
  std::vector<FrameRecord> frames;
  StreamSummary summary;
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Replays frames as a conveyor feed arriving every 1/target_fps seconds on
/// a simulated clock. A frame arriving while the previous one is still in
/// flight is dropped (no queue). Stage costs are measured for real, and the
/// simulated clock advances by the measured per-frame cost.
///
/// `process(i)` runs frame i through the pipeline and returns its result.
inline StreamResult simulate_stream(std::size_t frame_count, double target_fps,
                                    const std::function<FrameRecord(std::size_t)>& process) {
  if (!(target_fps > 0)) throw ArgumentError("stream: target fps must be positive");
  using clock = std::chrono::steady_clock;
  StreamResult res;
  const double period_ms = 1000.0 / target_fps;
  double busy_until = 0.0;
  const auto wall0 = clock::now();
  for (std::size_t i = 0; i < frame_count; ++i) {
    const double arrival = static_cast<double>(i) * period_ms;
    if (arrival < busy_until) {
      FrameRecord rec;
      rec.index = i;
      rec.arrival_ms = arrival;
      rec.start_ms = busy_until;
      rec.dropped = true;
      res.frames.push_back(std::move(rec));
      continue;
    }
    FrameRecord rec = process(i);
    rec.index = i;
    rec.arrival_ms = arrival;
    rec.start_ms = arrival;
    busy_until = arrival + rec.timings.total_ms();
    res.frames.push_back(std::move(rec));
  }
  const double wall = std::chrono::duration<double>(clock::now() - wall0).count();

  StreamSummary& s = res.summary;
  s.frames = frame_count;
  s.target_fps = target_fps;
  s.wall_seconds = wall;
  std::vector<double> pre, inf, post;
  for (const auto& f : res.frames) {
    if (f.dropped) {
      ++s.dropped;
      continue;
    }
    ++s.processed;
    pre.push_back(f.timings.preprocess_ms);
    inf.push_back(f.timings.inference_ms);
    post.push_back(f.timings.postprocess_ms);
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
  };
  s.mean = {mean(pre), mean(inf), mean(post)};
  s.p50 = {percentile(pre, 0.5), percentile(inf, 0.5), percentile(post, 0.5)};
  s.p95 = {percentile(pre, 0.95), percentile(inf, 0.95), percentile(post, 0.95)};
  s.fps = wall > 0 ? static_cast<double>(s.processed) / wall : 0.0;
  return res;
}

/// "preprocess X.Xms, inference X.Xms, postprocess X.Xms"
inline std::string format_stage_line(const StageTimings& t) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "preprocess %.1fms, inference %.1fms, postprocess %.1fms", t.preprocess_ms,
                t.inference_ms, t.postprocess_ms);
  return buf;
}

inline std::string format_stream_summary(const StreamSummary& s) {
  char buf[256];
  std::string out = "Speed: " + format_stage_line(s.mean) + " per image (mean)\n";
  out += "p50: " + format_stage_line(s.p50) + "\n";
  out += "p95: " + format_stage_line(s.p95) + "\n";
  std::snprintf(buf, sizeof buf, "frames %zu, processed %zu, dropped %zu, target %.2f FPS, achieved %.2f FPS\n",
                s.frames, s.processed, s.dropped, s.target_fps, s.fps);
  out += buf;
  return out;
}

}  // namespace lensinspect
