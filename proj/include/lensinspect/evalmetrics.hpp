// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Detection metrics: greedy matching, 101-point interpolated AP, mAP at one
// or many IoU thresholds, precision/recall/F1 at a confidence threshold, PR
// curves and a normalized confusion matrix with a background class.

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lensinspect/error.hpp"
#include "lensinspect/geometry.hpp"

namespace lensinspect {

struct GroundTruthBox {
  int class_id = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

// Predictions and ground truth of one image.
struct ImageResult {
  std::vector<DetectionBox> predictions;
  std::vector<GroundTruthBox> ground_truth;
};

struct MatchResult {
  std::vector<bool> pred_tp;   // per prediction, input order
  std::vector<int> pred_gt;    // matched GT index or -1
  std::vector<int> gt_pred;    // matching prediction index or -1
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Prediction indices ranked by confidence descending; ties keep input order.
inline std::vector<std::size_t> confidence_order(std::span<const DetectionBox> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].confidence > preds[b].confidence; });
  return order;
}

/// Greedy matching in descending confidence. Each prediction takes the
/// unmatched ground truth of its own class with the largest IoU (earliest GT
/// on ties) and is a true positive iff that IoU reaches the threshold.
/// With `class_aware` false, classes are ignored when pairing.
inline MatchResult match(std::span<const DetectionBox> preds, std::span<const GroundTruthBox> gts,
                         double iou_threshold, bool class_aware = true) {
  MatchResult r;
  r.pred_tp.assign(preds.size(), false);
  r.pred_gt.assign(preds.size(), -1);
  r.gt_pred.assign(gts.size(), -1);
  for (std::size_t p : confidence_order(preds)) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (r.gt_pred[g] >= 0) continue;
      if (class_aware && gts[g].class_id != preds[p].class_id) continue;
      const double v = iou(preds[p], gts[g]);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= iou_threshold) {
      r.pred_tp[p] = true;
      r.pred_gt[p] = best;
      r.gt_pred[static_cast<std::size_t>(best)] = static_cast<int>(p);
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = gts.size() - r.tp;
  return r;
}

struct PrPoint {
  double precision = 0;
  double recall = 0;
};

/// Cumulative precision/recall after each ranked prediction.
inline std::vector<PrPoint> precision_recall_points(const std::vector<bool>& ranked_tp, std::size_t num_gt) {
  std::vector<PrPoint> pts;
  pts.reserve(ranked_tp.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
    tp += ranked_tp[i] ? 1 : 0;
    pts.push_back({static_cast<double>(tp) / static_cast<double>(i + 1),
                   num_gt ? static_cast<double>(tp) / static_cast<double>(num_gt) : 0.0});
  }
  return pts;
}

/// 101-point interpolated AP: mean over r in {0, 0.01, ..., 1} of the best
/// precision at recall >= r. Empty optional when there is nothing to score
/// (no ground truth and no predictions).
inline std::optional<double> average_precision(const std::vector<bool>& ranked_tp, std::size_t num_gt) {
  if (num_gt == 0) {
    if (ranked_tp.empty()) return std::nullopt;
    return 0.0;
  }
  auto pts = precision_recall_points(ranked_tp, num_gt);
  // Precision envelope: best precision at this or any later (higher recall) point.
  for (std::size_t i = pts.size(); i-- > 1;) pts[i - 1].precision = std::max(pts[i - 1].precision, pts[i].precision);
  double sum = 0.0;
  std::size_t k = 0;
  for (int step = 0; step <= 100; ++step) {
    const double r = step / 100.0;
    while (k < pts.size() && pts[k].recall < r) ++k;
    if (k == pts.size()) break;
    sum += pts[k].precision;
  }
  return sum / 101.0;
}

inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

namespace detail {

struct Pooled {
  std::vector<double> conf;
  std::vector<bool> tp;
  std::size_t num_gt = 0;
};

inline std::vector<DetectionBox> of_class(std::span<const DetectionBox> v, int c) {
  std::vector<DetectionBox> out;
  for (const auto& b : v) if (b.class_id == c) out.push_back(b);
  return out;
}

inline std::vector<GroundTruthBox> of_class(std::span<const GroundTruthBox> v, int c) {
  std::vector<GroundTruthBox> out;
  for (const auto& b : v) if (b.class_id == c) out.push_back(b);
  return out;
}

// Matches every image at one threshold and pools per-class flags ranked by
// confidence (image order, then prediction rank breaks ties).
inline Pooled pool_class(std::span<const ImageResult> images, int c, double iou_threshold, double min_conf = 0.0) {
  struct Item {
    double conf;
    bool tp;
  };
  std::vector<Item> items;
  Pooled out;
  for (const auto& img : images) {
    auto preds = of_class(img.predictions, c);
    std::erase_if(preds, [&](const DetectionBox& b) { return b.confidence < min_conf; });
    const auto gts = of_class(img.ground_truth, c);
    out.num_gt += gts.size();
    const MatchResult m = match(preds, gts, iou_threshold);
    for (std::size_t p : confidence_order(preds)) items.push_back({preds[p].confidence, m.pred_tp[p]});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.conf > b.conf; });
  for (const auto& it : items) {
    out.conf.push_back(it.conf);
    out.tp.push_back(it.tp);
  }
  return out;
}

}  // namespace detail

struct ClassAp {
  int class_id = 0;
  std::size_t num_gt = 0;
  std::size_t num_pred = 0;
  std::vector<std::optional<double>> ap;  // per threshold
  std::optional<double> mean_ap;          // over thresholds; empty when not evaluated
};

struct MapResult {
  std::vector<double> thresholds;
  std::vector<ClassAp> classes;
  std::optional<double> map;  // mean over evaluated classes
};

/// Per-class AP at each threshold, averaged over thresholds, then over the
/// classes that have ground truth or predictions.
inline MapResult map_at(std::span<const ImageResult> images, std::span<const double> thresholds, int num_classes) {
  if (thresholds.empty()) throw ArgumentError("map_at: no IoU thresholds");
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw ArgumentError("map_at: IoU thresholds must lie in (0, 1)");
  }
  MapResult res;
  res.thresholds.assign(thresholds.begin(), thresholds.end());
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (int c = 0; c < num_classes; ++c) {
    ClassAp ca;
    ca.class_id = c;
    double s = 0.0;
    bool any = false;
    for (double t : thresholds) {
      const auto pooled = detail::pool_class(images, c, t);
      ca.num_gt = pooled.num_gt;
      ca.num_pred = pooled.tp.size();
      const auto ap = average_precision(pooled.tp, pooled.num_gt);
      ca.ap.push_back(ap);
      if (ap) {
        s += *ap;
        any = true;
      }
    }
    if (any) {
      ca.mean_ap = s / static_cast<double>(thresholds.size());
      sum += *ca.mean_ap;
      ++evaluated;
    }
    res.classes.push_back(std::move(ca));
  }
  if (evaluated) res.map = sum / static_cast<double>(evaluated);
  return res;
}

struct PrecisionRecallF1 {
  int class_id = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

inline double safe_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

/// Counts at a confidence cut-off (predictions with confidence >= conf_threshold).
inline std::vector<PrecisionRecallF1> precision_recall_f1(std::span<const ImageResult> images, double conf_threshold,
                                                          double iou_threshold, int num_classes) {
  if (!(conf_threshold >= 0 && conf_threshold <= 1 && iou_threshold >= 0 && iou_threshold <= 1)) {
    throw ArgumentError("precision_recall_f1: thresholds must lie in [0, 1]");
  }
  std::vector<PrecisionRecallF1> out;
  for (int c = 0; c < num_classes; ++c) {
    PrecisionRecallF1 r;
    r.class_id = c;
    for (const auto& img : images) {
      auto preds = detail::of_class(img.predictions, c);
      std::erase_if(preds, [&](const DetectionBox& b) { return b.confidence < conf_threshold; });
      const auto gts = detail::of_class(img.ground_truth, c);
      const MatchResult m = match(preds, gts, iou_threshold);
      r.tp += m.tp;
      r.fp += m.fp;
      r.fn += m.fn;
    }
    r.precision = safe_ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fp));
    r.recall = safe_ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fn));
    r.f1 = safe_ratio(2 * r.precision * r.recall, r.precision + r.recall);
    out.push_back(r);
  }
  return out;
}

/// Rows are predicted classes, columns true classes; index num_classes is
/// background. `normalized` divides each column by its total.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::vector<double>> counts;
  std::vector<std::vector<double>> normalized;

  int background() const { return num_classes; }
};

/// Class-agnostic greedy pairing (so class confusions show up off the
/// diagonal). Matched prediction -> (pred class, gt class); unmatched
/// prediction -> (pred class, background); unmatched GT -> (background, gt class).
inline ConfusionMatrix confusion_matrix(std::span<const ImageResult> images, double conf_threshold,
                                        double iou_threshold, int num_classes) {
  if (!(conf_threshold >= 0 && conf_threshold <= 1 && iou_threshold >= 0 && iou_threshold <= 1)) {
    throw ArgumentError("confusion_matrix: thresholds must lie in [0, 1]");
  }
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  const std::size_t n = static_cast<std::size_t>(num_classes) + 1;
  cm.counts.assign(n, std::vector<double>(n, 0.0));
  const std::size_t bg = static_cast<std::size_t>(num_classes);
  auto cls = [&](int c) {
    if (c < 0 || c >= num_classes) throw ArgumentError("confusion_matrix: class id " + std::to_string(c) + " out of range");
    return static_cast<std::size_t>(c);
  };
  for (const auto& img : images) {
    std::vector<DetectionBox> preds;
    for (const auto& p : img.predictions) if (p.confidence >= conf_threshold) preds.push_back(p);
    const MatchResult m = match(preds, img.ground_truth, iou_threshold, /*class_aware=*/false);
    for (std::size_t p = 0; p < preds.size(); ++p) {
      const std::size_t row = cls(preds[p].class_id);
      const std::size_t col = m.pred_tp[p] ? cls(img.ground_truth[static_cast<std::size_t>(m.pred_gt[p])].class_id) : bg;
      cm.counts[row][col] += 1;
    }
    for (std::size_t g = 0; g < img.ground_truth.size(); ++g) {
      if (m.gt_pred[g] < 0) cm.counts[bg][cls(img.ground_truth[g].class_id)] += 1;
    }
  }
  cm.normalized = cm.counts;
  for (std::size_t col = 0; col < n; ++col) {
    double total = 0;
    for (std::size_t row = 0; row < n; ++row) total += cm.counts[row][col];
    if (total > 0) {
      for (std::size_t row = 0; row < n; ++row) cm.normalized[row][col] = cm.counts[row][col] / total;
    }
  }
  return cm;
}

struct PrSample {
  double confidence = 0;
  double precision = 0;
  double recall = 0;
};

/// One sample per distinct confidence value c (descending): precision and
/// recall of the predictions with confidence >= c.
inline std::vector<PrSample> pr_curve(std::span<const ImageResult> images, int class_id, double iou_threshold) {
  const auto pooled = detail::pool_class(images, class_id, iou_threshold);
  std::vector<PrSample> out;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < pooled.tp.size(); ++i) {
    tp += pooled.tp[i] ? 1 : 0;
    const bool last_of_value = i + 1 == pooled.tp.size() || pooled.conf[i + 1] != pooled.conf[i];
    if (!last_of_value) continue;
    out.push_back({pooled.conf[i], static_cast<double>(tp) / static_cast<double>(i + 1),
                   safe_ratio(static_cast<double>(tp), static_cast<double>(pooled.num_gt))});
  }
  return out;
}

}  // namespace lensinspect
