// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lensinspect/evalmetrics.hpp"

namespace lensinspect {

struct ClassRow {
  std::string name;  // "all" for the aggregate row
  std::size_t images = 0;
  std::size_t instances = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double map50 = 0;
  double map50_95 = 0;
};

struct MetricsReport {
  std::vector<ClassRow> rows;  // "all" first, then one row per class
  std::vector<std::vector<PrSample>> pr_curves;  // per class at the evaluation IoU
  ConfusionMatrix confusion;
  double conf_threshold = 0.5;
  double iou_threshold = 0.5;
};

struct EvalConfig {
  double conf_threshold = 0.5;
  double iou_threshold = 0.5;
};

/// Full evaluation. The "all" row averages P/R/F1/mAP over evaluated
/// classes (classes with ground truth or predictions).
inline MetricsReport evaluate(std::span<const ImageResult> images, const std::vector<std::string>& class_names,
                              const EvalConfig& cfg = {}) {
  const int nc = static_cast<int>(class_names.size());
  MetricsReport rep;
  rep.conf_threshold = cfg.conf_threshold;
  rep.iou_threshold = cfg.iou_threshold;
  const std::vector<double> t50{cfg.iou_threshold};
  const auto m50 = map_at(images, t50, nc);
  const auto m5095 = map_at(images, coco_iou_thresholds(), nc);
  const auto prf = precision_recall_f1(images, cfg.conf_threshold, cfg.iou_threshold, nc);
  rep.confusion = confusion_matrix(images, cfg.conf_threshold, cfg.iou_threshold, nc);

  ClassRow all;
  all.name = "all";
  all.images = images.size();
  std::size_t evaluated = 0;
  for (int c = 0; c < nc; ++c) {
    ClassRow row;
    row.name = class_names[static_cast<std::size_t>(c)];
    for (const auto& img : images) {
      std::size_t k = 0;
      for (const auto& g : img.ground_truth) k += g.class_id == c ? 1 : 0;
      row.instances += k;
      row.images += k ? 1 : 0;
    }
    const auto& pc = prf[static_cast<std::size_t>(c)];
    row.precision = pc.precision;
    row.recall = pc.recall;
    row.f1 = pc.f1;
    row.map50 = m50.classes[static_cast<std::size_t>(c)].mean_ap.value_or(0.0);
    row.map50_95 = m5095.classes[static_cast<std::size_t>(c)].mean_ap.value_or(0.0);
    all.instances += row.instances;
    if (m50.classes[static_cast<std::size_t>(c)].mean_ap) {
      ++evaluated;
      all.precision += row.precision;
      all.recall += row.recall;
      all.f1 += row.f1;
    }
    rep.rows.push_back(row);
    rep.pr_curves.push_back(pr_curve(images, c, cfg.iou_threshold));
  }
  if (evaluated) {
    all.precision /= static_cast<double>(evaluated);
    all.recall /= static_cast<double>(evaluated);
    all.f1 /= static_cast<double>(evaluated);
  }
  all.map50 = m50.map.value_or(0.0);
  all.map50_95 = m5095.map.value_or(0.0);
  rep.rows.insert(rep.rows.begin(), all);
  return rep;
}

/// Three decimals, or three significant digits below 0.1 (e.g. 0.0957).
inline std::string format_metric(double v) {
  char buf[32];
  if (v == 0.0 || v >= 0.1) {
    std::snprintf(buf, sizeof buf, "%.3f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  }
  return buf;
}

inline std::string render_row(const ClassRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%10s%10zu%11zu%10s%10s%10s%11s", r.name.c_str(), r.images, r.instances,
                format_metric(r.precision).c_str(), format_metric(r.recall).c_str(),
                format_metric(r.map50).c_str(), format_metric(r.map50_95).c_str());
  return buf;
}

/// Plain-text table: Class, Images, Instances, Box(P), R, mAP50, mAP50-95.
inline std::string render_table(const MetricsReport& rep) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%10s%10s%11s%10s%10s%10s%11s", "Class", "Images", "Instances", "Box(P)", "R",
                "mAP50", "mAP50-95");
  os << buf << '\n';
  for (const auto& r : rep.rows) os << render_row(r) << '\n';
  return os.str();
}

inline std::string render_csv(const MetricsReport& rep) {
  std::ostringstream os;
  os << "class,images,instances,precision,recall,f1,map50,map50_95\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.name.c_str(), r.images, r.instances,
                  r.precision, r.recall, r.f1, r.map50, r.map50_95);
    os << buf;
  }
  return os.str();
}

inline std::string render_json(const MetricsReport& rep, const std::vector<std::string>& class_names) {
  nlohmann::ordered_json j;
  j["conf_threshold"] = rep.conf_threshold;
  j["iou_threshold"] = rep.iou_threshold;
  j["all_row_averaging"] = "macro";
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"class", r.name},
                         {"images", r.images},
                         {"instances", r.instances},
                         {"precision", r.precision},
                         {"recall", r.recall},
                         {"f1", r.f1},
                         {"map50", r.map50},
                         {"map50_95", r.map50_95}});
  }
  std::vector<std::string> labels = class_names;
  labels.push_back("background");
  j["confusion_matrix"]["labels"] = labels;
  j["confusion_matrix"]["counts"] = rep.confusion.counts;
  j["confusion_matrix"]["normalized"] = rep.confusion.normalized;
  return j.dump(2) + "\n";
}

/// class,confidence,precision,recall
inline std::string render_pr_csv(const MetricsReport& rep, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << "class,confidence,precision,recall\n";
  char buf[256];
  for (std::size_t c = 0; c < rep.pr_curves.size(); ++c) {
    for (const auto& s : rep.pr_curves[c]) {
      std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", class_names[c].c_str(), s.confidence, s.precision,
                    s.recall);
      os << buf;
    }
  }
  return os.str();
}

/// Normalized matrix; first column is the predicted label, header row the true labels.
inline std::string render_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  std::vector<std::string> labels = class_names;
  labels.push_back("background");
  std::ostringstream os;
  os << "predicted\\true";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  char buf[32];
  for (std::size_t r = 0; r < labels.size(); ++r) {
    os << labels[r];
    for (std::size_t c = 0; c < labels.size(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.4f", cm.normalized[r][c]);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lensinspect
