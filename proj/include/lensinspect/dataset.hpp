// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Label files and dataset manifests.
//
// Label file: UTF-8 text, one object per line, "class cx cy w h" with
// space-separated decimals normalized to the image size. Blank lines are
// ignored. An empty file is a valid image without objects.
//
// Manifest (JSON):
//   {
//     "root":  "data",                 optional, relative to the manifest file
//     "names": ["defect", "lens"],      class names, index = class id
//     "train": ["images/train/a.png", {"image": "x.jpg", "label": "y.txt"}],
//     "val":   [...],
//     "test":  [...]
//   }
// A plain string entry takes its label path from the image path by
// replacing the last "images" directory with "labels" and the extension
// with ".txt" (images/train/a.png -> labels/train/a.txt).

#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lensinspect/augment.hpp"
#include "lensinspect/error.hpp"

namespace lensinspect {

namespace fs = std::filesystem;

inline const std::vector<std::string>& split_names() {
  static const std::vector<std::string> names{"train", "val", "test"};
  return names;
}

struct ImageRecord {
  fs::path image;  // absolute (resolved against the manifest root)
  fs::path label;
};

struct DatasetManifest {
  fs::path root;
  std::vector<std::string> class_names;
  std::map<std::string, std::vector<ImageRecord>> splits;
};

struct Sample {
  ImageRecord record;
  std::vector<Annotation> annotations;
};

struct LoadSummary {
  std::size_t images = 0;
  std::size_t annotations = 0;
  std::size_t missing_files = 0;
  std::size_t malformed_lines = 0;
  std::size_t bad_class_ids = 0;
  std::size_t clipped_boxes = 0;
};

struct Dataset {
  DatasetManifest manifest;
  std::map<std::string, std::vector<Sample>> splits;
  std::vector<std::string> diagnostics;
  LoadSummary summary;
};

inline fs::path derive_label_path(const fs::path& image) {
  std::vector<fs::path> parts(image.begin(), image.end());
  for (std::size_t i = parts.size(); i-- > 0;) {
    if (i + 1 < parts.size() && parts[i] == "images") {
      parts[i] = "labels";
      break;
    }
  }
  fs::path out;
  for (const auto& p : parts) out /= p;
  out.replace_extension(".txt");
  return out;
}

inline std::string format_decimal(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_label_line(const Annotation& a) {
  return std::to_string(a.class_id) + ' ' + format_decimal(a.cx) + ' ' + format_decimal(a.cy) + ' ' +
         format_decimal(a.w) + ' ' + format_decimal(a.h);
}

enum class LabelIssue { none, malformed, bad_class, empty_box, clipped };

struct ParsedLabel {
  std::optional<Annotation> annotation;
  LabelIssue issue = LabelIssue::none;
  std::string message;
};

/// Parses one "class cx cy w h" line. Boxes poking outside the unit square
/// are clipped (issue = clipped, annotation kept).
inline ParsedLabel parse_label_line(std::string_view line, std::size_t num_classes) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  ParsedLabel out;
  double v[5];
  bool numeric = tokens.size() == 5;
  for (std::size_t k = 0; numeric && k < 5; ++k) {
    const auto r = std::from_chars(tokens[k].data(), tokens[k].data() + tokens[k].size(), v[k]);
    numeric = r.ec == std::errc() && r.ptr == tokens[k].data() + tokens[k].size() && std::isfinite(v[k]);
  }
  if (!numeric) {
    out.issue = LabelIssue::malformed;
    out.message = "expected 5 numeric fields, got " + std::to_string(tokens.size()) + " field(s)";
    return out;
  }
  if (v[0] != std::floor(v[0]) || v[0] < 0 || v[0] >= static_cast<double>(num_classes)) {
    out.issue = LabelIssue::bad_class;
    out.message = "class id " + std::string(tokens[0]) + " out of range [0, " + std::to_string(num_classes) + ")";
    return out;
  }
  const int cls = static_cast<int>(v[0]);
  const double x1 = v[1] - v[3] / 2, x2 = v[1] + v[3] / 2, y1 = v[2] - v[4] / 2, y2 = v[2] + v[4] / 2;
  out.annotation = annotation_from_edges(cls, x1, y1, x2, y2);
  if (!out.annotation) {
    out.issue = LabelIssue::empty_box;
    out.message = "box has no area inside the image";
  } else if (x1 < 0 || y1 < 0 || x2 > 1 || y2 > 1) {
    out.issue = LabelIssue::clipped;
    out.message = "box clipped to image bounds";
  }
  return out;
}

/// Reads a label file; problems are appended to `diagnostics` as
/// "path:line: message" and counted in `summary`.
inline std::vector<Annotation> read_label_file(const fs::path& path, std::size_t num_classes,
                                               std::vector<std::string>& diagnostics, LoadSummary& summary) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  std::vector<Annotation> anns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const ParsedLabel p = parse_label_line(line, num_classes);
    if (p.issue != LabelIssue::none) {
      diagnostics.push_back(path.string() + ":" + std::to_string(lineno) + ": " + p.message);
      if (p.issue == LabelIssue::malformed) ++summary.malformed_lines;
      if (p.issue == LabelIssue::bad_class) ++summary.bad_class_ids;
      if (p.issue == LabelIssue::clipped) ++summary.clipped_boxes;
    }
    if (p.annotation) anns.push_back(*p.annotation);
  }
  return anns;
}

inline void write_label_file(const fs::path& path, const std::vector<Annotation>& anns) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write label file " + path.string());
  for (const auto& a : anns) out << format_label_line(a) << '\n';
  if (!out) throw DataError("write failed for label file " + path.string());
}

inline DatasetManifest parse_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + " does not parse: " + e.what());
  }
  DatasetManifest m;
  const fs::path base = fs::absolute(manifest_path).parent_path();
  m.root = j.contains("root") ? (base / j["root"].get<std::string>()).lexically_normal() : base;
  if (!j.contains("names") || !j["names"].is_array() || j["names"].empty()) {
    throw DataError("manifest " + manifest_path.string() + " needs a non-empty \"names\" list");
  }
  m.class_names = j["names"].get<std::vector<std::string>>();
  for (const auto& split : split_names()) {
    if (!j.contains(split)) continue;
    auto& records = m.splits[split];
    for (const auto& e : j[split]) {
      ImageRecord r;
      if (e.is_string()) {
        const fs::path img = e.get<std::string>();
        r.image = m.root / img;
        r.label = m.root / derive_label_path(img);
      } else if (e.is_object() && e.contains("image")) {
        r.image = m.root / e["image"].get<std::string>();
        r.label = e.contains("label") ? m.root / e["label"].get<std::string>()
                                      : m.root / derive_label_path(e["image"].get<std::string>());
      } else {
        throw DataError("manifest " + manifest_path.string() + ": bad entry in split " + split);
      }
      records.push_back(std::move(r));
    }
  }
  return m;
}

/// Loads the manifest and every label file. Per-file problems are recorded
/// as diagnostics and the load carries on; images whose image or label file
/// is missing are left out of their split.
inline Dataset load_dataset(const fs::path& manifest_path) {
  Dataset ds;
  ds.manifest = parse_manifest(manifest_path);
  const std::size_t nc = ds.manifest.class_names.size();
  for (const auto& [split, records] : ds.manifest.splits) {
    auto& samples = ds.splits[split];
    for (const auto& r : records) {
      if (!fs::exists(r.image)) {
        ds.diagnostics.push_back(r.image.string() + ": image file missing");
        ++ds.summary.missing_files;
        continue;
      }
      if (!fs::exists(r.label)) {
        ds.diagnostics.push_back(r.label.string() + ": label file missing");
        ++ds.summary.missing_files;
        continue;
      }
      Sample s{r, read_label_file(r.label, nc, ds.diagnostics, ds.summary)};
      ds.summary.annotations += s.annotations.size();
      ++ds.summary.images;
      samples.push_back(std::move(s));
    }
  }
  return ds;
}

/// Writes a manifest whose entries are paths relative to `root`.
inline void write_manifest(const fs::path& path, const std::vector<std::string>& class_names,
                           const std::map<std::string, std::vector<ImageRecord>>& splits, const fs::path& root) {
  nlohmann::ordered_json j;
  j["names"] = class_names;
  for (const auto& [split, records] : splits) {
    auto& arr = j[split];
    arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
      const auto img = r.image.lexically_relative(root).generic_string();
      const auto lbl = r.label.lexically_relative(root).generic_string();
      if (lbl == derive_label_path(img).generic_string()) {
        arr.push_back(img);
      } else {
        arr.push_back({{"image", img}, {"label", lbl}});
      }
    }
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed for manifest " + path.string());
}

}  // namespace lensinspect
