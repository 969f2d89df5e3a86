// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "lensinspect/report.hpp"
#include "test_support.hpp"

using namespace lensinspect;

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

const std::vector<std::string> kNames{"defect", "lens"};

std::vector<ImageResult> injected_dataset(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<ImageResult> images(n);
  for (auto& im : images) {
    const std::size_t k = rng.below(5);
    for (std::size_t i = 0; i < k; ++i) {
      const double x = rng.uniform(0, 500), y = rng.uniform(0, 400);
      im.ground_truth.push_back({static_cast<int>(rng.below(2)), x, y, x + rng.uniform(5, 100), y + rng.uniform(5, 100)});
    }
    im.ground_truth.push_back({1, 10, 10, 200, 200});  // every image shows a lens
    for (const auto& g : im.ground_truth) im.predictions.push_back({g.x1, g.y1, g.x2, g.y2, g.class_id, 1.0});
  }
  return images;
}

}  // namespace

TEST(Report, HeaderColumns) {
  const MetricsReport rep = evaluate(injected_dataset(1, 3), kNames);
  const std::string table = render_table(rep);
  const std::string header = table.substr(0, table.find('\n'));
  EXPECT_EQ(words(header), (std::vector<std::string>{"Class", "Images", "Instances", "Box(P)", "R", "mAP50", "mAP50-95"}));
  EXPECT_EQ(words(table.substr(table.find('\n') + 1)).front(), "all");
}

TEST(Report, LensRowRendering) {
  ClassRow row{"lens", 50, 50, 0.944, 1.000, 0.971, 0.995, 0.995};
  EXPECT_EQ(words(render_row(row)), (std::vector<std::string>{"lens", "50", "50", "0.944", "1.000", "0.995", "0.995"}));
  ClassRow defect{"defect", 19, 122, 0.431, 0.249, 0.0, 0.239, 0.0957};
  EXPECT_EQ(words(render_row(defect)).back(), "0.0957");
}

TEST(Report, FormatMetric) {
  EXPECT_EQ(format_metric(0.0957), "0.0957");
  EXPECT_EQ(format_metric(0.944), "0.944");
  EXPECT_EQ(format_metric(1.0), "1.000");
  EXPECT_EQ(format_metric(0.0), "0.000");
  EXPECT_EQ(format_metric(0.99549), "0.995");
}

TEST(Report, OracleInjectionIsExactlyOne) {
  const auto images = injected_dataset(2, 24);
  const MetricsReport rep = evaluate(images, kNames);
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.precision, 1.0) << r.name;
    EXPECT_EQ(r.recall, 1.0) << r.name;
    EXPECT_EQ(r.f1, 1.0) << r.name;
    EXPECT_EQ(r.map50, 1.0) << r.name;
    EXPECT_EQ(r.map50_95, 1.0) << r.name;
  }
  EXPECT_EQ(rep.rows[0].images, 24u);
  EXPECT_EQ(rep.rows[2].images, 24u);
}

TEST(Report, ThreeImageFixtureRows) {
  std::vector<ImageResult> v(3);
  v[0].ground_truth = {{1, 0, 0, 10, 10}, {0, 2, 2, 4, 4}};
  v[0].predictions = {{0, 0, 10, 10, 1, 0.9}, {2, 2, 4, 4, 0, 0.8}};
  v[1].ground_truth = {{1, 0, 0, 10, 10}};
  v[1].predictions = {{0, 0, 10, 10, 1, 0.7}, {20, 20, 30, 30, 0, 0.6}};
  v[2].ground_truth = {{0, 5, 5, 9, 9}, {1, 0, 0, 20, 20}};
  v[2].predictions = {{0, 0, 20, 14.4, 1, 0.4}, {5, 5, 9, 9, 0, 0.95}};
  const MetricsReport rep = evaluate(v, kNames);
  const ClassRow& all = rep.rows[0];
  const ClassRow& defect = rep.rows[1];
  const ClassRow& lens = rep.rows[2];
  EXPECT_EQ(defect.images, 2u);
  EXPECT_EQ(defect.instances, 2u);
  EXPECT_EQ(lens.images, 3u);
  EXPECT_EQ(lens.instances, 3u);
  EXPECT_EQ(all.images, 3u);
  EXPECT_EQ(all.instances, 5u);
  EXPECT_DOUBLE_EQ(defect.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(lens.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(all.precision, (2.0 / 3.0 + 1.0) / 2);
  EXPECT_DOUBLE_EQ(all.f1, 0.8);
  EXPECT_DOUBLE_EQ(all.map50, 1.0);
  EXPECT_NEAR(lens.map50_95, (5 + 5 * 67.0 / 101) / 10, 1e-12);
  EXPECT_NEAR(all.map50_95, (1 + lens.map50_95) / 2, 1e-12);
}

TEST(Report, CsvAndJson) {
  const MetricsReport rep = evaluate(injected_dataset(3, 5), kNames);
  const std::string csv = render_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,images,instances,precision,recall,f1,map50,map50_95");
  EXPECT_NE(csv.find("\nlens,5,"), std::string::npos);

  const auto j = nlohmann::json::parse(render_json(rep, kNames));
  EXPECT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["class"], "all");
  EXPECT_EQ(j["rows"][2]["map50_95"].get<double>(), 1.0);
  EXPECT_EQ(j["confusion_matrix"]["labels"].back(), "background");
  EXPECT_EQ(j["confusion_matrix"]["counts"].size(), 3u);

  const std::string cm = render_confusion_csv(rep.confusion, kNames);
  EXPECT_EQ(cm.substr(0, cm.find('\n')), "predicted\\true,defect,lens,background");
  EXPECT_NE(cm.find("lens,0.0000,1.0000,0.0000"), std::string::npos);

  const std::string pr = render_pr_csv(rep, kNames);
  EXPECT_EQ(pr.substr(0, pr.find('\n')), "class,confidence,precision,recall");
  EXPECT_NE(pr.find("lens,1.000000,1.000000,1.000000"), std::string::npos);
}
