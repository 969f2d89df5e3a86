// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// lensinspect: detect / eval / stream / augment / info / gen-weights.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "lensinspect/augment_dataset.hpp"
#include "lensinspect/dataset.hpp"
#include "lensinspect/evalmetrics.hpp"
#include "lensinspect/image_io.hpp"
#include "lensinspect/pipeline.hpp"
#include "lensinspect/report.hpp"
#include "lensinspect/synthetic_weights.hpp"
#include "lensinspect/weights_io.hpp"

namespace fs = std::filesystem;
using namespace lensinspect;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kModel = 3 };

struct CommonOptions {
  std::string weights;
  double conf = 0.25;
  double nms_iou = 0.45;
  std::size_t max_det = 300;
  std::string out = "runs";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::string> names{"defect", "lens"};
};

std::vector<std::string> class_names_for(const std::vector<std::string>& names, std::size_t nc) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < nc; ++i) out.push_back(i < names.size() ? names[i] : "class" + std::to_string(i));
  return out;
}

Detector make_detector(const CommonOptions& opt) {
  if (opt.weights.empty()) throw ModelError("--weights is required");
  WeightStore w = load_weights(opt.weights);
  Graph g = graph_for(w);
  DetectorConfig cfg;
  cfg.post = {opt.conf, opt.nms_iou, opt.max_det};
  cfg.exec.threads = opt.threads;
  return Detector(std::move(g), std::move(w), cfg);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("write failed for " + path.string());
}

int cmd_detect(const CommonOptions& opt, const std::vector<std::string>& images) {
  const Detector det = make_detector(opt);
  const auto names = class_names_for(opt.names, det.graph().num_classes);
  ensure_dir(opt.out);
  std::string listing;
  for (const auto& path : images) {
    std::vector<std::string> warnings;
    const Image img = read_oriented(path, &warnings);
    for (const auto& w : warnings) std::cerr << path << ": warning: " << w << '\n';
    const Detection d = det.detect(img);
    std::cout << path << ": " << d.boxes.size() << " detections (" << format_stage_line(d.timings) << ")\n";
    for (const auto& b : d.boxes) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "  %-8s %.3f  %.1f %.1f %.1f %.1f\n", names[static_cast<std::size_t>(b.class_id)].c_str(),
                    b.confidence, b.x1, b.y1, b.x2, b.y2);
      std::cout << buf;
      listing += format_detection_line(path, names[static_cast<std::size_t>(b.class_id)], b) + '\n';
    }
  }
  write_text(fs::path(opt.out) / "detections.txt", listing);
  return kOk;
}

struct EvalOptions {
  std::string manifest;
  std::string split = "val";
  double eval_conf = 0.5;
  double eval_iou = 0.5;
  double det_conf = 0.001;
  unsigned jobs = 1;
  bool oracle_inject = false;
};

std::vector<GroundTruthBox> to_ground_truth(const std::vector<Annotation>& anns, int w, int h) {
  std::vector<GroundTruthBox> out;
  for (const auto& a : anns) {
    const Rect r = to_pixels(a, w, h);
    out.push_back({a.class_id, r.x1, r.y1, r.x2, r.y2});
  }
  return out;
}

int cmd_eval(CommonOptions opt, const EvalOptions& eo) {
  const Dataset ds = load_dataset(eo.manifest);
  for (const auto& d : ds.diagnostics) std::cerr << "warning: " << d << '\n';
  auto it = ds.splits.find(eo.split);
  if (it == ds.splits.end() || it->second.empty()) throw DataError("split '" + eo.split + "' has no images");
  const auto& samples = it->second;
  const auto& names = ds.manifest.class_names;

  std::optional<Detector> det;
  if (!eo.oracle_inject) {
    opt.conf = eo.det_conf;
    det.emplace(make_detector(opt));
    if (det->graph().num_classes != names.size()) {
      throw ModelError("weights have " + std::to_string(det->graph().num_classes) + " classes but the dataset has " +
                       std::to_string(names.size()));
    }
  }

  std::vector<ImageResult> results(samples.size());
  std::vector<std::string> failures(samples.size());
  std::vector<bool> ok(samples.size(), false);
  detail::parallel_for(samples.size(), eo.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const Image img = read_oriented(samples[i].record.image);
        results[i].ground_truth = to_ground_truth(samples[i].annotations, img.width, img.height);
        if (eo.oracle_inject) {
          for (const auto& g : results[i].ground_truth) results[i].predictions.push_back({g.x1, g.y1, g.x2, g.y2, g.class_id, 1.0});
        } else {
          results[i].predictions = det->detect(img).boxes;
        }
        ok[i] = true;
      } catch (const std::exception& e) {
        failures[i] = samples[i].record.image.string() + ": " + e.what();
      }
    }
  });
  std::vector<ImageResult> evaluated;
  std::string listing;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!ok[i]) {
      std::cerr << "error: " << failures[i] << '\n';
      ++failed;
      continue;
    }
    for (const auto& b : results[i].predictions) {
      listing += format_detection_line(samples[i].record.image.string(), names[static_cast<std::size_t>(b.class_id)], b) + '\n';
    }
    evaluated.push_back(std::move(results[i]));
  }
  if (evaluated.empty()) throw DataError("no image of split '" + eo.split + "' could be evaluated");

  const MetricsReport rep = evaluate(evaluated, names, {eo.eval_conf, eo.eval_iou});
  const std::string table = render_table(rep);
  std::cout << table;
  if (failed) std::cout << failed << " image(s) failed and were skipped\n";
  const fs::path out = opt.out;
  ensure_dir(out);
  write_text(out / "metrics.txt", table);
  write_text(out / "metrics.csv", render_csv(rep));
  write_text(out / "metrics.json", render_json(rep, names));
  write_text(out / "pr_curve.csv", render_pr_csv(rep, names));
  write_text(out / "confusion_matrix.csv", render_confusion_csv(rep.confusion, names));
  write_text(out / "detections.txt", listing);
  return kOk;
}

int cmd_stream(const CommonOptions& opt, const std::string& frames_dir, double fps) {
  if (!fs::is_directory(frames_dir)) throw DataError("frames directory " + frames_dir + " does not exist");
  std::vector<fs::path> frames;
  for (const auto& e : fs::directory_iterator(frames_dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".PNG" || ext == ".JPG")) {
      frames.push_back(e.path());
    }
  }
  if (frames.empty()) throw DataError("frames directory " + frames_dir + " contains no PNG/JPEG frames");
  std::sort(frames.begin(), frames.end());
  const Detector det = make_detector(opt);
  const auto names = class_names_for(opt.names, det.graph().num_classes);

  const StreamResult res = simulate_stream(frames.size(), fps, [&](std::size_t i) {
    FrameRecord rec;
    rec.name = frames[i].filename().string();
    const Detection d = det.detect(read_oriented(frames[i]));
    rec.timings = d.timings;
    rec.boxes = d.boxes;
    return rec;
  });

  ensure_dir(opt.out);
  std::ostringstream log, listing;
  log << "frame,file,arrival_ms,start_ms,dropped,preprocess_ms,inference_ms,postprocess_ms,detections\n";
  char buf[512];
  for (const auto& f : res.frames) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.3f,%.3f,%d,%.3f,%.3f,%.3f,%zu\n", f.index,
                  frames[f.index].filename().string().c_str(), f.arrival_ms, f.start_ms, f.dropped ? 1 : 0,
                  f.timings.preprocess_ms, f.timings.inference_ms, f.timings.postprocess_ms, f.boxes.size());
    log << buf;
    for (const auto& b : f.boxes) {
      listing << format_detection_line(frames[f.index].filename().string(), names[static_cast<std::size_t>(b.class_id)], b) << '\n';
    }
  }
  write_text(fs::path(opt.out) / "stream_log.csv", log.str());
  write_text(fs::path(opt.out) / "detections.txt", listing.str());
  std::cout << format_stream_summary(res.summary);
  return kOk;
}

int cmd_augment(const CommonOptions& opt, const std::string& manifest, AugmentRunConfig cfg) {
  const Dataset ds = load_dataset(manifest);
  for (const auto& d : ds.diagnostics) std::cerr << "warning: " << d << '\n';
  cfg.seed = opt.seed;
  const AugmentReport rep = augment_dataset(ds, opt.out, cfg);
  for (const auto& d : rep.diagnostics) std::cerr << "error: " << d << '\n';
  std::cout << "inputs " << rep.inputs << ", outputs " << rep.outputs << ", boxes in " << rep.boxes_in
            << ", boxes out " << rep.boxes_out << ", failed inputs " << rep.failed_inputs << '\n'
            << "manifest " << rep.manifest.string() << '\n';
  return kOk;
}

int cmd_info(const std::string& path) {
  const WeightStore w = load_weights(path);
  Graph g = graph_for(w);
  validate_weights(g, w);
  Graph unfused = g;
  unfused.fused = false;
  Graph fused = g;
  fused.fused = true;
  char crc[16];
  std::snprintf(crc, sizeof crc, "0x%08x", w.header.checksum);
  std::cout << "weights: " << path << '\n'
            << "format version: " << w.header.version << '\n'
            << "checksum: " << crc << '\n'
            << "classes: " << w.header.num_classes << '\n'
            << "reg_max: " << w.header.reg_max << '\n'
            << "stored form: " << (g.fused ? "fused" : "unfused") << '\n'
            << "layers (unfused): " << count_layers(unfused) << '\n'
            << "layers (fused): " << count_layers(fused) << '\n'
            << "parameters (unfused): " << count_parameters(unfused) << '\n'
            << "parameters (fused): " << count_parameters(fused) << '\n';
  std::cout << "\n" << std::left;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s %12s\n", "Layer", "Filters", "Size", "Repeat", "Channels", "Output");
  std::cout << buf;
  for (const auto& l : g.layers) {
    const std::string size = l.kernel ? std::to_string(l.kernel) + "x" + std::to_string(l.kernel) +
                                            (l.stride > 1 ? "/" + std::to_string(l.stride) : "")
                                      : "-";
    const std::string outsz = l.out_h ? std::to_string(l.out_h) + "x" + std::to_string(l.out_w) : "multi";
    std::snprintf(buf, sizeof buf, "%-10s %8zu %8s %8zu %8zu %12s\n", l.table_label().c_str(), l.filters, size.c_str(),
                  l.repeat, l.out_channels, outsz.c_str());
    std::cout << buf;
  }
  return kOk;
}

struct GenOptions {
  std::string out;
  std::size_t classes = 2;
  std::size_t reg_max = 16;
  std::string mode = "random";
  std::vector<double> fixture_box;
  int fixture_class = 0;
  bool fused = false;
};

int cmd_gen_weights(const CommonOptions& opt, const GenOptions& go) {
  const Graph g = build_graph(go.classes, go.reg_max);
  WeightStore w;
  if (go.mode == "random") {
    w = random_weights(g, opt.seed);
  } else if (go.mode == "zero") {
    w = zero_weights(g);
  } else if (go.mode == "silent") {
    w = silent_weights(g, opt.seed);
  } else if (go.mode == "fixture") {
    if (go.fixture_box.size() != 4) throw ArgumentError("--fixture-box needs x1,y1,x2,y2");
    w = fixture_weights(g, {go.fixture_class, go.fixture_box[0], go.fixture_box[1], go.fixture_box[2], go.fixture_box[3]});
  } else {
    throw ArgumentError("unknown --mode " + go.mode);
  }
  if (go.fused) w = fuse(g, w).second;
  save_weights(w, go.out);
  char crc[16];
  std::snprintf(crc, sizeof crc, "0x%08x", w.header.checksum);
  std::cout << "wrote " << go.out << " (" << go.mode << ", " << go.classes << " classes, reg_max " << go.reg_max
            << ", " << w.entries.size() << " entries, checksum " << crc << ")\n";
  return kOk;
}

// Config file: "key = value" lines (key = long flag name) apply to every
// subcommand with that flag; "[detect]" style sections target one subcommand.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> out;
    for (const auto& item : CLI::ConfigINI::from_config(input)) {
      if (!item.parents.empty()) {
        out.push_back(item);
        continue;
      }
      bool used = false;
      for (const CLI::App* sub : app_->get_subcommands({})) {
        if (sub->get_option_no_throw("--" + item.name) == nullptr) continue;
        CLI::ConfigItem copy = item;
        copy.parents = {sub->get_name()};
        out.push_back(std::move(copy));
        used = true;
      }
      if (!used) out.push_back(item);
    }
    return out;
  }

 private:
  const CLI::App* app_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical lens defect inspection: YOLOv8n inference, evaluation, augmentation, stream timing"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config follow the subcommand name
  app.set_config("--config", "", "Key-value config file (key = value); flags override it");
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  CommonOptions opt;
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--weights", opt.weights, "Weight file")->required();
    sub->add_option("--conf", opt.conf, "Detection confidence threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--nms-iou", opt.nms_iou, "NMS IoU threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--max-det", opt.max_det, "Maximum detections per image");
    sub->add_option("--threads", opt.threads, "Convolution worker threads")->check(CLI::Range(1u, 256u));
    sub->add_option("--names", opt.names, "Class names by id")->delimiter(',');
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Seed for randomized paths");
  };

  std::vector<std::string> images;
  auto* detect = app.add_subcommand("detect", "Detect lenses and defects in images");
  detect->add_option("images", images, "Image files (PNG/JPEG)")->required();
  add_model_flags(detect);
  add_common(detect);

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Evaluate a dataset split and write metric reports");
  eval->add_option("manifest", eo.manifest, "Dataset manifest")->required();
  eval->add_option("--weights", opt.weights, "Weight file (not needed with --oracle-inject)");
  eval->add_option("--conf", eo.eval_conf, "Confidence threshold for P/R/F1 and confusion matrix")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--det-conf", eo.det_conf, "Detector confidence floor for mAP/PR curves")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--nms-iou", opt.nms_iou, "NMS IoU threshold")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--eval-iou", eo.eval_iou, "IoU threshold for a correct detection")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--max-det", opt.max_det, "Maximum detections per image");
  eval->add_option("--split", eo.split, "Split to evaluate (train/val/test)");
  eval->add_option("--jobs", eo.jobs, "Images evaluated in parallel")->check(CLI::Range(1u, 256u));
  eval->add_option("--threads", opt.threads, "Convolution worker threads")->check(CLI::Range(1u, 256u));
  eval->add_flag("--oracle-inject", eo.oracle_inject, "Use ground truth as detections (validates the metric path)");
  add_common(eval);

  std::string frames_dir;
  double fps = 10.0;
  auto* stream = app.add_subcommand("stream", "Replay a frame directory as a conveyor feed and report stage timings");
  stream->add_option("frames", frames_dir, "Directory of frames, processed in lexicographic order")->required();
  stream->add_option("--fps", fps, "Conveyor frame arrival rate")->check(CLI::PositiveNumber);
  add_model_flags(stream);
  add_common(stream);

  std::string aug_manifest;
  AugmentRunConfig aug;
  auto* augment = app.add_subcommand("augment", "Write an augmented copy of a dataset");
  augment->add_option("manifest", aug_manifest, "Dataset manifest")->required();
  augment->add_option("--multiplier", aug.multiplier, "Variants per source image")->check(CLI::PositiveNumber);
  augment->add_option("--split", aug.splits, "Splits to augment")->delimiter(',');
  augment->add_option("--jobs", aug.jobs, "Images processed in parallel")->check(CLI::Range(1u, 256u));
  augment->add_option("--max-rotation", aug.policy.max_rotation, "Rotation range in degrees")->check(CLI::Range(0.0, 180.0));
  augment->add_option("--flip-prob", aug.policy.flip_probability, "Probability of a flip")->check(CLI::Range(0.0, 1.0));
  augment->add_option("--max-shift", aug.policy.max_shift, "Shift range as a fraction of size")->check(CLI::Range(0.0, 0.5));
  augment->add_option("--blur-prob", aug.policy.blur_probability, "Probability of Gaussian blur")->check(CLI::Range(0.0, 1.0));
  augment->add_option("--max-blur-sigma", aug.policy.max_blur_sigma, "Largest blur sigma")->check(CLI::NonNegativeNumber);
  augment->add_option("--min-visible", aug.policy.options.min_visible, "Drop boxes keeping less area than this")->check(CLI::Range(0.0, 1.0));
  add_common(augment);

  std::string info_path;
  auto* info = app.add_subcommand("info", "Summarize a weight file");
  info->add_option("weights", info_path, "Weight file")->required();

  GenOptions go;
  auto* gen = app.add_subcommand("gen-weights", "Write a synthetic weight file");
  gen->add_option("--out", go.out, "Output weight file")->required();
  gen->add_option("--classes", go.classes, "Number of classes")->check(CLI::PositiveNumber);
  gen->add_option("--reg-max", go.reg_max, "DFL bins per box side")->check(CLI::Range(2, 64));
  gen->add_option("--mode", go.mode, "random | zero | silent | fixture")
      ->check(CLI::IsMember({"random", "zero", "silent", "fixture"}));
  gen->add_option("--fixture-box", go.fixture_box, "Fixture box x1,y1,x2,y2 in 640x640 input pixels")->delimiter(',');
  gen->add_option("--fixture-class", go.fixture_class, "Fixture class id");
  gen->add_flag("--fused", go.fused, "Store the BN-fused form");
  gen->add_option("--seed", opt.seed, "Seed for random weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*detect) return cmd_detect(opt, images);
    if (*eval) return cmd_eval(opt, eo);
    if (*stream) return cmd_stream(opt, frames_dir, fps);
    if (*augment) return cmd_augment(opt, aug_manifest, aug);
    if (*info) return cmd_info(info_path);
    if (*gen) return cmd_gen_weights(opt, go);
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kModel;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
