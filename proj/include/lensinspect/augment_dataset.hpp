// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "lensinspect/augment.hpp"
#include "lensinspect/dataset.hpp"
#include "lensinspect/image_io.hpp"
#include "lensinspect/rng.hpp"

namespace lensinspect {

struct AugmentRunConfig {
  AugmentPolicy policy;
  std::size_t multiplier = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> splits{"train"};
  unsigned jobs = 1;
};

struct AugmentReport {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t boxes_in = 0;
  std::size_t boxes_out = 0;
  std::size_t failed_inputs = 0;
  std::vector<std::string> diagnostics;
  std::filesystem::path manifest;
  std::map<std::string, std::vector<ImageRecord>> splits;
};

/// Writes `multiplier` augmented variants of every image of the selected
/// splits under out_dir/images/<split>/ and out_dir/labels/<split>/, plus
/// out_dir/manifest.json. Variant k of image i (global index over the
/// selected splits) uses the seed derive_seed(seed, i * multiplier + k), so
/// output does not depend on `jobs`. A write failure aborts the run with a
/// DataError that reports how many outputs were already written.
inline AugmentReport augment_dataset(const Dataset& ds, const std::filesystem::path& out_dir,
                                     const AugmentRunConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.multiplier == 0) throw ArgumentError("augment: multiplier must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw DataError("augment: cannot create output directory " + out_dir.string());

  struct Job {
    std::string split;
    std::size_t index;  // within split
    std::size_t global;
    const Sample* sample;
  };
  std::vector<Job> jobs;
  std::size_t global = 0;
  for (const auto& split : cfg.splits) {
    auto it = ds.splits.find(split);
    if (it == ds.splits.end()) continue;
    for (std::size_t i = 0; i < it->second.size(); ++i) jobs.push_back({split, i, global++, &it->second[i]});
  }

  AugmentReport rep;
  rep.inputs = jobs.size();
  // Slot per (job, variant) keeps the manifest order independent of scheduling.
  std::vector<std::optional<ImageRecord>> produced(jobs.size() * cfg.multiplier);
  std::vector<std::size_t> boxes_out(jobs.size(), 0);
  std::vector<std::string> job_diag(jobs.size());
  std::atomic<std::size_t> written{0};
  std::mutex fail_mu;
  std::string failure;

  for (const auto& split : cfg.splits) {
    fs::create_directories(out_dir / "images" / split, ec);
    fs::create_directories(out_dir / "labels" / split, ec);
  }

  detail::parallel_for(jobs.size(), cfg.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      {
        std::lock_guard lock(fail_mu);
        if (!failure.empty()) return;
      }
      const Job& job = jobs[j];
      Image src;
      try {
        src = read_oriented(job.sample->record.image);
      } catch (const DataError& e) {
        job_diag[j] = e.what();
        continue;
      }
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "%05zu_", job.index);
      const std::string stem = prefix + job.sample->record.image.stem().string();
      for (std::size_t k = 0; k < cfg.multiplier; ++k) {
        const AugmentSpec spec = sample_spec(cfg.policy, derive_seed(cfg.seed, job.global * cfg.multiplier + k));
        auto [img, anns] = apply(src, job.sample->annotations, spec, cfg.policy.options);
        const std::string name = stem + "_aug" + std::to_string(k);
        ImageRecord rec{out_dir / "images" / job.split / (name + ".png"), out_dir / "labels" / job.split / (name + ".txt")};
        try {
          write_image(rec.image, img);
          write_label_file(rec.label, anns);
        } catch (const DataError& e) {
          std::lock_guard lock(fail_mu);
          if (failure.empty()) failure = e.what();
          return;
        }
        ++written;
        boxes_out[j] += anns.size();
        produced[j * cfg.multiplier + k] = std::move(rec);
      }
    }
  });

  if (!failure.empty()) {
    throw DataError("augment: aborted after writing " + std::to_string(written.load()) + " of " +
                    std::to_string(jobs.size() * cfg.multiplier) + " outputs: " + failure);
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    rep.boxes_in += jobs[j].sample->annotations.size();
    rep.boxes_out += boxes_out[j];
    if (!job_diag[j].empty()) {
      ++rep.failed_inputs;
      rep.diagnostics.push_back(job_diag[j]);
    }
    for (std::size_t k = 0; k < cfg.multiplier; ++k) {
      if (auto& r = produced[j * cfg.multiplier + k]) {
        rep.splits[jobs[j].split].push_back(*r);
        ++rep.outputs;
      }
    }
  }
  rep.manifest = out_dir / "manifest.json";
  write_manifest(rep.manifest, ds.manifest.class_names, rep.splits, out_dir);
  return rep;
}

}  // namespace lensinspect
