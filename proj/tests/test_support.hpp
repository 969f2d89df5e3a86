// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lensinspect/image.hpp"
#include "lensinspect/rng.hpp"
#include "lensinspect/tensor.hpp"

namespace testing_support {

inline lensinspect::Tensor random_tensor(lensinspect::Shape s, lensinspect::Rng& rng, double lo = -1, double hi = 1) {
  lensinspect::Tensor t(s);
  for (float& v : t.mutable_data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

inline lensinspect::Image random_image(int w, int h, std::uint64_t seed) {
  lensinspect::Rng rng(seed);
  lensinspect::Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lensinspect_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
