// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// PNG/JPEG decode and encode. Decoding never applies the EXIF orientation
// itself; the tag is returned so auto_orient() stays the single place where
// orientation is corrected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "lensinspect/error.hpp"
#include "lensinspect/image.hpp"

namespace lensinspect {

struct DecodedImage {
  Image image;
  int orientation = 1;  // EXIF tag, 1 when absent
};

/// EXIF orientation from a JPEG's APP1 segment; 1 when absent or unreadable.
inline int exif_orientation(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8) return 1;
  std::size_t pos = 2;
  while (pos + 4 <= bytes.size() && bytes[pos] == 0xFF) {
    const std::uint8_t marker = bytes[pos + 1];
    if (marker == 0xDA || marker == 0xD9) break;  // start of scan / end of image
    const std::size_t len = (static_cast<std::size_t>(bytes[pos + 2]) << 8) | bytes[pos + 3];
    const std::size_t seg = pos + 4;
    if (len < 2 || seg + len - 2 > bytes.size()) break;
    if (marker == 0xE1 && len >= 16 && std::equal(bytes.begin() + static_cast<std::ptrdiff_t>(seg),
                                                  bytes.begin() + static_cast<std::ptrdiff_t>(seg) + 6,
                                                  "Exif\0\0")) {
      const std::size_t tiff = seg + 6;
      const std::size_t end = seg + len - 2;
      const bool le = bytes[tiff] == 'I';
      auto u16 = [&](std::size_t p) -> std::uint32_t {
        if (p + 2 > end) return 0;
        return le ? (bytes[p] | (bytes[p + 1] << 8)) : ((bytes[p] << 8) | bytes[p + 1]);
      };
      auto u32 = [&](std::size_t p) -> std::uint32_t {
        if (p + 4 > end) return 0;
        return le ? (u16(p) | (u16(p + 2) << 16)) : ((u16(p) << 16) | u16(p + 2));
      };
      const std::size_t ifd = tiff + u32(tiff + 4);
      const std::uint32_t entries = u16(ifd);
      for (std::uint32_t e = 0; e < entries; ++e) {
        const std::size_t ent = ifd + 2 + 12 * e;
        if (ent + 12 > end) break;
        if (u16(ent) == 0x0112) return static_cast<int>(u16(ent + 8));
      }
      return 1;
    }
    pos = seg + len - 2;
  }
  return 1;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline DecodedImage decode_image(const std::vector<std::uint8_t>& bytes, const std::string& what = "image") {
  if (bytes.empty()) throw DataError(what + ": empty file");
  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  const cv::Mat bgr = cv::imdecode(raw, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
  if (bgr.empty()) throw DataError(what + ": not a decodable PNG/JPEG image");
  DecodedImage out;
  out.image = Image(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.image.at(x, y, 0) = row[x][2];
      out.image.at(x, y, 1) = row[x][1];
      out.image.at(x, y, 2) = row[x][0];
    }
  }
  out.orientation = exif_orientation(bytes);
  return out;
}

inline DecodedImage read_image(const std::filesystem::path& path) {
  return decode_image(read_file_bytes(path), path.string());
}

/// Decodes and applies the orientation tag.
inline Image read_oriented(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
  DecodedImage d = read_image(path);
  return auto_orient(d.image, d.orientation, warnings);
}

/// Encodes by extension (".png", ".jpg"/".jpeg").
inline std::vector<std::uint8_t> encode_image(const Image& img, const std::string& ext) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) row[x] = cv::Vec3b(img.at(x, y, 2), img.at(x, y, 1), img.at(x, y, 0));
  }
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(ext, bgr, buf)) throw DataError("cannot encode image as " + ext);
  return buf;
}

inline void write_image(const std::filesystem::path& path, const Image& img) {
  const auto bytes = encode_image(img, path.extension().string());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

}  // namespace lensinspect
