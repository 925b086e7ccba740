/*
 * Copyright 2026 The ladp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LADP_DATASET_IO_H_
#define LADP_DATASET_IO_H_

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ladp/dataset.h"
#include "ladp/status.h"

namespace ladp {

enum class DatasetFormat { kCsvLabeled, kIdxPair };

namespace io_internal {

inline std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::uint32_t ReadBigEndian32(std::string_view bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size()) {
    throw Error(ErrorCode::kFormatError, path + ": truncated header at byte offset " + std::to_string(offset));
  }
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

}  // namespace io_internal

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// CSV with one sample per line: label, then input_dim comma-separated values.
// No header. Blank lines are skipped.
inline Dataset ParseCsvLabeled(std::string_view text, const std::string& origin = "<csv>") {
  Dataset data;
  std::size_t line_start = 0;
  int max_label = -1;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string line(text.substr(line_start, line_end - line_start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      std::vector<double> values;
      int label = 0;
      std::size_t field_start = 0;
      bool first = true;
      while (true) {
        std::size_t comma = line.find(',', field_start);
        const std::string field = line.substr(field_start, comma == std::string::npos ? std::string::npos
                                                                                      : comma - field_start);
        const std::size_t offset = line_start + field_start;
        const char* begin = field.c_str();
        char* end = nullptr;
        errno = 0;
        if (first) {
          const long v = std::strtol(begin, &end, 10);
          if (end == begin || *end != '\0' || errno != 0 || v < 0) {
            throw Error(ErrorCode::kFormatError, origin + ": bad label '" + field + "' at byte offset " +
                                                     std::to_string(offset));
          }
          label = static_cast<int>(v);
          first = false;
        } else {
          const double v = std::strtod(begin, &end);
          if (end == begin || *end != '\0' || errno != 0 || !std::isfinite(v)) {
            throw Error(ErrorCode::kFormatError, origin + ": bad value '" + field + "' at byte offset " +
                                                     std::to_string(offset));
          }
          values.push_back(v);
        }
        if (comma == std::string::npos) break;
        field_start = comma + 1;
      }
      if (values.empty()) {
        throw Error(ErrorCode::kFormatError, origin + ": row without features at byte offset " +
                                                 std::to_string(line_start));
      }
      if (data.labels.empty()) {
        data.input_dim = values.size();
      } else if (values.size() != data.input_dim) {
        throw Error(ErrorCode::kDimensionMismatch, origin + ": row at byte offset " + std::to_string(line_start) +
                                                       " has " + std::to_string(values.size()) +
                                                       " values, expected " + std::to_string(data.input_dim));
      }
      data.Append(values, label);
      max_label = std::max(max_label, label);
    }
    line_start = line_end + 1;
  }
  if (data.labels.empty()) throw Error(ErrorCode::kFormatError, origin + ": no samples");
  data.num_classes = static_cast<std::size_t>(max_label) + 1;
  return data;
}

inline Dataset LoadCsvLabeled(const std::string& path) {
  return ParseCsvLabeled(io_internal::ReadFileBytes(path), path);
}

inline std::string FormatCsvLabeled(const Dataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data.labels[i]);
    for (double v : data.row(i)) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<int> ParseIdxLabels(std::string_view bytes, const std::string& origin = "<idx>") {
  const std::uint32_t magic = io_internal::ReadBigEndian32(bytes, 0, origin);
  if (magic != kIdxLabelsMagic) {
    throw Error(ErrorCode::kFormatError, origin + ": bad label magic at byte offset 0");
  }
  const std::uint32_t count = io_internal::ReadBigEndian32(bytes, 4, origin);
  if (bytes.size() < 8 + static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::kFormatError, origin + ": truncated label data at byte offset " +
                                             std::to_string(bytes.size()));
  }
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<unsigned char>(bytes[8 + i]);
  return labels;
}

struct IdxImages {
  std::size_t count;
  std::size_t pixels_per_image;
  std::vector<double> values;  // scaled to [0, 1]
};

inline IdxImages ParseIdxImages(std::string_view bytes, const std::string& origin = "<idx>") {
  const std::uint32_t magic = io_internal::ReadBigEndian32(bytes, 0, origin);
  if (magic != kIdxImagesMagic) {
    throw Error(ErrorCode::kFormatError, origin + ": bad image magic at byte offset 0");
  }
  const std::size_t count = io_internal::ReadBigEndian32(bytes, 4, origin);
  const std::size_t rows = io_internal::ReadBigEndian32(bytes, 8, origin);
  const std::size_t cols = io_internal::ReadBigEndian32(bytes, 12, origin);
  const std::size_t pixels = rows * cols;
  if (pixels == 0) throw Error(ErrorCode::kFormatError, origin + ": zero image size at byte offset 8");
  if (rows > bytes.size() || cols > bytes.size() || count > (bytes.size() - 16) / pixels) {
    throw Error(ErrorCode::kFormatError, origin + ": truncated image data at byte offset " +
                                             std::to_string(bytes.size()));
  }
  IdxImages out{count, pixels, std::vector<double>(count * pixels)};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = static_cast<unsigned char>(bytes[16 + i]) / 255.0;
  }
  return out;
}

inline Dataset LoadIdxPair(const std::string& images_path, const std::string& labels_path) {
  IdxImages images = ParseIdxImages(io_internal::ReadFileBytes(images_path), images_path);
  std::vector<int> labels = ParseIdxLabels(io_internal::ReadFileBytes(labels_path), labels_path);
  if (labels.size() != images.count) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(images.count) + " images but " +
                                                   std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::kFormatError, images_path + ": no samples");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  return Dataset{images.pixels_per_image, static_cast<std::size_t>(max_label) + 1, std::move(images.values),
                 std::move(labels)};
}

}  // namespace ladp

#endif  // LADP_DATASET_IO_H_
