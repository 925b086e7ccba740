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
#ifndef LADP_DATASET_H_
#define LADP_DATASET_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ladp/status.h"

namespace ladp {

// Labeled samples stored row-major: sample i occupies
// features[i * input_dim, (i + 1) * input_dim).
struct Dataset {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * input_dim, input_dim);
  }

  void Append(std::span<const double> x, int label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }

  Dataset EmptyLike() const { return Dataset{input_dim, num_classes, {}, {}}; }

  Dataset Subset(std::span<const std::size_t> indices) const {
    Dataset out = EmptyLike();
    out.features.reserve(indices.size() * input_dim);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.Append(row(i), labels[i]);
    return out;
  }

  std::vector<std::size_t> LabelCounts() const {
    std::vector<std::size_t> counts(num_classes, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  void Validate() const {
    if (features.size() != labels.size() * input_dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "feature buffer holds " + std::to_string(features.size()) + " values for " +
                      std::to_string(labels.size()) + " samples of dim " + std::to_string(input_dim));
    }
    for (int y : labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
        throw Error(ErrorCode::kInvalidParams, "label " + std::to_string(y) + " outside [0, " +
                                                   std::to_string(num_classes) + ")");
      }
    }
  }
};

}  // namespace ladp

#endif  // LADP_DATASET_H_
