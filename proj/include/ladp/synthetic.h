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
#ifndef LADP_SYNTHETIC_H_
#define LADP_SYNTHETIC_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ladp/dataset.h"
#include "ladp/rng.h"
#include "ladp/status.h"
#include "ladp/tensor.h"

namespace ladp {

struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t samples_per_class = 200;
  std::size_t input_dim = 32;
  double separation = 3.0;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Gaussian blobs: class c is centred at separation * u_c for a seeded random
// unit vector u_c, with identity covariance. Samples are stored class-major.
inline Dataset GenerateSynthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.classes < 2 || spec.samples_per_class == 0 || spec.input_dim == 0 || !(spec.separation >= 0.0) ||
      !std::isfinite(spec.separation)) {
    throw Error(ErrorCode::kInvalidParams, "need classes >= 2, positive sizes and separation >= 0");
  }
  const RngStream root = RngStream(seed).Child(Purpose::kSynthetic);
  Dataset data{spec.input_dim, spec.classes, {}, {}};
  data.features.reserve(spec.classes * spec.samples_per_class * spec.input_dim);
  std::vector<double> x(spec.input_dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    Tensor direction = SampleGaussian({spec.input_dim}, 0.0, 1.0, root.Child({0, c}));
    const double norm = L2Norm(direction);
    RandomEngine engine(root.Child({1, c}));
    for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
      for (std::size_t d = 0; d < spec.input_dim; ++d) {
        x[d] = spec.separation * direction[d] / norm + engine.Normal();
      }
      data.Append(x, static_cast<int>(c));
    }
  }
  return data;
}

}  // namespace ladp

#endif  // LADP_SYNTHETIC_H_
