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
#ifndef LADP_TENSOR_H_
#define LADP_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ladp/rng.h"
#include "ladp/status.h"

namespace ladp {

using Shape = std::vector<std::size_t>;

inline std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string ShapeString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major tensor of doubles. Construction checks that the shape and
// data agree, that no dimension is zero, and that every value is finite.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(ShapeSize(shape_), 0.0) {
    CheckShape();
  }

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    CheckShape();
    if (data_.size() != ShapeSize(shape_)) {
      throw Error(ErrorCode::kShapeMismatch, "shape " + ShapeString(shape_) + " needs " +
                                                 std::to_string(ShapeSize(shape_)) + " values, got " +
                                                 std::to_string(data_.size()));
    }
    CheckFinite();
  }

  static Tensor Vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.size(); }

  std::span<const double> values() const { return data_; }
  std::span<double> mutable_values() { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // 2-D access; only meaningful for rank-2 tensors.
  double at(std::size_t row, std::size_t col) const { return data_[row * shape_[1] + col]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * shape_[1] + col]; }

  void CheckFinite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw Error(ErrorCode::kNonFinite, "tensor entry " + std::to_string(i) + " is not finite");
      }
    }
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  void CheckShape() const {
    for (std::size_t d : shape_) {
      if (d == 0) throw Error(ErrorCode::kShapeMismatch, "zero-sized dimension in " + ShapeString(shape_));
    }
  }

  Shape shape_;
  std::vector<double> data_;
};

inline double L2Norm(std::span<const double> values) {
  // Scaled accumulation avoids overflow for very large entries.
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) {
    const double r = v / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

inline double L2Norm(const Tensor& t) { return L2Norm(t.values()); }

inline Tensor Flatten(const Tensor& t) {
  return Tensor({t.size()}, std::vector<double>(t.values().begin(), t.values().end()));
}

inline Tensor Softmax(const Tensor& t) {
  if (t.rank() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "softmax expects a 1-D tensor, got " + ShapeString(t.shape()));
  }
  const auto in = t.values();
  const double max = *std::max_element(in.begin(), in.end());
  std::vector<double> out(in.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  // exp underflow can produce exact zeros; the output must stay strictly
  // positive for the KL divergence to be defined.
  for (double& v : out) v = std::max(v, std::numeric_limits<double>::min());
  return Tensor::Vector(std::move(out));
}

inline constexpr double kDistributionSumTolerance = 1e-9;

// KL(p || q) in nats. Inputs must already be distributions; nothing is
// renormalized here.
inline double KlDivergence(const Tensor& p, const Tensor& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kMismatchedLength,
                "p has " + std::to_string(p.size()) + " entries, q has " + std::to_string(q.size()));
  }
  auto check = [](const Tensor& d, const char* name) {
    double sum = 0.0;
    for (double v : d.values()) {
      if (!(v > 0.0)) {
        throw Error(ErrorCode::kNotADistribution, std::string(name) + " has a non-positive entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
      throw Error(ErrorCode::kNotADistribution,
                  std::string(name) + " sums to " + std::to_string(sum));
    }
  };
  check(p, "p");
  check(q, "q");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

inline Tensor SampleGaussian(const Shape& shape, double mean, double stddev, const RngStream& stream) {
  if (!(stddev >= 0.0)) {
    throw Error(ErrorCode::kNegativeStd, "stddev " + std::to_string(stddev));
  }
  Tensor out(shape);
  auto values = out.mutable_values();
  if (stddev == 0.0) {
    std::fill(values.begin(), values.end(), mean);
    return out;
  }
  RandomEngine engine(stream);
  for (double& v : values) v = mean + stddev * engine.Normal();
  out.CheckFinite();
  return out;
}

}  // namespace ladp

#endif  // LADP_TENSOR_H_
