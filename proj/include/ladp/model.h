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
#ifndef LADP_MODEL_H_
#define LADP_MODEL_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ladp/dataset.h"
#include "ladp/rng.h"
#include "ladp/status.h"
#include "ladp/tensor.h"

namespace ladp {

// Dense ReLU classifier: layer_sizes = {input_dim, hidden..., num_classes},
// trained with mean softmax cross-entropy.
struct ModelSpec {
  std::vector<std::size_t> layer_sizes;

  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t num_classes() const { return layer_sizes.back(); }

  void Validate() const {
    if (layer_sizes.size() < 2) {
      throw Error(ErrorCode::kInvalidParams, "layer_sizes needs at least input and output sizes");
    }
    for (std::size_t s : layer_sizes) {
      if (s == 0) throw Error(ErrorCode::kInvalidParams, "layer sizes must be positive");
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct DenseLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]

  std::size_t in() const { return weight.shape()[1]; }
  std::size_t out() const { return weight.shape()[0]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// One tensor pair per dense layer; layer_id is the index. The tag keeps
// parameters and gradients from being mixed up at compile time.
template <class Tag>
struct LayerStack {
  std::vector<DenseLayer> layers;

  std::size_t num_layers() const { return layers.size(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  friend bool operator==(const LayerStack&, const LayerStack&) = default;
};

struct ParamsTag {};
struct GradientsTag {};
using ModelParams = LayerStack<ParamsTag>;
using Gradients = LayerStack<GradientsTag>;

template <class A, class B>
bool ShapeCongruent(const LayerStack<A>& a, const LayerStack<B>& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t j = 0; j < a.layers.size(); ++j) {
    if (a.layers[j].weight.shape() != b.layers[j].weight.shape() ||
        a.layers[j].bias.shape() != b.layers[j].bias.shape()) {
      return false;
    }
  }
  return true;
}

template <class A, class B>
void RequireCongruent(const LayerStack<A>& a, const LayerStack<B>& b) {
  if (!ShapeCongruent(a, b)) throw Error(ErrorCode::kShapeMismatch, "layer stacks differ in shape");
}

// Global L2 norm across every weight and bias.
template <class Tag>
double GlobalNorm(const LayerStack<Tag>& stack) {
  std::vector<double> all;
  all.reserve(stack.num_parameters());
  for (const auto& l : stack.layers) {
    all.insert(all.end(), l.weight.values().begin(), l.weight.values().end());
    all.insert(all.end(), l.bias.values().begin(), l.bias.values().end());
  }
  return L2Norm(all);
}

// Weight and bias of one layer concatenated; the unit of selection,
// estimation and noise.
inline Tensor LayerVector(const DenseLayer& layer) {
  std::vector<double> v(layer.weight.values().begin(), layer.weight.values().end());
  v.insert(v.end(), layer.bias.values().begin(), layer.bias.values().end());
  return Tensor::Vector(std::move(v));
}

inline DenseLayer LayerFromVector(const Tensor& v, const DenseLayer& like) {
  if (v.size() != like.weight.size() + like.bias.size()) {
    throw Error(ErrorCode::kShapeMismatch, "layer vector length does not match layer");
  }
  const auto values = v.values();
  const auto split = values.begin() + static_cast<std::ptrdiff_t>(like.weight.size());
  return DenseLayer{Tensor(like.weight.shape(), std::vector<double>(values.begin(), split)),
                    Tensor(like.bias.shape(), std::vector<double>(split, values.end()))};
}

// Glorot-uniform weights, zero biases.
inline ModelParams InitializeModel(const ModelSpec& spec, const RngStream& stream) {
  spec.Validate();
  ModelParams params;
  RandomEngine engine(stream);
  for (std::size_t j = 0; j < spec.num_layers(); ++j) {
    const std::size_t in = spec.layer_sizes[j];
    const std::size_t out = spec.layer_sizes[j + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& v : w) v = (2.0 * engine.Uniform() - 1.0) * a;
    params.layers.push_back(DenseLayer{Tensor({out, in}, std::move(w)), Tensor({out})});
  }
  return params;
}

template <class Tag>
LayerStack<Tag> ZerosLike(const ModelParams& params) {
  LayerStack<Tag> out;
  for (const auto& l : params.layers) {
    out.layers.push_back(DenseLayer{Tensor(l.weight.shape()), Tensor(l.bias.shape())});
  }
  return out;
}

struct Batch {
  Tensor inputs;  // [b x input_dim]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

inline Batch MakeBatch(const Dataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::kEmptyDataset, "batch needs at least one sample");
  std::vector<double> x;
  x.reserve(indices.size() * data.input_dim);
  std::vector<int> y;
  y.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = data.row(i);
    x.insert(x.end(), r.begin(), r.end());
    y.push_back(data.labels[i]);
  }
  return Batch{Tensor({indices.size(), data.input_dim}, std::move(x)), std::move(y)};
}

inline Batch MakeBatch(const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return MakeBatch(data, all);
}

namespace model_internal {

inline void CheckBatch(const ModelParams& params, const Batch& batch) {
  if (params.layers.empty()) throw Error(ErrorCode::kShapeMismatch, "model has no layers");
  if (batch.size() == 0) throw Error(ErrorCode::kShapeMismatch, "empty batch");
  if (batch.inputs.rank() != 2 || batch.inputs.shape()[0] != batch.size() ||
      batch.inputs.shape()[1] != params.layers.front().in()) {
    throw Error(ErrorCode::kShapeMismatch, "batch inputs " + ShapeString(batch.inputs.shape()) +
                                               " do not match model input dim " +
                                               std::to_string(params.layers.front().in()));
  }
  for (std::size_t j = 1; j < params.layers.size(); ++j) {
    if (params.layers[j].in() != params.layers[j - 1].out()) {
      throw Error(ErrorCode::kShapeMismatch, "layer " + std::to_string(j) + " input mismatch");
    }
  }
  const std::size_t k = params.layers.back().out();
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw Error(ErrorCode::kShapeMismatch, "label " + std::to_string(y) + " outside class range");
    }
  }
}

// Pre-activations of every layer for a batch: z[j] is [b x out_j] row-major.
// Hidden layers feed relu(z) forward; the last z holds the logits.
inline std::vector<std::vector<double>> ForwardPass(const ModelParams& params, const Batch& batch) {
  const std::size_t b = batch.size();
  std::vector<std::vector<double>> z;
  z.reserve(params.layers.size());
  std::vector<double> activation(batch.inputs.values().begin(), batch.inputs.values().end());
  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    const DenseLayer& layer = params.layers[j];
    const std::size_t in = layer.in();
    const std::size_t out = layer.out();
    std::vector<double> pre(b * out);
    for (std::size_t s = 0; s < b; ++s) {
      const double* a = &activation[s * in];
      for (std::size_t o = 0; o < out; ++o) {
        double acc = layer.bias[o];
        const double* w = &layer.weight.values()[o * in];
        for (std::size_t i = 0; i < in; ++i) acc += w[i] * a[i];
        pre[s * out + o] = acc;
      }
    }
    z.push_back(pre);
    if (j + 1 < params.layers.size()) {
      for (double& v : pre) v = std::max(v, 0.0);
      activation = std::move(pre);
    }
  }
  return z;
}

// log-sum-exp of one logit row.
inline double LogSumExp(std::span<const double> row) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  return m + std::log(s);
}

// -log softmax(row)[label]. The max term contributes exactly exp(0) = 1, so
// the rest goes through log1p to keep confident predictions accurate.
inline double CrossEntropy(std::span<const double> row, std::size_t label) {
  const auto top = std::max_element(row.begin(), row.end());
  const double m = *top;
  double rest = 0.0;
  for (auto it = row.begin(); it != row.end(); ++it) {
    if (it != top) rest += std::exp(*it - m);
  }
  return (m - row[label]) + std::log1p(rest);
}

}  // namespace model_internal

struct ForwardResult {
  double loss;
  Tensor logits;  // [b x num_classes]
};

inline ForwardResult ForwardLoss(const ModelParams& params, const Batch& batch) {
  model_internal::CheckBatch(params, batch);
  auto z = model_internal::ForwardPass(params, batch);
  const std::size_t b = batch.size();
  const std::size_t k = params.layers.back().out();
  std::vector<double>& logits = z.back();
  double loss = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    std::span<const double> row(&logits[s * k], k);
    loss += model_internal::CrossEntropy(row, static_cast<std::size_t>(batch.labels[s]));
  }
  loss /= static_cast<double>(b);
  if (!std::isfinite(loss)) throw Error(ErrorCode::kNonFinite, "loss is not finite");
  return ForwardResult{loss, Tensor({b, k}, std::move(logits))};
}

// Exact gradient of ForwardLoss(params, batch).loss.
inline Gradients Backward(const ModelParams& params, const Batch& batch) {
  model_internal::CheckBatch(params, batch);
  const auto z = model_internal::ForwardPass(params, batch);
  const std::size_t b = batch.size();
  const std::size_t depth = params.layers.size();
  const double inv_b = 1.0 / static_cast<double>(b);

  // dL/dz for the output layer: (softmax - onehot) / b.
  const std::size_t k = params.layers.back().out();
  std::vector<double> delta(b * k);
  for (std::size_t s = 0; s < b; ++s) {
    std::span<const double> row(&z.back()[s * k], k);
    const double lse = model_internal::LogSumExp(row);
    for (std::size_t c = 0; c < k; ++c) delta[s * k + c] = std::exp(row[c] - lse) * inv_b;
    delta[s * k + static_cast<std::size_t>(batch.labels[s])] -= inv_b;
  }

  Gradients grads = ZerosLike<GradientsTag>(params);
  for (std::size_t jj = depth; jj-- > 0;) {
    const DenseLayer& layer = params.layers[jj];
    const std::size_t in = layer.in();
    const std::size_t out = layer.out();
    // Input activation of this layer.
    std::vector<double> a;
    if (jj == 0) {
      a.assign(batch.inputs.values().begin(), batch.inputs.values().end());
    } else {
      a = z[jj - 1];
      for (double& v : a) v = std::max(v, 0.0);
    }
    auto gw = grads.layers[jj].weight.mutable_values();
    auto gb = grads.layers[jj].bias.mutable_values();
    for (std::size_t s = 0; s < b; ++s) {
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[s * out + o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* gw_row = &gw[o * in];
        const double* a_row = &a[s * in];
        for (std::size_t i = 0; i < in; ++i) gw_row[i] += d * a_row[i];
      }
    }
    if (jj == 0) break;
    std::vector<double> prev(b * in, 0.0);
    const auto w = layer.weight.values();
    for (std::size_t s = 0; s < b; ++s) {
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[s * out + o];
        if (d == 0.0) continue;
        for (std::size_t i = 0; i < in; ++i) prev[s * in + i] += d * w[o * in + i];
      }
      for (std::size_t i = 0; i < in; ++i) {
        if (!(z[jj - 1][s * in + i] > 0.0)) prev[s * in + i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

// Scales g by 1 / max(1, ||g|| / clip_bound) using one norm over all layers.
inline Gradients ClipGradients(const Gradients& g, double clip_bound) {
  if (!(clip_bound > 0.0)) {
    throw Error(ErrorCode::kNonPositiveClip, "clip bound " + std::to_string(clip_bound));
  }
  const double norm = GlobalNorm(g);
  if (norm <= clip_bound) return g;
  const double factor = clip_bound / norm;
  Gradients out = g;
  for (auto& l : out.layers) {
    for (double& v : l.weight.mutable_values()) v *= factor;
    for (double& v : l.bias.mutable_values()) v *= factor;
  }
  // Rounding can leave the result a few ulps above the bound; shrink until it
  // is not, which also makes a second clip a no-op.
  while (GlobalNorm(out) > clip_bound) {
    for (auto& l : out.layers) {
      for (double& v : l.weight.mutable_values()) v *= (1.0 - 1e-15);
      for (double& v : l.bias.mutable_values()) v *= (1.0 - 1e-15);
    }
  }
  return out;
}

inline ModelParams SgdStep(const ModelParams& params, const Gradients& g, double learning_rate) {
  RequireCongruent(params, g);
  ModelParams out = params;
  for (std::size_t j = 0; j < out.layers.size(); ++j) {
    auto w = out.layers[j].weight.mutable_values();
    auto b = out.layers[j].bias.mutable_values();
    const auto gw = g.layers[j].weight.values();
    const auto gb = g.layers[j].bias.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * gw[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= learning_rate * gb[i];
    out.layers[j].weight.CheckFinite();
    out.layers[j].bias.CheckFinite();
  }
  return out;
}

struct Evaluation {
  double accuracy;
  double mean_loss;
};

// Ties in argmax go to the lowest class index.
inline Evaluation Evaluate(const ModelParams& params, const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "cannot evaluate on an empty dataset");
  const ForwardResult fr = ForwardLoss(params, MakeBatch(data));
  const std::size_t k = fr.logits.shape()[1];
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (fr.logits.at(s, c) > fr.logits.at(s, best)) best = c;
    }
    if (best == static_cast<std::size_t>(data.labels[s])) ++correct;
  }
  return Evaluation{static_cast<double>(correct) / static_cast<double>(data.size()), fr.loss};
}

}  // namespace ladp

#endif  // LADP_MODEL_H_
