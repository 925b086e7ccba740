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
#ifndef LADP_DP_MECHANISM_H_
#define LADP_DP_MECHANISM_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ladp/model.h"
#include "ladp/rng.h"
#include "ladp/status.h"
#include "ladp/tensor.h"

namespace ladp {

enum class Strategy { kLadp, kFullDp, kTimeVarying, kNone };

inline std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kLadp: return "ladp";
    case Strategy::kFullDp: return "full_dp";
    case Strategy::kTimeVarying: return "time_varying";
    case Strategy::kNone: return "none";
  }
  return "none";
}

inline std::optional<Strategy> ParseStrategy(std::string_view name) {
  if (name == "ladp") return Strategy::kLadp;
  if (name == "full_dp") return Strategy::kFullDp;
  if (name == "time_varying") return Strategy::kTimeVarying;
  if (name == "none") return Strategy::kNone;
  return std::nullopt;
}

inline constexpr double kDefaultPFloor = 1e-6;

// Privacy hyperparameters for one client.
struct DPConfig {
  double epsilon = 1.0;
  double delta = 0.02;
  double kl_bound = 1.0;             // B, cap on the layer privacy estimate
  double selection_threshold = 0.0;  // R, minimum layer norm to be protected
  double clip_bound = 1.0;           // G_c
  double p_floor = kDefaultPFloor;
  Strategy strategy = Strategy::kLadp;
  double decay_rate = 0.0;  // lambda, time_varying only

  void Validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorCode::kInvalidEpsilon, "epsilon must be positive, got " + std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw Error(ErrorCode::kInvalidDelta, "delta must lie in (0, 1), got " + std::to_string(delta));
    }
    if (!(kl_bound > 0.0)) throw Error(ErrorCode::kNonPositiveInput, "kl_bound must be positive");
    if (!(p_floor > 0.0 && p_floor < kl_bound)) {
      throw Error(ErrorCode::kNonPositiveInput, "p_floor must lie in (0, kl_bound)");
    }
    if (!(selection_threshold >= 0.0)) {
      throw Error(ErrorCode::kNonPositiveInput, "selection_threshold must be non-negative");
    }
    if (!(clip_bound > 0.0)) throw Error(ErrorCode::kNonPositiveClip, "clip_bound must be positive");
    if (!(decay_rate >= 0.0)) throw Error(ErrorCode::kNonPositiveInput, "decay_rate must be non-negative");
  }

  friend bool operator==(const DPConfig&, const DPConfig&) = default;
};

struct LayerNoiseRecord {
  std::size_t layer_id = 0;
  bool selected = false;
  double privacy_estimate = 0.0;  // P, 0 when not selected
  double sigma = 0.0;
  double noise_l2 = 0.0;

  friend bool operator==(const LayerNoiseRecord&, const LayerNoiseRecord&) = default;
};

// delta at which the two branches of the c bound meet: sqrt(2 / (pi e^4)).
inline double CBranchThreshold() { return std::sqrt(2.0 / (std::numbers::pi * std::exp(4.0))); }

// Smallest admissible noise multiplier c for a layer whose privacy estimate
// is capped at kl_bound, taken at equality in the piecewise bound.
inline double ComputeC(double epsilon, double delta, double kl_bound) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidEpsilon, "epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidDelta, "delta must lie in (0, 1)");
  if (!(kl_bound > 0.0)) throw Error(ErrorCode::kNonPositiveInput, "kl_bound must be positive");
  if (delta <= CBranchThreshold()) {
    const double log_term = std::log(2.0 / (std::numbers::pi * delta * delta));
    return (std::sqrt(log_term) + std::sqrt(log_term + 8.0 * epsilon)) * kl_bound / 4.0;
  }
  return (1.0 + std::sqrt(1.0 + 2.0 * epsilon)) * kl_bound / 2.0;
}

// Classic Gaussian-mechanism constant sqrt(2 ln(1.25 / delta)).
inline double GaussianMechanismC(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidDelta, "delta must lie in (0, 1)");
  return std::sqrt(2.0 * std::log(1.25 / delta));
}

// Per-client sensitivity bound 2 * eta * E * G_c.
inline double Sensitivity(double learning_rate, int local_epochs, double clip_bound) {
  if (!(learning_rate > 0.0) || local_epochs <= 0 || !(clip_bound > 0.0)) {
    throw Error(ErrorCode::kNonPositiveInput, "sensitivity inputs must be positive");
  }
  return 2.0 * learning_rate * static_cast<double>(local_epochs) * clip_bound;
}

// Layers whose concatenated (weight, bias) norm is at least the threshold.
inline std::set<std::size_t> SelectLayers(const ModelParams& params, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::kNonPositiveInput, "threshold must be non-negative");
  std::set<std::size_t> selected;
  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    if (L2Norm(LayerVector(params.layers[j])) >= threshold) selected.insert(j);
  }
  return selected;
}

// KL(softmax(local) || softmax(global)) over the flattened layers, clamped to
// [p_floor, kl_bound].
inline double EstimatePrivacy(const Tensor& local_layer, const Tensor& global_layer, double kl_bound,
                              double p_floor) {
  if (local_layer.shape() != global_layer.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "local " + ShapeString(local_layer.shape()) + " vs global " +
                                               ShapeString(global_layer.shape()));
  }
  const double kl = KlDivergence(Softmax(Flatten(local_layer)), Softmax(Flatten(global_layer)));
  return std::clamp(kl, p_floor, kl_bound);
}

// sigma = c * sensitivity / (epsilon * P).
inline double NoiseSigma(double c, double sensitivity, double epsilon, double privacy_estimate) {
  if (!(c > 0.0) || !(sensitivity > 0.0) || !(epsilon > 0.0) || !(privacy_estimate > 0.0)) {
    throw Error(ErrorCode::kNonPositiveInput, "noise_sigma inputs must be positive");
  }
  return c * sensitivity / (epsilon * privacy_estimate);
}

struct NoisyTensor {
  Tensor value;
  double noise_l2;
};

inline NoisyTensor InjectNoise(const Tensor& layer, double sigma, const RngStream& stream) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kNegativeStd, "sigma " + std::to_string(sigma));
  if (sigma == 0.0) return NoisyTensor{layer, 0.0};
  const Tensor noise = SampleGaussian(layer.shape(), 0.0, sigma, stream);
  Tensor noisy = layer;
  auto out = noisy.mutable_values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  noisy.CheckFinite();
  return NoisyTensor{std::move(noisy), L2Norm(noise)};
}

// sigma of the static baselines: c_g * sensitivity / epsilon with the classic
// Gaussian constant.
inline double FullDpSigma(const DPConfig& cfg, double sensitivity) {
  return GaussianMechanismC(cfg.delta) * sensitivity / cfg.epsilon;
}

struct ProtectedModel {
  ModelParams params;
  std::vector<LayerNoiseRecord> records;
};

// Applies the client's privacy strategy to its trained model before upload.
//
//   ladp          layers with norm >= R get noise scaled by their KL distance
//                 to global_ref; the rest pass through untouched.
//   full_dp       every layer gets the static Gaussian-mechanism sigma.
//   time_varying  full_dp sigma decayed by exp(-decay_rate * round_index).
//   none          identity.
//
// Noise for layer j is drawn from stream.Child(j). For the two baselines the
// records carry privacy_estimate = kl_bound since no estimate is computed.
inline ProtectedModel ProtectModel(const ModelParams& local, const ModelParams& global_ref,
                                   const DPConfig& cfg, double learning_rate, int local_epochs,
                                   std::size_t round_index, const RngStream& stream) {
  RequireCongruent(local, global_ref);
  ProtectedModel result{local, {}};
  if (cfg.strategy == Strategy::kNone) return result;
  cfg.Validate();

  const double sensitivity = Sensitivity(learning_rate, local_epochs, cfg.clip_bound);
  std::set<std::size_t> selected;
  double c = 0.0;
  double static_sigma = 0.0;
  switch (cfg.strategy) {
    case Strategy::kLadp:
      selected = SelectLayers(local, cfg.selection_threshold);
      c = ComputeC(cfg.epsilon, cfg.delta, cfg.kl_bound);
      break;
    case Strategy::kFullDp:
      static_sigma = FullDpSigma(cfg, sensitivity);
      break;
    case Strategy::kTimeVarying:
      static_sigma = FullDpSigma(cfg, sensitivity) *
                     std::exp(-cfg.decay_rate * static_cast<double>(round_index));
      break;
    case Strategy::kNone:
      break;
  }

  for (std::size_t j = 0; j < local.layers.size(); ++j) {
    LayerNoiseRecord record;
    record.layer_id = j;
    double sigma = static_sigma;
    if (cfg.strategy == Strategy::kLadp) {
      if (!selected.contains(j)) {
        result.records.push_back(record);
        continue;
      }
      record.privacy_estimate = EstimatePrivacy(LayerVector(local.layers[j]),
                                                LayerVector(global_ref.layers[j]), cfg.kl_bound,
                                                cfg.p_floor);
      sigma = NoiseSigma(c, sensitivity, cfg.epsilon, record.privacy_estimate);
    } else {
      record.privacy_estimate = cfg.kl_bound;
    }
    record.selected = true;
    record.sigma = sigma;
    NoisyTensor noisy = InjectNoise(LayerVector(local.layers[j]), sigma, stream.Child(j));
    record.noise_l2 = noisy.noise_l2;
    result.params.layers[j] = LayerFromVector(noisy.value, local.layers[j]);
    result.records.push_back(record);
  }
  return result;
}

}  // namespace ladp

#endif  // LADP_DP_MECHANISM_H_
