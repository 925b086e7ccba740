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
#ifndef LADP_CONVERGENCE_BOUND_H_
#define LADP_CONVERGENCE_BOUND_H_

#include <algorithm>
#include <cmath>
#include <optional>

#include "ladp/status.h"

namespace ladp {

// Constants of the noisy-FedAvg convergence bound under L-smoothness, the
// mu-PL condition (mu > L), clipping bound G_c and per-layer noise bound N_c.
struct ConvergenceConstants {
  double smoothness = 1.0;  // L
  double pl_mu = 2.0;       // mu
  double clip_bound = 1.0;  // G_c
  double noise_bound = 0.1; // N_c
  int num_layers = 1;       // J
  double learning_rate = 0.01;

  void Validate() const {
    if (!(smoothness > 0.0) || !(pl_mu > smoothness) || !(clip_bound > 0.0) || !(noise_bound >= 0.0) ||
        num_layers < 1) {
      throw Error(ErrorCode::kInvalidConstants, "need L > 0, mu > L, G_c > 0, N_c >= 0, J >= 1");
    }
  }
};

// ||sum_j n_j|| <= J * N_c.
inline double NoiseBound(int num_layers, double per_layer_bound) {
  return static_cast<double>(num_layers) * per_layer_bound;
}

struct EtaWindow {
  double lower;  // exclusive
  double upper;  // exclusive
};

// Open interval of admissible learning rates, or nullopt when it is empty.
inline std::optional<EtaWindow> ComputeEtaWindow(const ConvergenceConstants& k) {
  k.Validate();
  const double upper = 2.0 * k.num_layers * k.noise_bound / k.clip_bound;
  const double lower =
      std::max(0.0, upper - (k.pl_mu - k.smoothness) / (k.smoothness * k.clip_bound * k.pl_mu));
  if (!(upper > lower)) return std::nullopt;
  return EtaWindow{lower, upper};
}

struct ConvergenceBound {
  double bound;
  double ratio;
  double psi;
  double phi;
  // False when the contraction ratio falls outside (0, 1); the bound is still
  // reported but no longer describes convergence.
  bool ratio_in_unit_interval;
};

inline ConvergenceBound ComputeConvergenceBound(const ConvergenceConstants& k, int rounds,
                                                double initial_gap) {
  const auto window = ComputeEtaWindow(k);
  if (!window || !(k.learning_rate > window->lower && k.learning_rate < window->upper)) {
    throw Error(ErrorCode::kEtaOutOfWindow, "learning rate outside the admissible window");
  }
  if (rounds < 0 || !(initial_gap >= 0.0)) {
    throw Error(ErrorCode::kInvalidConstants, "need rounds >= 0 and initial_gap >= 0");
  }
  const double L = k.smoothness;
  const double J = k.num_layers;
  const double eta = k.learning_rate;
  const double gc = k.clip_bound;
  const double nc = k.noise_bound;

  ConvergenceBound out{};
  out.psi = 2.0 * J * nc - eta * gc;
  out.phi = L * eta * eta * gc * gc / 2.0 + 2.0 * L * J * J * nc * nc;
  out.ratio = (L + out.psi * k.pl_mu * L) / k.pl_mu;
  out.ratio_in_unit_interval = out.ratio > 0.0 && out.ratio < 1.0;

  const double drift = (out.psi + 2.0 * out.phi) / 2.0;
  double power = 1.0;   // ratio^n
  double series = 0.0;  // sum_{n < t} ratio^n
  for (int n = 0; n < rounds; ++n) {
    series += power;
    power *= out.ratio;
  }
  out.bound = power * initial_gap + drift * series;
  return out;
}

}  // namespace ladp

#endif  // LADP_CONVERGENCE_BOUND_H_
