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
#ifndef LADP_ACCOUNTANT_H_
#define LADP_ACCOUNTANT_H_

#include <cmath>
#include <cstddef>
#include <string>

#include "ladp/status.h"

namespace ladp {

// Noise multiplier implied by a per-step (epsilon, delta) budget:
// sqrt(2 ln(1.25 / delta)) / epsilon.
inline double SigmaFromBudget(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidBudget, "need epsilon > 0 and delta in (0, 1)");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

inline double SamplingFraction(std::size_t batch_size, std::size_t dataset_size) {
  if (batch_size < 1 || batch_size > dataset_size) {
    throw Error(ErrorCode::kInvalidSizes, "batch " + std::to_string(batch_size) + " vs dataset " +
                                              std::to_string(dataset_size));
  }
  return static_cast<double>(batch_size) / static_cast<double>(dataset_size);
}

// Sequential accountant under naive composition: after T rounds the spent
// budget is (q T epsilon, q T delta). Totals are recomputed from the round
// count rather than summed so they match the closed form exactly.
struct AccountantState {
  double per_round_epsilon = 0.0;
  double per_round_delta = 0.0;
  double sampling_q = 1.0;
  std::size_t rounds_elapsed = 0;
  double cumulative_epsilon = 0.0;
  double cumulative_delta = 0.0;

  static AccountantState Start(double epsilon, double delta, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::kInvalidSizes, "sampling q must lie in (0, 1]");
    return AccountantState{epsilon, delta, q, 0, 0.0, 0.0};
  }
};

inline AccountantState Accumulate(AccountantState state) {
  ++state.rounds_elapsed;
  const double rounds = static_cast<double>(state.rounds_elapsed);
  state.cumulative_epsilon = state.sampling_q * rounds * state.per_round_epsilon;
  state.cumulative_delta = state.sampling_q * rounds * state.per_round_delta;
  return state;
}

}  // namespace ladp

#endif  // LADP_ACCOUNTANT_H_
