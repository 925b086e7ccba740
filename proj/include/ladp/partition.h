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
#ifndef LADP_PARTITION_H_
#define LADP_PARTITION_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ladp/dataset.h"
#include "ladp/rng.h"
#include "ladp/status.h"

namespace ladp {

enum class PartitionMode { kGeneral, kDistribution1, kDistribution2 };

inline std::string_view PartitionModeName(PartitionMode m) {
  switch (m) {
    case PartitionMode::kGeneral: return "general";
    case PartitionMode::kDistribution1: return "distribution_1";
    case PartitionMode::kDistribution2: return "distribution_2";
  }
  return "general";
}

inline std::optional<PartitionMode> ParsePartitionMode(std::string_view name) {
  if (name == "general") return PartitionMode::kGeneral;
  if (name == "distribution_1") return PartitionMode::kDistribution1;
  if (name == "distribution_2") return PartitionMode::kDistribution2;
  return std::nullopt;
}

// How a labeled dataset is spread over clients. In every mode the
// honest-but-curious client receives no sample of private_label.
struct PartitionSpec {
  PartitionMode mode = PartitionMode::kGeneral;
  std::size_t num_clients = 2;
  std::size_t private_label = 0;
  std::size_t hbc_client = 0;
  double dirichlet_alpha = 0.01;     // distribution_2
  std::size_t labels_per_client = 4; // distribution_1; the HBC client gets one fewer

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

namespace partition_internal {

// Deals items over holders round-robin, starting at `offset`.
inline void DealRoundRobin(const std::vector<std::size_t>& items, const std::vector<std::size_t>& holders,
                           std::size_t offset, std::vector<std::vector<std::size_t>>& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[holders[(i + offset) % holders.size()]].push_back(items[i]);
  }
}

// Largest-remainder rounding of n * proportions; ties go to the lower index.
inline std::vector<std::size_t> Apportion(std::size_t n, const std::vector<double>& proportions) {
  std::vector<std::size_t> counts(proportions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const double exact = static_cast<double>(n) * proportions[i];
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
  return counts;
}

// Dirichlet(alpha, ..., alpha) draw of dimension k, computed from log-gamma
// variates and normalized with log-sum-exp.
inline std::vector<double> SampleDirichlet(std::size_t k, double alpha, RandomEngine& engine) {
  std::vector<double> logs(k);
  for (double& v : logs) v = engine.LogGamma(alpha);
  const double m = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& v : logs) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : logs) v /= sum;
  return logs;
}

}  // namespace partition_internal

inline std::vector<Dataset> PartitionData(const Dataset& data, const PartitionSpec& spec,
                                          const RngStream& stream) {
  using partition_internal::DealRoundRobin;
  const std::size_t n_clients = spec.num_clients;
  const std::size_t k = data.num_classes;
  if (n_clients < 2) throw Error(ErrorCode::kTooFewClients, "partitioning needs at least 2 clients");
  if (spec.hbc_client >= n_clients) {
    throw Error(ErrorCode::kInvalidParams, "hbc_client " + std::to_string(spec.hbc_client) + " >= N");
  }
  if (spec.private_label >= k) {
    throw Error(ErrorCode::kInvalidParams, "private_label " + std::to_string(spec.private_label) +
                                               " >= class count");
  }

  std::vector<std::vector<std::size_t>> by_label(k);
  for (std::size_t i = 0; i < data.size(); ++i) by_label[static_cast<std::size_t>(data.labels[i])].push_back(i);
  for (std::size_t c = 0; c < k; ++c) {
    if (by_label[c].empty()) throw Error(ErrorCode::kMissingClass, "class " + std::to_string(c) + " has no samples");
    RandomEngine shuffle(stream.Child({1, c}));
    shuffle.Shuffle(by_label[c]);
  }

  std::vector<std::size_t> all_clients(n_clients);
  std::vector<std::size_t> honest_clients;
  for (std::size_t i = 0; i < n_clients; ++i) {
    all_clients[i] = i;
    if (i != spec.hbc_client) honest_clients.push_back(i);
  }
  auto eligible = [&](std::size_t label) -> const std::vector<std::size_t>& {
    return label == spec.private_label ? honest_clients : all_clients;
  };

  std::vector<std::vector<std::size_t>> assignment(n_clients);
  switch (spec.mode) {
    case PartitionMode::kGeneral: {
      for (std::size_t c = 0; c < k; ++c) DealRoundRobin(by_label[c], eligible(c), c, assignment);
      break;
    }
    case PartitionMode::kDistribution1: {
      if (spec.labels_per_client < 2) {
        throw Error(ErrorCode::kInvalidParams, "labels_per_client must be at least 2");
      }
      // Honest clients hold the private label plus labels_per_client - 1
      // others; the HBC client holds labels_per_client - 1 non-private labels.
      // Windows over a seeded permutation of the non-private labels keep the
      // cover complete whenever there are enough windows.
      std::vector<std::size_t> others;
      for (std::size_t c = 0; c < k; ++c) {
        if (c != spec.private_label) others.push_back(c);
      }
      RandomEngine engine(stream.Child(2));
      engine.Shuffle(others);
      const std::size_t per_client = std::min(spec.labels_per_client - 1, others.size());
      std::vector<std::vector<std::size_t>> holders(k);
      holders[spec.private_label] = honest_clients;
      std::size_t cursor = 0;
      for (std::size_t client = 0; client < n_clients && per_client > 0; ++client) {
        for (std::size_t m = 0; m < per_client; ++m) {
          holders[others[cursor % others.size()]].push_back(client);
          ++cursor;
        }
      }
      for (std::size_t i = 0; i < others.size(); ++i) {
        if (holders[others[i]].empty()) holders[others[i]].push_back(i % n_clients);
      }
      for (std::size_t c = 0; c < k; ++c) {
        std::sort(holders[c].begin(), holders[c].end());
        DealRoundRobin(by_label[c], holders[c], c, assignment);
      }
      break;
    }
    case PartitionMode::kDistribution2: {
      if (!(spec.dirichlet_alpha > 0.0)) {
        throw Error(ErrorCode::kInvalidParams, "dirichlet_alpha must be positive");
      }
      for (std::size_t c = 0; c < k; ++c) {
        const auto& clients = eligible(c);
        RandomEngine engine(stream.Child({3, c}));
        const auto props = partition_internal::SampleDirichlet(clients.size(), spec.dirichlet_alpha, engine);
        const auto counts = partition_internal::Apportion(by_label[c].size(), props);
        std::size_t next = 0;
        for (std::size_t i = 0; i < clients.size(); ++i) {
          for (std::size_t m = 0; m < counts[i]; ++m) assignment[clients[i]].push_back(by_label[c][next++]);
        }
      }
      break;
    }
  }

  std::vector<Dataset> out;
  out.reserve(n_clients);
  for (auto& idx : assignment) {
    std::sort(idx.begin(), idx.end());
    out.push_back(data.Subset(idx));
  }
  return out;
}

// Stratified hold-out split: about `fraction` of every class goes to the test
// set (at least one sample when the class has two or more).
struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

inline TrainTestSplit StratifiedSplit(const Dataset& data, double fraction, const RngStream& stream) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "test fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_label(data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) by_label[static_cast<std::size_t>(data.labels[i])].push_back(i);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < by_label.size(); ++c) {
    auto& idx = by_label[c];
    RandomEngine engine(stream.Child(c));
    engine.Shuffle(idx);
    std::size_t n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    else n_test = 0;
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return TrainTestSplit{data.Subset(train_idx), data.Subset(test_idx)};
}

}  // namespace ladp

#endif  // LADP_PARTITION_H_
