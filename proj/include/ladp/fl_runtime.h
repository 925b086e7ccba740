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
#ifndef LADP_FL_RUNTIME_H_
#define LADP_FL_RUNTIME_H_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ladp/accountant.h"
#include "ladp/dataset.h"
#include "ladp/dp_mechanism.h"
#include "ladp/model.h"
#include "ladp/partition.h"
#include "ladp/rng.h"
#include "ladp/status.h"

namespace ladp {

struct LocalTrainingParams {
  double learning_rate = 0.1;
  int local_epochs = 1;
  std::size_t batch_size = 10;

  friend bool operator==(const LocalTrainingParams&, const LocalTrainingParams&) = default;
};

struct TrainingConfig {
  std::uint64_t seed = 0;
  std::size_t num_clients = 20;
  double activation_rate = 1.0;
  std::size_t rounds = 50;
  LocalTrainingParams local;
  ModelSpec model;
  DPConfig dp;
  PartitionSpec partition;
  double test_fraction = 0.1;
};

struct ClientState {
  std::size_t client_id = 0;
  Dataset dataset;
  ModelParams model;  // last global model received
  DPConfig dp;
  RngStream rng{0};
};

struct Upload {
  std::size_t client_id;
  ModelParams params;
  std::size_t dataset_size;
};

struct ServerState {
  ModelParams global_model;
  std::size_t round = 0;
  std::vector<Upload> collection;
};

struct ClientLayerRecords {
  std::size_t client_id;
  std::vector<LayerNoiseRecord> layers;

  friend bool operator==(const ClientLayerRecords&, const ClientLayerRecords&) = default;
};

struct RoundRecord {
  std::size_t round = 0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  std::vector<std::size_t> active_clients;
  double total_noise_l2 = 0.0;   // sum of every per-layer noise norm
  double noise_l2_concat = 0.0;  // norm of all noise injected this round, concatenated
  double max_layer_noise_l2 = 0.0;
  double cumulative_epsilon = 0.0;
  double cumulative_delta = 0.0;
  std::vector<ClientLayerRecords> per_client_layer_records;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// round(N * rate) distinct clients (at least one), ascending.
inline std::vector<std::size_t> SampleClients(std::size_t num_clients, double activation_rate,
                                              const RngStream& stream) {
  if (!(activation_rate > 0.0 && activation_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidRate, "activation rate must lie in (0, 1]");
  }
  if (num_clients == 0) throw Error(ErrorCode::kTooFewClients, "no clients to sample");
  const auto wanted = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(static_cast<double>(num_clients) * activation_rate)), 1,
      num_clients);
  std::vector<std::size_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  RandomEngine engine(stream);
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(engine.UniformInt(num_clients - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(wanted);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// E epochs of clipped mini-batch SGD. Each epoch visits the data once in an
// order shuffled by stream.Child(epoch).
inline ModelParams LocalTrain(ModelParams model, const Dataset& data, const LocalTrainingParams& local,
                              double clip_bound, const RngStream& stream) {
  if (data.empty()) throw Error(ErrorCode::kEmptyClientDataset, "client has no data");
  if (local.local_epochs <= 0 || local.batch_size == 0) {
    throw Error(ErrorCode::kNonPositiveInput, "local_epochs and batch_size must be positive");
  }
  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < local.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomEngine engine(stream.Child(static_cast<std::uint64_t>(epoch)));
    engine.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += local.batch_size) {
      const std::size_t stop = std::min(order.size(), start + local.batch_size);
      const Batch batch = MakeBatch(data, std::span<const std::size_t>(order).subspan(start, stop - start));
      model = SgdStep(model, ClipGradients(Backward(model, batch), clip_bound), local.learning_rate);
    }
  }
  return model;
}

// One client's share of a global round: reset to the received global model,
// train locally, then protect the result before it leaves the client.
inline ProtectedModel ClientRound(ClientState& state, const ModelParams& global_model, std::size_t round,
                                  const LocalTrainingParams& local) {
  if (state.dataset.empty()) throw Error(ErrorCode::kEmptyClientDataset, "client " + std::to_string(state.client_id));
  state.model = global_model;
  const ModelParams trained =
      LocalTrain(global_model, state.dataset, local, state.dp.clip_bound,
                 state.rng.Child(Purpose::kBatchShuffle).Child(static_cast<std::uint64_t>(round)));
  return ProtectModel(trained, state.model, state.dp, local.learning_rate, local.local_epochs, round,
                      state.rng.Child(Purpose::kNoise).Child(static_cast<std::uint64_t>(round)));
}

// Dataset-size-weighted mean of the uploaded models, computed as a running
// mean so identical inputs return bit-identical output.
inline ModelParams Aggregate(const std::vector<Upload>& collection) {
  if (collection.empty()) throw Error(ErrorCode::kEmptyCollection, "nothing to aggregate");
  ModelParams mean = collection.front().params;
  double seen = static_cast<double>(collection.front().dataset_size);
  for (std::size_t u = 1; u < collection.size(); ++u) {
    const Upload& up = collection[u];
    RequireCongruent(mean, up.params);
    seen += static_cast<double>(up.dataset_size);
    if (up.dataset_size == 0) continue;
    const double weight = static_cast<double>(up.dataset_size) / seen;
    for (std::size_t j = 0; j < mean.layers.size(); ++j) {
      auto update = [weight](std::span<double> acc, std::span<const double> x) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * (x[i] - acc[i]);
      };
      update(mean.layers[j].weight.mutable_values(), up.params.layers[j].weight.values());
      update(mean.layers[j].bias.mutable_values(), up.params.layers[j].bias.values());
    }
  }
  if (seen == 0.0) throw Error(ErrorCode::kEmptyCollection, "collection has zero total size");
  return mean;
}

struct RunOptions {
  // 0 means LADP_THREADS if set, else hardware concurrency.
  std::size_t threads = 0;
  // Executes clients of a round in descending id order; results must not change.
  bool reverse_client_order = false;
  std::function<void(const RoundRecord&)> on_round = nullptr;
};

inline std::size_t ResolveThreads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LADP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct TrainingResult {
  std::vector<RoundRecord> records;
  ModelParams initial_model;
  ModelParams final_model;
  std::vector<std::size_t> client_sizes;
  double sampling_q = 1.0;
};

namespace runtime_internal {

// Runs task(i) for i in order, on up to `threads` workers. Exceptions are
// rethrown on the caller's thread.
inline void ParallelFor(const std::vector<std::size_t>& order, std::size_t threads,
                        const std::function<void(std::size_t)>& task) {
  threads = std::min(threads, order.size());
  if (threads <= 1) {
    for (std::size_t i : order) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t n = next++; n < order.size(); n = next++) task(order[n]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace runtime_internal

// Synchronous federated training: each round samples clients, runs their
// local rounds (in parallel), aggregates the protected uploads and evaluates
// the new global model on a held-out split no client ever sees.
inline TrainingResult RunTraining(const TrainingConfig& cfg, const Dataset& data, const RunOptions& options = {}) {
  cfg.model.Validate();
  if (cfg.model.input_dim() != data.input_dim || cfg.model.num_classes() != data.num_classes) {
    throw Error(ErrorCode::kShapeMismatch, "model layer_sizes do not match the dataset");
  }
  if (cfg.dp.strategy != Strategy::kNone) cfg.dp.Validate();
  const RngStream root(cfg.seed);

  const TrainTestSplit split = StratifiedSplit(data, cfg.test_fraction, root.Child(Purpose::kTestSplit));
  PartitionSpec partition = cfg.partition;
  partition.num_clients = cfg.num_clients;
  const std::vector<Dataset> shards = PartitionData(split.train, partition, root.Child(Purpose::kPartition));

  std::vector<ClientState> clients(cfg.num_clients);
  TrainingResult result;
  std::size_t smallest = 0;
  for (std::size_t i = 0; i < cfg.num_clients; ++i) {
    clients[i].client_id = i;
    clients[i].dataset = shards[i];
    clients[i].dp = cfg.dp;
    clients[i].rng = root.Child(Purpose::kClient).Child(static_cast<std::uint64_t>(i));
    result.client_sizes.push_back(shards[i].size());
    if (!shards[i].empty() && (smallest == 0 || shards[i].size() < smallest)) smallest = shards[i].size();
  }
  if (smallest == 0) throw Error(ErrorCode::kEmptyClientDataset, "every client is empty");
  result.sampling_q = SamplingFraction(std::min(cfg.local.batch_size, smallest), smallest);
  AccountantState accountant = AccountantState::Start(cfg.dp.epsilon, cfg.dp.delta, result.sampling_q);

  ServerState server;
  server.global_model = InitializeModel(cfg.model, root.Child(Purpose::kInit));
  result.initial_model = server.global_model;
  const std::size_t threads = ResolveThreads(options.threads);

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    server.round = t;
    std::vector<std::size_t> active;
    for (std::size_t id : SampleClients(cfg.num_clients, cfg.activation_rate,
                                        root.Child(Purpose::kClientSampling).Child(static_cast<std::uint64_t>(t)))) {
      if (!clients[id].dataset.empty()) active.push_back(id);
    }

    std::vector<std::optional<ProtectedModel>> outputs(cfg.num_clients);
    std::vector<std::size_t> order = active;
    if (options.reverse_client_order) std::reverse(order.begin(), order.end());
    runtime_internal::ParallelFor(order, threads, [&](std::size_t id) {
      outputs[id] = ClientRound(clients[id], server.global_model, t, cfg.local);
    });

    RoundRecord record;
    record.round = t;
    record.active_clients = active;
    double squared_noise = 0.0;
    for (std::size_t id : active) {
      ProtectedModel& out = *outputs[id];
      for (const LayerNoiseRecord& r : out.records) {
        record.total_noise_l2 += r.noise_l2;
        squared_noise += r.noise_l2 * r.noise_l2;
        record.max_layer_noise_l2 = std::max(record.max_layer_noise_l2, r.noise_l2);
      }
      record.per_client_layer_records.push_back(ClientLayerRecords{id, std::move(out.records)});
      server.collection.push_back(Upload{id, std::move(out.params), clients[id].dataset.size()});
    }
    record.noise_l2_concat = std::sqrt(squared_noise);
    if (!server.collection.empty()) server.global_model = Aggregate(server.collection);
    server.collection.clear();
    for (auto& c : clients) c.model = server.global_model;

    if (cfg.dp.strategy != Strategy::kNone) accountant = Accumulate(accountant);
    record.cumulative_epsilon = accountant.cumulative_epsilon;
    record.cumulative_delta = accountant.cumulative_delta;

    const Evaluation eval = Evaluate(server.global_model, split.test);
    record.test_accuracy = eval.accuracy;
    record.test_loss = eval.mean_loss;
    if (options.on_round) options.on_round(record);
    result.records.push_back(std::move(record));
  }
  result.final_model = server.global_model;
  return result;
}

}  // namespace ladp

#endif  // LADP_FL_RUNTIME_H_
