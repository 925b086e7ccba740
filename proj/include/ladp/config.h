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
#ifndef LADP_CONFIG_H_
#define LADP_CONFIG_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ladp/dataset_io.h"
#include "ladp/dp_mechanism.h"
#include "ladp/fl_runtime.h"
#include "ladp/partition.h"
#include "ladp/status.h"
#include "ladp/synthetic.h"

namespace ladp {

struct DatasetSource {
  enum class Kind { kSynthetic, kCsv, kIdx };
  Kind kind = Kind::kSynthetic;
  SyntheticSpec synthetic;
  std::optional<std::uint64_t> synthetic_seed;  // defaults to the experiment seed
  std::string path;         // csv file, or idx images
  std::string labels_path;  // idx labels

  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t num_clients = 20;
  double activation_rate = 1.0;
  std::size_t rounds = 50;
  int local_epochs = 1;
  double learning_rate = 0.1;
  std::size_t batch_size = 10;
  double test_fraction = 0.1;
  ModelSpec model;
  DPConfig dp;
  PartitionSpec partition;
  DatasetSource dataset;
  std::string output_path = "ladp_out";

  TrainingConfig ToTrainingConfig() const {
    TrainingConfig t;
    t.seed = seed;
    t.num_clients = num_clients;
    t.activation_rate = activation_rate;
    t.rounds = rounds;
    t.local = LocalTrainingParams{learning_rate, local_epochs, batch_size};
    t.model = model;
    t.dp = dp;
    t.partition = partition;
    t.partition.num_clients = num_clients;
    t.test_fraction = test_fraction;
    return t;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace config_internal {

using nlohmann::json;

[[noreturn]] inline void Invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::kValidationError, path + ": " + why);
}

// Reads fields of one JSON object, remembering which keys were used so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) Invalid(Name(), "expected an object");
  }

  std::string Field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool Has(const std::string& key) const { return object_.contains(key); }

  const json* Get(const std::string& key) {
    used_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  double Number(const std::string& key, double fallback) {
    const json* v = Get(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) Invalid(Field(key), "expected a number");
    return v->get<double>();
  }

  std::optional<double> OptionalNumber(const std::string& key) {
    const json* v = Get(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_number()) Invalid(Field(key), "expected a number");
    return v->get<double>();
  }

  std::uint64_t Unsigned(const std::string& key, std::uint64_t fallback) {
    const json* v = Get(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      Invalid(Field(key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    const json* v = Get(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) Invalid(Field(key), "expected a string");
    return v->get<std::string>();
  }

  void RejectUnknown() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!used_.contains(it.key())) Invalid(Field(it.key()), "unknown key");
    }
  }

 private:
  std::string Name() const { return path_.empty() ? "<root>" : path_; }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

inline void CheckFileExists(const std::string& field, const std::string& path) {
  if (path.empty()) Invalid(field, "path is empty");
  if (!std::filesystem::exists(path)) Invalid(field, "file does not exist: " + path);
}

}  // namespace config_internal

inline double DefaultDecayRate(std::size_t rounds) {
  return rounds == 0 ? 0.0 : std::log(10.0) / static_cast<double>(rounds);
}

// Parses and validates an experiment configuration. Missing optional fields
// take defaults; delta defaults to 1 / batch_size and the time_varying decay
// rate to ln(10) / rounds. Unknown keys are rejected.
inline ExperimentConfig ParseConfig(const nlohmann::json& root) {
  using config_internal::Invalid;
  using config_internal::ObjectReader;
  ExperimentConfig cfg;
  ObjectReader r(root, "");

  cfg.seed = r.Unsigned("seed", 0);
  cfg.num_clients = r.Unsigned("num_clients", cfg.num_clients);
  cfg.activation_rate = r.Number("activation_rate", cfg.activation_rate);
  cfg.rounds = r.Unsigned("rounds", cfg.rounds);
  cfg.local_epochs = static_cast<int>(r.Unsigned("local_epochs", 1));
  cfg.learning_rate = r.Number("learning_rate", cfg.learning_rate);
  cfg.batch_size = r.Unsigned("batch_size", cfg.batch_size);
  cfg.test_fraction = r.Number("test_fraction", cfg.test_fraction);
  cfg.output_path = r.String("output_path", cfg.output_path);

  if (cfg.num_clients < 2) Invalid("num_clients", "must be at least 2");
  if (!(cfg.activation_rate > 0.0 && cfg.activation_rate <= 1.0)) Invalid("activation_rate", "must lie in (0, 1]");
  if (cfg.local_epochs < 1) Invalid("local_epochs", "must be at least 1");
  if (!(cfg.learning_rate > 0.0)) Invalid("learning_rate", "must be positive");
  if (cfg.batch_size < 1) Invalid("batch_size", "must be at least 1");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) Invalid("test_fraction", "must lie in (0, 1)");

  // dataset
  std::size_t data_dim = 0;
  std::size_t data_classes = 0;
  if (const auto* ds = r.Get("dataset")) {
    ObjectReader d(*ds, "dataset");
    int sources = 0;
    if (const auto* syn = d.Get("synthetic")) {
      ++sources;
      ObjectReader s(*syn, "dataset.synthetic");
      cfg.dataset.kind = DatasetSource::Kind::kSynthetic;
      cfg.dataset.synthetic.classes = s.Unsigned("classes", 3);
      cfg.dataset.synthetic.samples_per_class = s.Unsigned("samples_per_class", 200);
      cfg.dataset.synthetic.input_dim = s.Unsigned("input_dim", 32);
      cfg.dataset.synthetic.separation = s.Number("separation", 3.0);
      if (s.Has("seed")) cfg.dataset.synthetic_seed = s.Unsigned("seed", 0);
      s.RejectUnknown();
      if (cfg.dataset.synthetic.classes < 2) Invalid("dataset.synthetic.classes", "must be at least 2");
      if (cfg.dataset.synthetic.samples_per_class < 1) Invalid("dataset.synthetic.samples_per_class", "must be positive");
      if (cfg.dataset.synthetic.input_dim < 1) Invalid("dataset.synthetic.input_dim", "must be positive");
      if (!(cfg.dataset.synthetic.separation >= 0.0)) Invalid("dataset.synthetic.separation", "must be non-negative");
      data_dim = cfg.dataset.synthetic.input_dim;
      data_classes = cfg.dataset.synthetic.classes;
    }
    if (d.Has("csv")) {
      ++sources;
      cfg.dataset.kind = DatasetSource::Kind::kCsv;
      cfg.dataset.path = d.String("csv", "");
      config_internal::CheckFileExists("dataset.csv", cfg.dataset.path);
    }
    if (const auto* idx = d.Get("idx")) {
      ++sources;
      ObjectReader i(*idx, "dataset.idx");
      cfg.dataset.kind = DatasetSource::Kind::kIdx;
      cfg.dataset.path = i.String("images", "");
      cfg.dataset.labels_path = i.String("labels", "");
      i.RejectUnknown();
      config_internal::CheckFileExists("dataset.idx.images", cfg.dataset.path);
      config_internal::CheckFileExists("dataset.idx.labels", cfg.dataset.labels_path);
    }
    d.RejectUnknown();
    if (sources != 1) Invalid("dataset", "exactly one of synthetic, csv, idx is required");
  } else {
    data_dim = cfg.dataset.synthetic.input_dim;
    data_classes = cfg.dataset.synthetic.classes;
  }

  // model
  if (const auto* m = r.Get("model")) {
    ObjectReader mr(*m, "model");
    const auto* sizes = mr.Get("layer_sizes");
    if (sizes == nullptr || !sizes->is_array()) Invalid("model.layer_sizes", "expected an array of positive integers");
    for (const auto& v : *sizes) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        Invalid("model.layer_sizes", "expected an array of positive integers");
      }
      cfg.model.layer_sizes.push_back(v.get<std::size_t>());
    }
    mr.RejectUnknown();
  } else if (data_dim > 0) {
    cfg.model.layer_sizes = {data_dim, 64, 32, data_classes};
  } else {
    Invalid("model", "required when the dataset is read from a file");
  }
  if (cfg.model.layer_sizes.size() < 2) Invalid("model.layer_sizes", "needs at least 2 entries");
  if (data_dim > 0 && cfg.model.layer_sizes.front() != data_dim) {
    Invalid("model.layer_sizes", "first entry must equal the input dimension " + std::to_string(data_dim));
  }
  if (data_classes > 0 && cfg.model.layer_sizes.back() != data_classes) {
    Invalid("model.layer_sizes", "last entry must equal the class count " + std::to_string(data_classes));
  }

  // dp
  {
    static const nlohmann::json kEmpty = nlohmann::json::object();
    const auto* dp = r.Get("dp");
    ObjectReader d(dp ? *dp : kEmpty, "dp");
    const std::string strategy = d.String("strategy", "ladp");
    const auto parsed = ParseStrategy(strategy);
    if (!parsed) Invalid("dp.strategy", "unknown strategy '" + strategy + "'");
    cfg.dp.strategy = *parsed;
    cfg.dp.epsilon = d.Number("epsilon", 1.0);
    cfg.dp.delta = d.OptionalNumber("delta").value_or(1.0 / static_cast<double>(cfg.batch_size));
    cfg.dp.kl_bound = d.Number("kl_bound", 1.0);
    cfg.dp.selection_threshold = d.Number("selection_threshold", 0.0);
    cfg.dp.clip_bound = d.Number("clip_bound", 1.0);
    cfg.dp.p_floor = d.Number("p_floor", kDefaultPFloor);
    cfg.dp.decay_rate = d.OptionalNumber("decay_rate").value_or(DefaultDecayRate(cfg.rounds));
    d.RejectUnknown();
    if (!(cfg.dp.epsilon > 0.0)) Invalid("dp.epsilon", "must be positive");
    if (!(cfg.dp.delta > 0.0 && cfg.dp.delta < 1.0)) Invalid("dp.delta", "must lie in (0, 1)");
    if (!(cfg.dp.kl_bound > 0.0)) Invalid("dp.kl_bound", "must be positive");
    if (!(cfg.dp.selection_threshold >= 0.0)) Invalid("dp.selection_threshold", "must be non-negative");
    if (!(cfg.dp.clip_bound > 0.0)) Invalid("dp.clip_bound", "must be positive");
    if (!(cfg.dp.p_floor > 0.0 && cfg.dp.p_floor < cfg.dp.kl_bound)) Invalid("dp.p_floor", "must lie in (0, kl_bound)");
    if (!(cfg.dp.decay_rate >= 0.0)) Invalid("dp.decay_rate", "must be non-negative");
  }

  // partition
  {
    static const nlohmann::json kEmpty = nlohmann::json::object();
    const auto* p = r.Get("partition");
    ObjectReader pr(p ? *p : kEmpty, "partition");
    const std::string mode = pr.String("mode", "general");
    const auto parsed = ParsePartitionMode(mode);
    if (!parsed) Invalid("partition.mode", "unknown mode '" + mode + "'");
    cfg.partition.mode = *parsed;
    cfg.partition.num_clients = cfg.num_clients;
    cfg.partition.private_label = pr.Unsigned("private_label", 0);
    cfg.partition.hbc_client = pr.Unsigned("hbc_client", 0);
    cfg.partition.dirichlet_alpha = pr.Number("dirichlet_alpha", 0.01);
    cfg.partition.labels_per_client = pr.Unsigned("labels_per_client", 4);
    pr.RejectUnknown();
    if (cfg.partition.hbc_client >= cfg.num_clients) Invalid("partition.hbc_client", "must be below num_clients");
    if (cfg.partition.private_label >= cfg.model.num_classes()) {
      Invalid("partition.private_label", "must be below the class count");
    }
    if (!(cfg.partition.dirichlet_alpha > 0.0)) Invalid("partition.dirichlet_alpha", "must be positive");
    if (cfg.partition.labels_per_client < 2) Invalid("partition.labels_per_client", "must be at least 2");
  }

  r.RejectUnknown();
  return cfg;
}

inline ExperimentConfig ParseConfigText(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return ParseConfig(root);
}

inline ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseConfigText(text);
}

// Fully explicit form of a config: every default is written out.
inline nlohmann::json SerializeConfig(const ExperimentConfig& cfg) {
  nlohmann::json dataset;
  switch (cfg.dataset.kind) {
    case DatasetSource::Kind::kSynthetic: {
      nlohmann::json syn = {{"classes", cfg.dataset.synthetic.classes},
                            {"samples_per_class", cfg.dataset.synthetic.samples_per_class},
                            {"input_dim", cfg.dataset.synthetic.input_dim},
                            {"separation", cfg.dataset.synthetic.separation}};
      if (cfg.dataset.synthetic_seed) syn["seed"] = *cfg.dataset.synthetic_seed;
      dataset["synthetic"] = syn;
      break;
    }
    case DatasetSource::Kind::kCsv:
      dataset["csv"] = cfg.dataset.path;
      break;
    case DatasetSource::Kind::kIdx:
      dataset["idx"] = {{"images", cfg.dataset.path}, {"labels", cfg.dataset.labels_path}};
      break;
  }
  return nlohmann::json{
      {"seed", cfg.seed},
      {"num_clients", cfg.num_clients},
      {"activation_rate", cfg.activation_rate},
      {"rounds", cfg.rounds},
      {"local_epochs", cfg.local_epochs},
      {"learning_rate", cfg.learning_rate},
      {"batch_size", cfg.batch_size},
      {"test_fraction", cfg.test_fraction},
      {"output_path", cfg.output_path},
      {"dataset", dataset},
      {"model", {{"layer_sizes", cfg.model.layer_sizes}}},
      {"dp",
       {{"strategy", std::string(StrategyName(cfg.dp.strategy))},
        {"epsilon", cfg.dp.epsilon},
        {"delta", cfg.dp.delta},
        {"kl_bound", cfg.dp.kl_bound},
        {"selection_threshold", cfg.dp.selection_threshold},
        {"clip_bound", cfg.dp.clip_bound},
        {"p_floor", cfg.dp.p_floor},
        {"decay_rate", cfg.dp.decay_rate}}},
      {"partition",
       {{"mode", std::string(PartitionModeName(cfg.partition.mode))},
        {"private_label", cfg.partition.private_label},
        {"hbc_client", cfg.partition.hbc_client},
        {"dirichlet_alpha", cfg.partition.dirichlet_alpha},
        {"labels_per_client", cfg.partition.labels_per_client}}},
  };
}

inline Dataset LoadDatasetSource(const ExperimentConfig& cfg) {
  switch (cfg.dataset.kind) {
    case DatasetSource::Kind::kSynthetic:
      return GenerateSynthetic(cfg.dataset.synthetic, cfg.dataset.synthetic_seed.value_or(cfg.seed));
    case DatasetSource::Kind::kCsv:
      return LoadCsvLabeled(cfg.dataset.path);
    case DatasetSource::Kind::kIdx:
      return LoadIdxPair(cfg.dataset.path, cfg.dataset.labels_path);
  }
  throw Error(ErrorCode::kInvalidParams, "unknown dataset source");
}

}  // namespace ladp

#endif  // LADP_CONFIG_H_
