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
#ifndef LADP_EXPERIMENT_H_
#define LADP_EXPERIMENT_H_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ladp/config.h"
#include "ladp/fl_runtime.h"
#include "ladp/status.h"

namespace ladp {

// One CSV line per (run, round). Doubles are written with 17 significant
// digits so that ParseMetricsRow recovers them exactly.
struct MetricsRow {
  std::string strategy;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t round = 0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  std::vector<std::size_t> active_clients;
  double total_noise_l2 = 0.0;
  double noise_l2_concat = 0.0;
  double max_layer_noise_l2 = 0.0;
  double cumulative_epsilon = 0.0;
  double cumulative_delta = 0.0;
  std::size_t selected_layers = 0;
  std::size_t unselected_layers = 0;
  std::size_t floor_hits = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr std::string_view kMetricsHeader =
    "strategy,epsilon,seed,round,test_accuracy,test_loss,active_clients,total_noise_l2,"
    "noise_l2_concat,max_layer_noise_l2,cumulative_epsilon,cumulative_delta,selected_layers,"
    "unselected_layers,floor_hits";

inline MetricsRow ToMetricsRow(const RoundRecord& record, Strategy strategy, const DPConfig& dp,
                               std::uint64_t seed) {
  MetricsRow row;
  row.strategy = std::string(StrategyName(strategy));
  row.epsilon = dp.epsilon;
  row.seed = seed;
  row.round = record.round;
  row.test_accuracy = record.test_accuracy;
  row.test_loss = record.test_loss;
  row.active_clients = record.active_clients;
  row.total_noise_l2 = record.total_noise_l2;
  row.noise_l2_concat = record.noise_l2_concat;
  row.max_layer_noise_l2 = record.max_layer_noise_l2;
  row.cumulative_epsilon = record.cumulative_epsilon;
  row.cumulative_delta = record.cumulative_delta;
  for (const auto& client : record.per_client_layer_records) {
    for (const auto& layer : client.layers) {
      if (layer.selected) {
        ++row.selected_layers;
        if (strategy == Strategy::kLadp && layer.privacy_estimate == dp.p_floor) ++row.floor_hits;
      } else {
        ++row.unselected_layers;
      }
    }
  }
  return row;
}

inline std::string FormatMetricsRow(const MetricsRow& row) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::string clients;
  for (std::size_t i = 0; i < row.active_clients.size(); ++i) {
    if (i > 0) clients += ';';
    clients += std::to_string(row.active_clients[i]);
  }
  std::string out = row.strategy;
  for (const std::string& field :
       {num(row.epsilon), std::to_string(row.seed), std::to_string(row.round), num(row.test_accuracy),
        num(row.test_loss), clients, num(row.total_noise_l2), num(row.noise_l2_concat),
        num(row.max_layer_noise_l2), num(row.cumulative_epsilon), num(row.cumulative_delta),
        std::to_string(row.selected_layers), std::to_string(row.unselected_layers),
        std::to_string(row.floor_hits)}) {
    out += ',';
    out += field;
  }
  return out;
}

inline MetricsRow ParseMetricsRow(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r' && ch != '\n') {
      current += ch;
    }
  }
  fields.push_back(current);
  if (fields.size() != 15) {
    throw Error(ErrorCode::kFormatError, "metrics row has " + std::to_string(fields.size()) + " fields, expected 15");
  }
  auto real = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::kFormatError, "bad number '" + s + "'");
    return v;
  };
  auto whole = [](const std::string& s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::kFormatError, "bad integer '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  MetricsRow row;
  row.strategy = fields[0];
  row.epsilon = real(fields[1]);
  row.seed = whole(fields[2]);
  row.round = whole(fields[3]);
  row.test_accuracy = real(fields[4]);
  row.test_loss = real(fields[5]);
  if (!fields[6].empty()) {
    std::stringstream ss(fields[6]);
    std::string id;
    while (std::getline(ss, id, ';')) row.active_clients.push_back(whole(id));
  }
  row.total_noise_l2 = real(fields[7]);
  row.noise_l2_concat = real(fields[8]);
  row.max_layer_noise_l2 = real(fields[9]);
  row.cumulative_epsilon = real(fields[10]);
  row.cumulative_delta = real(fields[11]);
  row.selected_layers = whole(fields[12]);
  row.unselected_layers = whole(fields[13]);
  row.floor_hits = whole(fields[14]);
  return row;
}

struct RunSummary {
  std::string strategy;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  // Noise scale: per-round norm of all injected noise, summed over rounds.
  double noise_scale = 0.0;
  double sum_of_layer_noise_norms = 0.0;
  double final_cumulative_epsilon = 0.0;
  double final_cumulative_delta = 0.0;
  double sampling_q = 1.0;
  double max_layer_noise_l2 = 0.0;
  std::size_t floor_hits = 0;
  std::size_t unselected_layer_events = 0;
  std::vector<double> layer_selection_frequency;
  double wall_time_seconds = 0.0;
};

inline RunSummary Summarize(const ExperimentConfig& cfg, const TrainingResult& result, double wall_seconds) {
  RunSummary s;
  s.strategy = std::string(StrategyName(cfg.dp.strategy));
  s.epsilon = cfg.dp.epsilon;
  s.delta = cfg.dp.delta;
  s.seed = cfg.seed;
  s.rounds = result.records.size();
  s.sampling_q = result.sampling_q;
  s.wall_time_seconds = wall_seconds;
  const std::size_t layers = cfg.model.num_layers();
  std::vector<std::size_t> selected(layers, 0);
  std::size_t events = 0;
  for (const RoundRecord& r : result.records) {
    s.noise_scale += r.noise_l2_concat;
    s.sum_of_layer_noise_norms += r.total_noise_l2;
    s.max_layer_noise_l2 = std::max(s.max_layer_noise_l2, r.max_layer_noise_l2);
    const MetricsRow row = ToMetricsRow(r, cfg.dp.strategy, cfg.dp, cfg.seed);
    s.floor_hits += row.floor_hits;
    s.unselected_layer_events += row.unselected_layers;
    for (const auto& client : r.per_client_layer_records) {
      ++events;
      for (const auto& layer : client.layers) {
        if (layer.selected) ++selected[layer.layer_id];
      }
    }
  }
  s.layer_selection_frequency.assign(layers, 0.0);
  if (events > 0) {
    for (std::size_t j = 0; j < layers; ++j) {
      s.layer_selection_frequency[j] = static_cast<double>(selected[j]) / static_cast<double>(events);
    }
  }
  if (!result.records.empty()) {
    s.final_accuracy = result.records.back().test_accuracy;
    s.final_loss = result.records.back().test_loss;
    s.final_cumulative_epsilon = result.records.back().cumulative_epsilon;
    s.final_cumulative_delta = result.records.back().cumulative_delta;
  }
  return s;
}

inline nlohmann::json SummaryToJson(const RunSummary& s) {
  return nlohmann::json{{"strategy", s.strategy},
                        {"epsilon", s.epsilon},
                        {"delta", s.delta},
                        {"seed", s.seed},
                        {"rounds", s.rounds},
                        {"final_accuracy", s.final_accuracy},
                        {"final_loss", s.final_loss},
                        {"noise_scale", s.noise_scale},
                        {"sum_of_layer_noise_norms", s.sum_of_layer_noise_norms},
                        {"final_cumulative_epsilon", s.final_cumulative_epsilon},
                        {"final_cumulative_delta", s.final_cumulative_delta},
                        {"sampling_q", s.sampling_q},
                        {"max_layer_noise_l2", s.max_layer_noise_l2},
                        {"floor_hits", s.floor_hits},
                        {"unselected_layer_events", s.unselected_layer_events},
                        {"layer_selection_frequency", s.layer_selection_frequency},
                        {"wall_time_seconds", s.wall_time_seconds}};
}

struct ExperimentOutcome {
  TrainingResult training;
  RunSummary summary;
};

// Runs one experiment. When write_files is set, metrics.csv (flushed every
// round) and summary.json are written under cfg.output_path.
inline ExperimentOutcome RunExperiment(const ExperimentConfig& cfg, bool write_files = true,
                                       RunOptions options = {}) {
  const Dataset data = LoadDatasetSource(cfg);
  const TrainingConfig training = cfg.ToTrainingConfig();
  std::ofstream csv;
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_path, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + cfg.output_path + ": " + ec.message());
    csv.open(std::filesystem::path(cfg.output_path) / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorCode::kIoError, "cannot write metrics.csv in " + cfg.output_path);
    csv << kMetricsHeader << '\n' << std::flush;
    auto user_callback = options.on_round;
    options.on_round = [&, user_callback](const RoundRecord& r) {
      csv << FormatMetricsRow(ToMetricsRow(r, cfg.dp.strategy, cfg.dp, cfg.seed)) << '\n' << std::flush;
      if (user_callback) user_callback(r);
    };
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutcome outcome;
  outcome.training = RunTraining(training, data, options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.summary = Summarize(cfg, outcome.training, wall);
  if (write_files) {
    std::ofstream summary(std::filesystem::path(cfg.output_path) / "summary.json", std::ios::trunc);
    if (!summary) throw Error(ErrorCode::kIoError, "cannot write summary.json in " + cfg.output_path);
    summary << SummaryToJson(outcome.summary).dump(2) << '\n';
  }
  return outcome;
}

struct ComparisonCell {
  std::string strategy;
  double epsilon = 0.0;
  std::size_t runs = 0;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  double max_accuracy = 0.0;
  double mean_noise_scale = 0.0;
  double mean_cumulative_epsilon = 0.0;
};

struct SweepResult {
  std::vector<ComparisonCell> cells;  // strategy-major, then epsilon
  std::vector<RunSummary> runs;       // strategy, epsilon, seed order
};

// Cartesian sweep over strategies x epsilons x seeds on top of base. Each run
// is written to <output_path>/<strategy>_eps<epsilon>_seed<seed>/ when
// write_files is set, and the cell table to <output_path>/comparison.csv.
inline SweepResult CompareStrategies(const ExperimentConfig& base, const std::vector<Strategy>& strategies,
                                     const std::vector<double>& epsilons, const std::vector<std::uint64_t>& seeds,
                                     bool write_files = true, const RunOptions& options = {}) {
  if (strategies.empty()) throw Error(ErrorCode::kValidationError, "strategies: list is empty");
  if (epsilons.empty()) throw Error(ErrorCode::kValidationError, "epsilons: list is empty");
  if (seeds.empty()) throw Error(ErrorCode::kValidationError, "seeds: list is empty");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw Error(ErrorCode::kValidationError, "epsilons: values must be positive");
  }
  SweepResult sweep;
  for (Strategy strategy : strategies) {
    for (double epsilon : epsilons) {
      ComparisonCell cell;
      cell.strategy = std::string(StrategyName(strategy));
      cell.epsilon = epsilon;
      cell.min_accuracy = 1.0;
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.dp.strategy = strategy;
        cfg.dp.epsilon = epsilon;
        cfg.seed = seed;
        char dir[96];
        std::snprintf(dir, sizeof(dir), "%s_eps%g_seed%llu", cell.strategy.c_str(), epsilon,
                      static_cast<unsigned long long>(seed));
        cfg.output_path = (std::filesystem::path(base.output_path) / dir).string();
        const RunSummary s = RunExperiment(cfg, write_files, options).summary;
        ++cell.runs;
        cell.mean_accuracy += s.final_accuracy;
        cell.min_accuracy = std::min(cell.min_accuracy, s.final_accuracy);
        cell.max_accuracy = std::max(cell.max_accuracy, s.final_accuracy);
        cell.mean_noise_scale += s.noise_scale;
        cell.mean_cumulative_epsilon += s.final_cumulative_epsilon;
        sweep.runs.push_back(s);
      }
      const double n = static_cast<double>(cell.runs);
      cell.mean_accuracy /= n;
      cell.mean_noise_scale /= n;
      cell.mean_cumulative_epsilon /= n;
      sweep.cells.push_back(cell);
    }
  }
  if (write_files) {
    std::filesystem::create_directories(base.output_path);
    std::ofstream table(std::filesystem::path(base.output_path) / "comparison.csv", std::ios::trunc);
    if (!table) throw Error(ErrorCode::kIoError, "cannot write comparison.csv in " + base.output_path);
    table << "strategy,epsilon,runs,mean_accuracy,min_accuracy,max_accuracy,mean_noise_scale,"
             "mean_cumulative_epsilon\n";
    for (const auto& c : sweep.cells) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.strategy.c_str(),
                    c.epsilon, c.runs, c.mean_accuracy, c.min_accuracy, c.max_accuracy, c.mean_noise_scale,
                    c.mean_cumulative_epsilon);
      table << buf;
    }
  }
  return sweep;
}

}  // namespace ladp

#endif  // LADP_EXPERIMENT_H_
