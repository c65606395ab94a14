// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcmg/ad/adam.hpp"
#include "mcmg/data/dataset.hpp"
#include "mcmg/graph/poi_graph.hpp"
#include "mcmg/model/model.hpp"

namespace mcmg::train {

struct TrainConfig {
  model::ModelConfig model;
  double lr = 0.0043;
  double lambda = 0.0001;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::uint64_t seed = 42;
  std::size_t eval_batch_size = 256;
  // Wall-clock column of the log; disable for byte-identical logs.
  bool log_wall_time = true;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double j_poi = 0.0;
  double j_region = 0.0;
  double j_category = 0.0;
  double j = 0.0;
  double val_hr10 = 0.0;
  double val_ndcg10 = 0.0;
  double wall_seconds = 0.0;
};

std::string log_csv_header();
std::string log_csv_row(const EpochLog& row);

// Mini-batch Adam with per-epoch validation and early stopping. The trainer
// keeps references to the dataset and graph, which must outlive it.
class Trainer {
 public:
  Trainer(const data::Dataset& dataset, const graph::PoiGraph& graph, TrainConfig config);

  // Restores a state saved by save_checkpoint, continuing exactly where it
  // stopped. The stored config replaces `config`, except for max_epochs,
  // patience and log_wall_time.
  static Trainer resume(const data::Dataset& dataset, const graph::PoiGraph& graph,
                        const std::filesystem::path& checkpoint, std::optional<TrainConfig> overrides = {});

  // One epoch of updates followed by validation. Returns the log row.
  EpochLog run_epoch();
  bool finished() const;

  using EpochCallback = std::function<void(const EpochLog&)>;
  // Runs epochs until early stopping or max_epochs.
  void fit(const EpochCallback& on_epoch = {});

  // Full state: config, parameters, best parameters, optimizer, RNG, counters
  // and the log so far.
  void save_checkpoint(const std::filesystem::path& path) const;
  // Just the model with its best parameters, for evaluation.
  void save_best_model(const std::filesystem::path& path) const;

  const TrainConfig& config() const { return config_; }
  model::Model& model() { return model_; }
  const std::vector<EpochLog>& log() const { return log_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_ndcg() const { return best_ndcg_; }
  const ad::ParamStore& best_params() const { return best_params_; }
  const ad::Adam& optimizer() const { return adam_; }

  // Set to observe every batch: (batch index, loss, group weights).
  std::function<void(std::size_t, double, const ad::Tensor&)> on_batch;

 private:
  const data::Dataset* dataset_;
  const graph::PoiGraph* graph_;
  TrainConfig config_;
  model::Model model_;
  ad::Adam adam_;
  Rng rng_;
  std::vector<model::Instance> train_instances_;
  std::vector<model::Instance> validation_instances_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ndcg_ = -1.0;
  std::size_t bad_epochs_ = 0;
  ad::ParamStore best_params_;
  std::vector<EpochLog> log_;
  std::size_t batches_seen_ = 0;
};

// A model restored from either checkpoint kind.
struct LoadedModel {
  TrainConfig config;
  model::Model model;
};
LoadedModel load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace mcmg::train
