// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcmg/ad/tensor.hpp"
#include "mcmg/data/dataset.hpp"
#include "mcmg/graph/poi_graph.hpp"
#include "mcmg/model/batch.hpp"
#include "mcmg/model/model.hpp"

namespace mcmg::eval {

// 1 if the 1-based rank is within the top n.
double hr_at(std::size_t rank, std::size_t n);
// 1 / log2(rank + 1) within the top n, else 0.
double ndcg_at(std::size_t rank, std::size_t n);

// 1-based rank of `target` when scores are sorted descending with ties broken
// by ascending id.
std::size_t rank_of(std::span<const double> scores, std::size_t target);

// The n best ids by the same order.
std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n);

inline const std::vector<std::size_t> kDefaultCutoffs = {5, 10};

struct SliceMetrics {
  std::size_t count = 0;
  std::map<std::size_t, double> hr;
  std::map<std::size_t, double> ndcg;
};

struct ChannelMetrics {
  SliceMetrics same;
  SliceMetrics cross;
  SliceMetrics entire;             // mean over all instances
  SliceMetrics entire_unweighted;  // mean of the two group slices
};

// Target ranks per instance for each head.
struct Ranks {
  std::vector<data::Group> groups;
  std::vector<std::size_t> poi;
  std::vector<std::size_t> region;    // empty when not scored
  std::vector<std::size_t> category;  // empty when not scored
};

ChannelMetrics summarize(std::span<const std::size_t> ranks, std::span<const data::Group> groups,
                         std::span<const std::size_t> cutoffs);

struct EvalResult {
  std::vector<std::size_t> cutoffs;
  std::size_t instances = 0;
  std::map<std::string, ChannelMetrics> channels;  // "poi", "region", "category"
  ad::Tensor group_weights;                        // empty for baselines
};

EvalResult summarize(const Ranks& ranks, std::span<const std::size_t> cutoffs);

// Scores every instance with the model in inference mode. `visit` (optional)
// receives each instance's POI logits.
using ScoreVisitor = std::function<void(std::size_t index, std::span<const double> poi_scores)>;
Ranks rank_instances(model::Model& model, const graph::PoiGraph& graph, std::span<const model::Instance> instances,
                     std::size_t batch_size = 256, const ScoreVisitor& visit = {});

EvalResult evaluate(model::Model& model, const graph::PoiGraph& graph, std::span<const model::Instance> instances,
                    std::span<const std::size_t> cutoffs = kDefaultCutoffs, std::size_t batch_size = 256);

// Any POI scorer, for baselines.
using PoiScorer = std::function<std::vector<double>(const model::Instance& instance)>;
EvalResult evaluate_scorer(const PoiScorer& scorer, std::span<const model::Instance> instances,
                           std::span<const std::size_t> cutoffs = kDefaultCutoffs);

// Check-in counts of each POI over the train split.
std::vector<double> train_popularity(const data::Dataset& dataset);
EvalResult mostpop(const data::Dataset& dataset, std::span<const model::Instance> instances,
                   std::span<const std::size_t> cutoffs = kDefaultCutoffs);

// Instances for evaluating a split: the final prefix of each trajectory, or
// every prefix with all_positions.
std::vector<model::Instance> evaluation_instances(const data::Dataset& dataset, data::Split split,
                                                  bool all_positions = false);

// Rows {metric, N, slice, channel, seed, value} for every run, plus the mean
// over runs under "mean".
std::string results_json(std::span<const std::pair<std::uint64_t, EvalResult>> runs, const std::string& model_name);

}  // namespace mcmg::eval
