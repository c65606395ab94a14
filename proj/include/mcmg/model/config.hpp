// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "mcmg/graph/poi_graph.hpp"

namespace mcmg::model {

enum class LossVariant { kBinary, kCategorical };

const char* to_string(LossVariant v);
LossVariant parse_loss_variant(const std::string& text);

struct ModelConfig {
  std::size_t embedding_size = 180;
  std::size_t gcn_layers = 1;
  std::size_t heads = 1;
  std::size_t blocks = 1;
  double gcn_dropout = 0.5;
  double sa_dropout = 0.5;
  bool residual = false;
  bool use_gcn = true;
  bool use_region = true;
  bool use_category = true;
  LossVariant loss = LossVariant::kBinary;
  graph::EdgeWeighting edge_weighting = graph::EdgeWeighting::kCount;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Vocabulary and table sizes taken from a dataset.
struct Sizes {
  std::size_t pois = 0;
  std::size_t regions = 0;
  std::size_t categories = 0;
  std::size_t positions = 0;  // maximum trajectory length
  std::size_t distance_buckets = 0;
};

}  // namespace mcmg::model
