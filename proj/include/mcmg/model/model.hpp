// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "mcmg/ad/params.hpp"
#include "mcmg/ad/tape.hpp"
#include "mcmg/common/rng.hpp"
#include "mcmg/graph/poi_graph.hpp"
#include "mcmg/model/batch.hpp"
#include "mcmg/model/channels.hpp"
#include "mcmg/model/config.hpp"
#include "mcmg/model/fusion.hpp"

namespace mcmg::model {

Sizes sizes_of(const data::Dataset& dataset);

// GCN encoder, three channels, region-aware fusion and the three heads.
class Model {
 public:
  Model(ModelConfig config, Sizes sizes, std::uint64_t seed);
  Model(ModelConfig config, Sizes sizes, ad::ParamStore params);

  const ModelConfig& config() const { return config_; }
  const Sizes& sizes() const { return sizes_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  // POI embedding table consumed by the location channel and the POI head.
  ad::Var poi_table(ad::Tape& tape, const graph::PoiGraph& graph, bool train, Rng& rng);

  struct Output {
    ad::Var poi_table;
    Encoded location, region, category;
    ad::Var weights;  // [2, 3]
    ad::Var fused;    // [B, d]
    HeadLogits logits;
  };

  Output forward(ad::Tape& tape, ad::Var poi_table, const Batch& batch, bool train, Rng& rng,
                 AttentionTrace* trace = nullptr);
  Output forward(ad::Tape& tape, const graph::PoiGraph& graph, const Batch& batch, bool train, Rng& rng);

  // Current channel weights per group, [2, 3].
  ad::Tensor group_weights() const;

 private:
  ModelConfig config_;
  Sizes sizes_;
  ad::ParamStore params_;
};

}  // namespace mcmg::model
