// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "mcmg/ad/params.hpp"
#include "mcmg/ad/tape.hpp"
#include "mcmg/data/dataset.hpp"
#include "mcmg/model/batch.hpp"
#include "mcmg/model/config.hpp"

namespace mcmg::model {

// Row g of the result holds the channel weights (location, region, category)
// of group g: a softmax over the group's three logits. Disabled channels get
// weight 0.
ad::Var group_weights(ad::Tape& tape, ad::ParamStore& params, const ModelConfig& config);

// Per instance: sum over channels of weight[group][c] * f_c.
ad::Var fuse_channels(ad::Var f_location, ad::Var f_region, ad::Var f_category, ad::Var weights,
                      std::span<const data::Group> groups);

// Unnormalized scores: inner products with every candidate embedding.
struct HeadLogits {
  ad::Var poi;       // [B, L]
  ad::Var region;    // [B, K]
  ad::Var category;  // [B, C]
};

HeadLogits predict_heads(ad::Var fused, ad::Var f_region, ad::Var f_category, ad::Var poi_table,
                         ad::Var region_table, ad::Var category_table);

struct LossTerms {
  ad::Var total;
  ad::Var poi;
  ad::Var region;
  ad::Var category;
};

// Batch means of the per-instance losses. Terms of disabled channels are
// reported but left out of the total.
LossTerms compute_loss(const HeadLogits& logits, const Batch& batch, const ModelConfig& config);

}  // namespace mcmg::model
