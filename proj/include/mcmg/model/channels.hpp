// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mcmg/ad/params.hpp"
#include "mcmg/ad/tape.hpp"
#include "mcmg/common/rng.hpp"
#include "mcmg/model/batch.hpp"
#include "mcmg/model/config.hpp"

namespace mcmg::model {

enum class Channel { kLocation = 0, kRegion = 1, kCategory = 2 };

inline constexpr Channel kChannels[] = {Channel::kLocation, Channel::kRegion, Channel::kCategory};

// Parameter name prefix of a channel: "loc", "reg" or "cat".
const char* prefix(Channel c);

// Registers the embedding tables and every channel parameter.
void init_channel_params(ad::ParamStore& params, const ModelConfig& config, const Sizes& sizes, Rng& rng);

// Enhanced embeddings of every batch slot as a [B*T, d] matrix; padding rows
// are zero. `poi_table` is the GCN output and is only read by the location
// channel.
ad::Var enhance_embeddings(ad::Tape& tape, ad::ParamStore& params, Channel channel, const Batch& batch,
                           ad::Var poi_table);

// Attention probabilities of one block, [B, T, T] per head.
struct AttentionTrace {
  std::vector<ad::Var> probabilities;
};

// One bidirectional self-attention block followed by the position-wise
// feed-forward network. x is [B*T, d]; output has the same shape with padding
// rows zeroed.
ad::Var self_attention_block(ad::Tape& tape, ad::ParamStore& params, const std::string& name, ad::Var x,
                             const Batch& batch, const ModelConfig& config, bool train, Rng& rng,
                             AttentionTrace* trace = nullptr);

struct Encoded {
  ad::Var sequence;  // [B*T, d]
  ad::Var last;      // [B, d], the vector at each instance's last observed slot
};

Encoded encode_channel(ad::Tape& tape, ad::ParamStore& params, Channel channel, const Batch& batch,
                       ad::Var poi_table, const ModelConfig& config, bool train, Rng& rng,
                       AttentionTrace* trace = nullptr);

// Rows b*T + len_b - 1 of a [B*T, d] matrix.
ad::Var last_positions(ad::Var sequence, const Batch& batch);

}  // namespace mcmg::model
