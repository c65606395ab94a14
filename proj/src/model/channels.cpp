// SPDX-License-Identifier: Apache-2.0

#include "mcmg/model/channels.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "mcmg/ad/ops.hpp"

namespace mcmg::model {

const char* prefix(Channel c) {
  switch (c) {
    case Channel::kLocation: return "loc";
    case Channel::kRegion: return "reg";
    case Channel::kCategory: return "cat";
  }
  return "?";
}

void init_channel_params(ad::ParamStore& params, const ModelConfig& config, const Sizes& sizes, Rng& rng) {
  const std::size_t d = config.embedding_size;
  auto table = [&](const char* name, std::size_t rows) { params.add(name, ad::uniform_init({rows, d}, -0.1, 0.1, rng)); };
  auto proj = [&](const std::string& name) { params.add(name, ad::glorot_init(d, d, rng)); };

  table("emb.region", sizes.regions);
  table("emb.category", sizes.categories);
  table("emb.hour", 24);
  table("emb.position", sizes.positions);
  table("emb.dist_loc", sizes.distance_buckets);
  table("emb.dist_reg", sizes.distance_buckets);

  proj("loc.w_h");
  proj("loc.w_d");
  proj("loc.w_t");
  proj("reg.w_r");
  proj("reg.w_d");
  proj("reg.w_t");
  proj("cat.w_c");
  proj("cat.w_t");

  for (Channel c : kChannels) {
    for (std::size_t b = 0; b < config.blocks; ++b) {
      const std::string base = fmt::format("{}.block{}.", prefix(c), b);
      proj(base + "wq");
      proj(base + "wk");
      proj(base + "wv");
      proj(base + "w1");
      params.add(base + "b1", ad::Tensor({d}));
      proj(base + "w2");
      params.add(base + "b2", ad::Tensor({d}));
    }
  }
}

namespace {

ad::Var keep_rows(ad::Tape& tape, ad::Var x, const Batch& batch) {
  ad::Tensor keep({batch.pad.size()});
  for (std::size_t i = 0; i < batch.pad.size(); ++i) keep[i] = batch.pad[i] != 0 ? 0.0 : 1.0;
  return ad::scale_rows(x, tape.constant(std::move(keep)));
}

ad::Var lookup_projected(ad::Tape& tape, ad::ParamStore& params, const char* table, const std::vector<std::size_t>& ids,
                         const std::string& weight) {
  return ad::matmul(ad::gather_rows(tape.param(params.at(table)), ids), tape.param(params.at(weight)));
}

}  // namespace

ad::Var enhance_embeddings(ad::Tape& tape, ad::ParamStore& params, Channel channel, const Batch& batch,
                           ad::Var poi_table) {
  ad::Var out;
  switch (channel) {
    case Channel::kLocation: {
      ad::Var h = ad::matmul(ad::gather_rows(poi_table, batch.poi), tape.param(params.at("loc.w_h")));
      out = ad::add(h, lookup_projected(tape, params, "emb.dist_loc", batch.distance, "loc.w_d"));
      out = ad::add(out, lookup_projected(tape, params, "emb.hour", batch.hour, "loc.w_t"));
      break;
    }
    case Channel::kRegion:
      out = lookup_projected(tape, params, "emb.region", batch.region, "reg.w_r");
      out = ad::add(out, lookup_projected(tape, params, "emb.dist_reg", batch.region_distance, "reg.w_d"));
      out = ad::add(out, lookup_projected(tape, params, "emb.hour", batch.hour, "reg.w_t"));
      break;
    case Channel::kCategory:
      out = lookup_projected(tape, params, "emb.category", batch.category, "cat.w_c");
      out = ad::add(out, lookup_projected(tape, params, "emb.hour", batch.hour, "cat.w_t"));
      break;
  }
  out = ad::add(out, ad::gather_rows(tape.param(params.at("emb.position")), batch.position));
  return keep_rows(tape, out, batch);
}

ad::Var self_attention_block(ad::Tape& tape, ad::ParamStore& params, const std::string& name, ad::Var x,
                             const Batch& batch, const ModelConfig& config, bool train, Rng& rng,
                             AttentionTrace* trace) {
  const std::size_t B = batch.size;
  const std::size_t T = batch.length;
  const std::size_t d = config.embedding_size;
  const std::size_t dh = d / config.heads;
  auto w = [&](const char* part) { return tape.param(params.at(name + part)); };

  const ad::Var q = ad::reshape(ad::matmul(x, w("wq")), {B, T, d});
  const ad::Var k = ad::reshape(ad::matmul(x, w("wk")), {B, T, d});
  const ad::Var v = ad::reshape(ad::matmul(x, w("wv")), {B, T, d});

  std::vector<std::uint8_t> key_pad(B * T * T);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < T; ++j) key_pad[(b * T + i) * T + j] = batch.pad[b * T + j];
    }
  }
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<ad::Var> heads;
  for (std::size_t h = 0; h < config.heads; ++h) {
    const ad::Var qh = config.heads == 1 ? q : ad::slice_cols(q, h * dh, (h + 1) * dh);
    const ad::Var kh = config.heads == 1 ? k : ad::slice_cols(k, h * dh, (h + 1) * dh);
    const ad::Var vh = config.heads == 1 ? v : ad::slice_cols(v, h * dh, (h + 1) * dh);
    ad::Var scores = ad::scale(ad::bmm(qh, kh, true), inv_scale);
    scores = ad::masked_fill(scores, key_pad, -std::numeric_limits<double>::infinity());
    ad::Var probs = ad::softmax(scores);
    if (trace != nullptr) trace->probabilities.push_back(probs);
    probs = ad::dropout(probs, config.sa_dropout, train, rng);
    heads.push_back(ad::bmm(probs, vh));
  }
  ad::Var s = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
  s = ad::reshape(s, {B * T, d});

  ad::Var hidden = ad::relu(ad::add_row(ad::matmul(s, w("w1")), w("b1")));
  hidden = ad::dropout(hidden, config.sa_dropout, train, rng);
  ad::Var f = ad::add_row(ad::matmul(hidden, w("w2")), w("b2"));
  if (config.residual) f = ad::add(f, x);
  return keep_rows(tape, f, batch);
}

ad::Var last_positions(ad::Var sequence, const Batch& batch) {
  std::vector<std::size_t> rows(batch.size);
  for (std::size_t b = 0; b < batch.size; ++b) rows[b] = b * batch.length + batch.lengths[b] - 1;
  return ad::gather_rows(sequence, rows);
}

Encoded encode_channel(ad::Tape& tape, ad::ParamStore& params, Channel channel, const Batch& batch,
                       ad::Var poi_table, const ModelConfig& config, bool train, Rng& rng, AttentionTrace* trace) {
  ad::Var x = enhance_embeddings(tape, params, channel, batch, poi_table);
  for (std::size_t b = 0; b < config.blocks; ++b) {
    x = self_attention_block(tape, params, fmt::format("{}.block{}.", prefix(channel), b), x, batch, config, train,
                             rng, trace);
  }
  return Encoded{x, last_positions(x, batch)};
}

}  // namespace mcmg::model
