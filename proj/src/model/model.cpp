// SPDX-License-Identifier: Apache-2.0

#include "mcmg/model/model.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "mcmg/ad/ops.hpp"
#include "mcmg/common/error.hpp"

namespace mcmg::model {

const char* to_string(LossVariant v) { return v == LossVariant::kBinary ? "bce" : "ce"; }

LossVariant parse_loss_variant(const std::string& text) {
  if (text == "bce") return LossVariant::kBinary;
  if (text == "ce") return LossVariant::kCategorical;
  throw std::invalid_argument("loss variant must be 'bce' or 'ce', got '" + text + "'");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (embedding_size == 0) fail("embedding_size must be positive");
  if (gcn_layers == 0) fail("gcn_layers must be at least 1");
  if (blocks == 0) fail("blocks must be at least 1");
  if (heads == 0 || embedding_size % heads != 0) fail("heads must divide embedding_size");
  if (!(gcn_dropout >= 0.0 && gcn_dropout < 1.0)) fail("gcn_dropout must be in [0, 1)");
  if (!(sa_dropout >= 0.0 && sa_dropout < 1.0)) fail("sa_dropout must be in [0, 1)");
}

Sizes sizes_of(const data::Dataset& ds) {
  Sizes s;
  s.pois = ds.num_pois();
  s.regions = ds.num_regions();
  s.categories = ds.num_categories();
  s.positions = static_cast<std::size_t>(ds.config.max_len);
  s.distance_buckets = static_cast<std::size_t>(ds.config.distance_buckets);
  return s;
}

Model::Model(ModelConfig config, Sizes sizes, std::uint64_t seed) : config_(config), sizes_(sizes) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.embedding_size;
  params_.add("gcn.h0", ad::uniform_init({sizes_.pois, d}, -0.1, 0.1, rng));
  for (std::size_t z = 0; z < config_.gcn_layers; ++z) params_.add(fmt::format("gcn.w{}", z), ad::glorot_init(d, d, rng));
  init_channel_params(params_, config_, sizes_, rng);
  params_.add("fusion.logits", ad::Tensor({2, 3}));
}

Model::Model(ModelConfig config, Sizes sizes, ad::ParamStore params)
    : config_(config), sizes_(sizes), params_(std::move(params)) {
  config_.validate();
  Model reference(config_, sizes_, 0);
  for (const auto& p : reference.params()) {
    if (!params_.contains(p.name)) throw FormatError("section 'params': missing parameter '" + p.name + "'");
    if (params_.at(p.name).value.shape() != p.value.shape()) {
      throw FormatError("section 'params': parameter '" + p.name + "' has shape " +
                        ad::to_string(params_.at(p.name).value.shape()) + ", expected " +
                        ad::to_string(p.value.shape()));
    }
  }
  if (params_.size() != reference.params().size()) throw FormatError("section 'params': unexpected extra parameters");
}

ad::Var Model::poi_table(ad::Tape& tape, const graph::PoiGraph& graph, bool train, Rng& rng) {
  const ad::Var h0 = tape.param(params_.at("gcn.h0"));
  if (!config_.use_gcn) return h0;
  if (graph.num_nodes != sizes_.pois) throw ShapeError("POI graph does not match the model vocabulary");
  std::vector<ad::Var> weights;
  for (std::size_t z = 0; z < config_.gcn_layers; ++z) weights.push_back(tape.param(params_.at(fmt::format("gcn.w{}", z))));
  return graph::gcn_forward(graph, h0, weights, config_.gcn_dropout, train, rng);
}

Model::Output Model::forward(ad::Tape& tape, ad::Var poi_table, const Batch& batch, bool train, Rng& rng,
                             AttentionTrace* trace) {
  Output out;
  out.poi_table = poi_table;
  out.location = encode_channel(tape, params_, Channel::kLocation, batch, poi_table, config_, train, rng, trace);
  out.region = encode_channel(tape, params_, Channel::kRegion, batch, poi_table, config_, train, rng, trace);
  out.category = encode_channel(tape, params_, Channel::kCategory, batch, poi_table, config_, train, rng, trace);
  out.weights = model::group_weights(tape, params_, config_);
  out.fused = fuse_channels(out.location.last, out.region.last, out.category.last, out.weights, batch.groups);
  out.logits = predict_heads(out.fused, out.region.last, out.category.last, poi_table,
                             tape.param(params_.at("emb.region")), tape.param(params_.at("emb.category")));
  return out;
}

Model::Output Model::forward(ad::Tape& tape, const graph::PoiGraph& graph, const Batch& batch, bool train, Rng& rng) {
  const ad::Var table = poi_table(tape, graph, train, rng);
  return forward(tape, table, batch, train, rng);
}

ad::Tensor Model::group_weights() const {
  ad::Tape tape;
  ad::ParamStore copy;
  copy.add("fusion.logits", params_.at("fusion.logits").value);
  return model::group_weights(tape, copy, config_).value();
}

}  // namespace mcmg::model
