// SPDX-License-Identifier: Apache-2.0

#include "mcmg/model/fusion.hpp"

#include <limits>

#include "mcmg/ad/ops.hpp"

namespace mcmg::model {

ad::Var group_weights(ad::Tape& tape, ad::ParamStore& params, const ModelConfig& config) {
  ad::Var logits = tape.param(params.at("fusion.logits"));
  if (!config.use_region || !config.use_category) {
    std::vector<std::uint8_t> off(6, 0);
    for (std::size_t g = 0; g < 2; ++g) {
      off[g * 3 + 1] = config.use_region ? 0 : 1;
      off[g * 3 + 2] = config.use_category ? 0 : 1;
    }
    logits = ad::masked_fill(logits, off, -std::numeric_limits<double>::infinity());
  }
  return ad::softmax(logits);
}

ad::Var fuse_channels(ad::Var f_location, ad::Var f_region, ad::Var f_category, ad::Var weights,
                      std::span<const data::Group> groups) {
  std::vector<std::size_t> rows;
  rows.reserve(groups.size());
  for (data::Group g : groups) rows.push_back(static_cast<std::size_t>(g));
  const ad::Var w = ad::gather_rows(weights, rows);
  ad::Var f = ad::scale_rows(f_location, ad::slice_cols(w, 0, 1));
  f = ad::add(f, ad::scale_rows(f_region, ad::slice_cols(w, 1, 2)));
  return ad::add(f, ad::scale_rows(f_category, ad::slice_cols(w, 2, 3)));
}

HeadLogits predict_heads(ad::Var fused, ad::Var f_region, ad::Var f_category, ad::Var poi_table,
                         ad::Var region_table, ad::Var category_table) {
  return HeadLogits{ad::matmul(fused, poi_table, true), ad::matmul(f_region, region_table, true),
                    ad::matmul(f_category, category_table, true)};
}

LossTerms compute_loss(const HeadLogits& logits, const Batch& batch, const ModelConfig& config) {
  auto term = [&](ad::Var scores, const std::vector<std::size_t>& targets) {
    return ad::mean(config.loss == LossVariant::kBinary ? ad::softmax_binary_cross_entropy(scores, targets)
                                                        : ad::softmax_cross_entropy(scores, targets));
  };
  LossTerms out;
  out.poi = term(logits.poi, batch.target_poi);
  out.region = term(logits.region, batch.target_region);
  out.category = term(logits.category, batch.target_category);
  out.total = out.poi;
  if (config.use_region) out.total = ad::add(out.total, out.region);
  if (config.use_category) out.total = ad::add(out.total, out.category);
  return out;
}

}  // namespace mcmg::model
