// SPDX-License-Identifier: Apache-2.0

#include "mcmg/eval/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <tuple>

#include "mcmg/ad/ops.hpp"
#include "mcmg/common/error.hpp"

namespace mcmg::eval {

double hr_at(std::size_t rank, std::size_t n) { return rank >= 1 && rank <= n ? 1.0 : 0.0; }

double ndcg_at(std::size_t rank, std::size_t n) {
  return rank >= 1 && rank <= n ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

std::size_t rank_of(std::span<const double> scores, std::size_t target) {
  const double s = scores[target];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > s || (scores[j] == s && j < target)) ++rank;
  }
  return rank;
}

std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> ids(scores.size());
  std::iota(ids.begin(), ids.end(), 0);
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
  ids.resize(n);
  return ids;
}

namespace {

SliceMetrics slice(std::span<const std::size_t> ranks, std::span<const data::Group> groups, const data::Group* only,
                   std::span<const std::size_t> cutoffs) {
  SliceMetrics m;
  for (std::size_t n : cutoffs) {
    m.hr[n] = 0.0;
    m.ndcg[n] = 0.0;
  }
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (only != nullptr && groups[i] != *only) continue;
    ++m.count;
    for (std::size_t n : cutoffs) {
      m.hr[n] += hr_at(ranks[i], n);
      m.ndcg[n] += ndcg_at(ranks[i], n);
    }
  }
  if (m.count > 0) {
    for (std::size_t n : cutoffs) {
      m.hr[n] /= static_cast<double>(m.count);
      m.ndcg[n] /= static_cast<double>(m.count);
    }
  }
  return m;
}

}  // namespace

ChannelMetrics summarize(std::span<const std::size_t> ranks, std::span<const data::Group> groups,
                         std::span<const std::size_t> cutoffs) {
  ChannelMetrics c;
  const data::Group same = data::Group::kSameRegion, cross = data::Group::kCrossRegion;
  c.same = slice(ranks, groups, &same, cutoffs);
  c.cross = slice(ranks, groups, &cross, cutoffs);
  c.entire = slice(ranks, groups, nullptr, cutoffs);
  c.entire_unweighted = c.entire;
  if (c.same.count > 0 && c.cross.count > 0) {
    for (std::size_t n : cutoffs) {
      c.entire_unweighted.hr[n] = (c.same.hr[n] + c.cross.hr[n]) / 2.0;
      c.entire_unweighted.ndcg[n] = (c.same.ndcg[n] + c.cross.ndcg[n]) / 2.0;
    }
  }
  return c;
}

EvalResult summarize(const Ranks& ranks, std::span<const std::size_t> cutoffs) {
  EvalResult r;
  r.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  r.instances = ranks.poi.size();
  r.channels["poi"] = summarize(ranks.poi, ranks.groups, cutoffs);
  if (!ranks.region.empty()) r.channels["region"] = summarize(ranks.region, ranks.groups, cutoffs);
  if (!ranks.category.empty()) r.channels["category"] = summarize(ranks.category, ranks.groups, cutoffs);
  return r;
}

Ranks rank_instances(model::Model& model, const graph::PoiGraph& graph, std::span<const model::Instance> instances,
                     std::size_t batch_size, const ScoreVisitor& visit) {
  Ranks out;
  if (batch_size == 0) batch_size = 1;
  Rng unused(0);
  for (std::size_t start = 0; start < instances.size(); start += batch_size) {
    const auto chunk = instances.subspan(start, std::min(batch_size, instances.size() - start));
    const model::Batch batch = model::make_batch(chunk);
    ad::Tape tape;
    const auto o = model.forward(tape, graph, batch, false, unused);
    const ad::Tensor& lp = o.logits.poi.value();
    const ad::Tensor& lr = o.logits.region.value();
    const ad::Tensor& lc = o.logits.category.value();
    for (std::size_t b = 0; b < batch.size; ++b) {
      const std::span<const double> sp(lp.data() + b * lp.cols(), lp.cols());
      out.groups.push_back(batch.groups[b]);
      out.poi.push_back(rank_of(sp, batch.target_poi[b]));
      out.region.push_back(rank_of(std::span<const double>(lr.data() + b * lr.cols(), lr.cols()), batch.target_region[b]));
      out.category.push_back(
          rank_of(std::span<const double>(lc.data() + b * lc.cols(), lc.cols()), batch.target_category[b]));
      if (visit) visit(start + b, sp);
    }
  }
  return out;
}

EvalResult evaluate(model::Model& model, const graph::PoiGraph& graph, std::span<const model::Instance> instances,
                    std::span<const std::size_t> cutoffs, std::size_t batch_size) {
  if (instances.empty()) throw DataError("nothing to evaluate: the split has no instances");
  EvalResult r = summarize(rank_instances(model, graph, instances, batch_size), cutoffs);
  r.group_weights = model.group_weights();
  return r;
}

EvalResult evaluate_scorer(const PoiScorer& scorer, std::span<const model::Instance> instances,
                           std::span<const std::size_t> cutoffs) {
  if (instances.empty()) throw DataError("nothing to evaluate: the split has no instances");
  Ranks ranks;
  for (const model::Instance& in : instances) {
    const std::vector<double> scores = scorer(in);
    ranks.groups.push_back(in.group());
    ranks.poi.push_back(rank_of(scores, static_cast<std::size_t>(in.trajectory->pois[in.prefix])));
  }
  return summarize(ranks, cutoffs);
}

std::vector<double> train_popularity(const data::Dataset& ds) {
  std::vector<double> counts(ds.num_pois(), 0.0);
  for (const auto& t : ds.trajectories) {
    if (t.split != data::Split::kTrain) continue;
    for (auto p : t.pois) counts[static_cast<std::size_t>(p)] += 1.0;
  }
  return counts;
}

EvalResult mostpop(const data::Dataset& ds, std::span<const model::Instance> instances,
                   std::span<const std::size_t> cutoffs) {
  const std::vector<double> counts = train_popularity(ds);
  return evaluate_scorer([&](const model::Instance&) { return counts; }, instances, cutoffs);
}

std::vector<model::Instance> evaluation_instances(const data::Dataset& ds, data::Split split, bool all_positions) {
  const auto trajectories = ds.select(split);
  return all_positions ? model::expand_prefixes(trajectories) : model::final_prefixes(trajectories);
}

std::string results_json(std::span<const std::pair<std::uint64_t, EvalResult>> runs, const std::string& model_name) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["model"] = model_name;
  doc["seeds"] = ordered_json::array();
  for (const auto& [seed, r] : runs) doc["seeds"].push_back(seed);

  ordered_json rows = ordered_json::array();
  std::map<std::tuple<std::string, std::size_t, std::string, std::string>, std::vector<double>> grouped;
  auto emit = [&](const std::string& metric, std::size_t n, const std::string& slice_name, const std::string& channel,
                  std::uint64_t seed, double value) {
    rows.push_back(ordered_json{{"metric", metric}, {"N", n}, {"slice", slice_name}, {"channel", channel},
                                {"seed", seed}, {"value", value}});
    grouped[{metric, n, slice_name, channel}].push_back(value);
  };
  for (const auto& [seed, r] : runs) {
    for (const auto& [channel, m] : r.channels) {
      const std::pair<const char*, const SliceMetrics*> slices[] = {
          {"same_region", &m.same}, {"cross_region", &m.cross}, {"entire", &m.entire},
          {"entire_unweighted", &m.entire_unweighted}};
      for (const auto& [slice_name, s] : slices) {
        for (std::size_t n : r.cutoffs) {
          emit("HR", n, slice_name, channel, seed, s->hr.at(n));
          emit("NDCG", n, slice_name, channel, seed, s->ndcg.at(n));
        }
      }
    }
  }
  doc["results"] = rows;

  ordered_json means = ordered_json::array();
  for (const auto& [key, values] : grouped) {
    const auto& [metric, n, slice_name, channel] = key;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    means.push_back(ordered_json{{"metric", metric}, {"N", n}, {"slice", slice_name}, {"channel", channel},
                                 {"seed", "mean"}, {"value", mean}});
  }
  doc["mean"] = means;

  ordered_json counts = ordered_json::array();
  ordered_json weights = ordered_json::array();
  for (const auto& [seed, r] : runs) {
    const auto& poi = r.channels.at("poi");
    counts.push_back(ordered_json{{"seed", seed}, {"instances", r.instances}, {"same_region", poi.same.count},
                                  {"cross_region", poi.cross.count}});
    if (!r.group_weights.empty()) {
      const ad::Tensor& w = r.group_weights;
      weights.push_back(ordered_json{{"seed", seed},
                                     {"same_region", {w.at(0, 0), w.at(0, 1), w.at(0, 2)}},
                                     {"cross_region", {w.at(1, 0), w.at(1, 1), w.at(1, 2)}}});
    }
  }
  doc["instances"] = counts;
  doc["group_weights"] = weights;
  return doc.dump(2) + "\n";
}

}  // namespace mcmg::eval
