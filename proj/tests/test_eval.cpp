// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "mcmg/common/error.hpp"
#include "mcmg/data/synth.hpp"
#include "mcmg/eval/evaluator.hpp"
#include "mcmg/selftest/selftest.hpp"

using namespace mcmg;
using namespace mcmg::eval;

namespace {

// Three-check-in trajectories whose last POI is the target; the group of the
// prefix is random.
std::vector<data::Trajectory> pairs(std::size_t count, std::size_t num_pois, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<data::Trajectory> out(count);
  for (auto& t : out) {
    for (int k = 0; k < 3; ++k) t.pois.push_back(static_cast<std::int32_t>(rng.below(num_pois)));
    t.regions = {0, static_cast<std::int32_t>(rng.below(2)), 0};
    t.categories = {0, 0, 0};
  }
  return out;
}

std::vector<model::Instance> finals(const std::vector<data::Trajectory>& ts) {
  std::vector<model::Instance> out;
  for (const auto& t : ts) out.push_back({&t, t.size() - 1});
  return out;
}

void check_invariants(const ChannelMetrics& c) {
  for (const SliceMetrics* s : {&c.same, &c.cross, &c.entire}) {
    CHECK(s->hr.at(5) <= s->hr.at(10));
    CHECK(s->ndcg.at(5) <= s->ndcg.at(10));
    CHECK(s->ndcg.at(5) <= s->hr.at(5));
    CHECK(s->ndcg.at(10) <= s->hr.at(10));
  }
  const double n = static_cast<double>(c.same.count + c.cross.count);
  for (std::size_t k : {5, 10}) {
    const double hr = (c.same.count * c.same.hr.at(k) + c.cross.count * c.cross.hr.at(k)) / n;
    const double nd = (c.same.count * c.same.ndcg.at(k) + c.cross.count * c.cross.ndcg.at(k)) / n;
    CHECK(std::abs(hr - c.entire.hr.at(k)) <= 1e-12);
    CHECK(std::abs(nd - c.entire.ndcg.at(k)) <= 1e-12);
  }
}

}  // namespace

TEST_SUITE("evaluator") {
  TEST_CASE("metric values") {
    CHECK(hr_at(1, 5) == 1.0);
    CHECK(hr_at(5, 5) == 1.0);
    CHECK(hr_at(6, 5) == 0.0);
    CHECK(ndcg_at(1, 5) == 1.0);
    CHECK(ndcg_at(3, 5) == 0.5);
    CHECK(ndcg_at(7, 5) == 0.0);
  }

  TEST_CASE("ranking ties go to the lower id") {
    const std::vector<double> s = {0.5, 0.9, 0.5, 0.1};
    CHECK(rank_of(s, 1) == 1);
    CHECK(rank_of(s, 0) == 2);
    CHECK(rank_of(s, 2) == 3);
    CHECK(rank_of(s, 3) == 4);
    CHECK(top_n(s, 3) == std::vector<std::size_t>{1, 0, 2});
    CHECK(top_n(s, 10).size() == 4);
  }

  TEST_CASE("perfect scorer") {
    const auto ts = pairs(50, 20, 1);
    const auto inst = finals(ts);
    const EvalResult r = evaluate_scorer(
        [](const model::Instance& in) {
          std::vector<double> s(20, 0.0);
          s[static_cast<std::size_t>(in.trajectory->pois[in.prefix])] = 1.0;
          return s;
        },
        inst);
    const ChannelMetrics& c = r.channels.at("poi");
    for (const SliceMetrics* s : {&c.same, &c.cross, &c.entire, &c.entire_unweighted}) {
      CHECK(s->hr.at(5) == 1.0);
      CHECK(s->ndcg.at(5) == 1.0);
    }
  }

  TEST_CASE("random scorer hits about one in ten at N = 10") {
    const auto ts = pairs(1000, 100, 2);
    const auto inst = finals(ts);
    Rng rng(3);
    const EvalResult r = evaluate_scorer(
        [&](const model::Instance&) {
          std::vector<double> s(100);
          for (double& v : s) v = rng.uniform();
          return s;
        },
        inst);
    CHECK(std::abs(r.channels.at("poi").entire.hr.at(10) - 0.1) <= 0.03);
    check_invariants(r.channels.at("poi"));
  }

  TEST_CASE("metrics survive order preserving score transforms") {
    const auto ts = pairs(200, 30, 4);
    const auto inst = finals(ts);
    auto scores = [](const model::Instance& in) {
      std::vector<double> s(30);
      for (std::size_t j = 0; j < 30; ++j) s[j] = std::sin(static_cast<double>(j * 7 + static_cast<std::size_t>(in.trajectory->pois[0])));
      return s;
    };
    const EvalResult a = evaluate_scorer(scores, inst);
    const EvalResult b = evaluate_scorer(
        [&](const model::Instance& in) {
          auto s = scores(in);
          for (double& v : s) v = std::exp(3.0 * v) + 1.0;
          return s;
        },
        inst);
    CHECK(a.channels.at("poi").entire.hr == b.channels.at("poi").entire.hr);
    CHECK(a.channels.at("poi").entire.ndcg == b.channels.at("poi").entire.ndcg);
    check_invariants(a.channels.at("poi"));
  }

  TEST_CASE("most popular baseline equals brute force ranking") {
    const data::Dataset ds = selftest::toy_dataset();
    const auto inst = evaluation_instances(ds, data::Split::kTest, true);
    REQUIRE(inst.size() <= 100);
    const EvalResult r = mostpop(ds, inst);

    std::vector<std::size_t> count(ds.num_pois(), 0);
    for (const auto& t : ds.trajectories) {
      if (t.split != data::Split::kTrain) continue;
      for (auto p : t.pois) ++count[static_cast<std::size_t>(p)];
    }
    std::vector<std::size_t> order(ds.num_pois());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });
    double hr5 = 0, hr10 = 0, nd5 = 0, nd10 = 0;
    for (const auto& in : inst) {
      const auto target = static_cast<std::size_t>(in.trajectory->pois[in.prefix]);
      const std::size_t pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), target) - order.begin());
      if (pos < 5) hr5 += 1, nd5 += 1.0 / std::log2(pos + 2.0);
      if (pos < 10) hr10 += 1, nd10 += 1.0 / std::log2(pos + 2.0);
    }
    const double n = static_cast<double>(inst.size());
    const SliceMetrics& e = r.channels.at("poi").entire;
    CHECK(e.hr.at(5) == hr5 / n);
    CHECK(e.hr.at(10) == hr10 / n);
    CHECK(e.ndcg.at(5) == nd5 / n);
    CHECK(e.ndcg.at(10) == nd10 / n);
    CHECK(r.channels.count("region") == 0);
  }

  TEST_CASE("most popular ties and dominance") {
    data::Dataset ds;
    ds.poi_info.resize(3);
    ds.trajectories.resize(2);
    auto& a = ds.trajectories[0];
    a.pois = {2, 2, 2, 2, 2, 2, 2, 2, 2, 1};
    a.regions.assign(10, 0);
    auto& b = ds.trajectories[1];
    b.split = data::Split::kTest;
    b.pois = {0, 2};
    b.regions = {0, 0};
    const auto pop = train_popularity(ds);
    CHECK(rank_of(pop, 2) == 1);
    CHECK(rank_of(pop, 1) == 2);
    ds.trajectories[0].pois = {1, 0};
    const auto tied = train_popularity(ds);
    CHECK(rank_of(tied, 0) == 1);
    CHECK(rank_of(tied, 1) == 2);
  }

  TEST_CASE("region head with nine regions always hits at ten") {
    data::IngestConfig cfg;
    const data::Dataset ds = data::build_dataset(data::parse_checkins_text(data::synth_city_tsv({})), cfg);
    REQUIRE(ds.num_regions() == 9);
    model::ModelConfig mc;
    mc.embedding_size = 16;
    model::Model m(mc, model::sizes_of(ds), 5);
    const auto g = graph::build_poi_graph(ds, mc.edge_weighting);
    const EvalResult r = evaluate(m, g, evaluation_instances(ds, data::Split::kTest));
    const ChannelMetrics& region = r.channels.at("region");
    CHECK(region.entire.hr.at(10) == 1.0);
    CHECK(region.same.hr.at(10) == 1.0);
    CHECK(region.cross.hr.at(10) == 1.0);
    check_invariants(r.channels.at("poi"));
    CHECK(r.group_weights.shape() == ad::Shape{2, 3});
  }

  TEST_CASE("empty split is an error") {
    std::vector<model::Instance> none;
    CHECK_THROWS_AS(evaluate_scorer([](const model::Instance&) { return std::vector<double>(3); }, none), DataError);
  }

  TEST_CASE("results document") {
    const auto ts = pairs(20, 10, 5);
    const auto inst = finals(ts);
    auto uniform = [](const model::Instance&) { return std::vector<double>(10, 0.0); };
    std::vector<std::pair<std::uint64_t, EvalResult>> runs = {{1, evaluate_scorer(uniform, inst)},
                                                              {2, evaluate_scorer(uniform, inst)}};
    const auto doc = nlohmann::json::parse(results_json(runs, "x"));
    CHECK(doc["model"] == "x");
    CHECK(doc["seeds"] == nlohmann::json::array({1, 2}));
    const auto& row = doc["results"][0];
    for (const char* key : {"metric", "N", "slice", "channel", "seed", "value"}) CHECK(row.contains(key));
    CHECK(doc["mean"].size() * 2 == doc["results"].size());
  }
}
