// SPDX-License-Identifier: Apache-2.0

#include "mcmg/selftest/selftest.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "mcmg/ad/ops.hpp"
#include "mcmg/eval/evaluator.hpp"
#include "mcmg/graph/poi_graph.hpp"
#include "mcmg/model/model.hpp"

namespace mcmg::selftest {

data::Dataset toy_dataset() {
  struct Poi {
    double lat, lon;
  };
  const Poi pois[10] = {{34.000, -118.000}, {34.004, -118.003}, {33.997, -117.996}, {34.002, -117.995},
                        {34.300, -118.000}, {34.303, -118.004}, {34.296, -117.997}, {34.000, -117.600},
                        {34.004, -117.603}, {33.996, -117.598}};
  const int region_of[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  const std::int64_t base = 1333238400;
  std::string tsv;
  auto emit = [&](int user, int poi, std::int64_t ts) {
    tsv += fmt::format("u{}\tp{}\tc{}\t{:.6f}\t{:.6f}\t{}\n", user, poi, poi % 4, pois[poi].lat, pois[poi].lon, ts);
  };
  Rng rng(11);
  for (int u = 0; u < 6; ++u) {
    for (int day = 0; day < 4; ++day) {
      std::int64_t ts = base + day * 86400 + 9 * 3600;
      if (day == 0 && u < 3) {
        for (int p = 0; p < 10; ++p) {
          if (region_of[p] == u) {
            emit(u, p, ts);
            ts += 5400;
          }
        }
        continue;
      }
      const int len = 3 + static_cast<int>(rng.below(3));
      int poi = static_cast<int>(rng.below(10));
      for (int k = 0; k < len; ++k) {
        emit(u, poi, ts);
        ts += 3600 + static_cast<std::int64_t>(rng.below(7200));
        poi = rng.uniform() < 0.7 ? (poi + 1) % 10 : static_cast<int>(rng.below(10));
      }
    }
  }
  data::IngestConfig cfg;
  cfg.k_regions = 3;
  cfg.seed = 1;
  cfg.max_len = 8;
  cfg.distance_buckets = 8;
  return data::build_dataset(data::parse_checkins_text(tsv), cfg);
}

model::ModelConfig toy_model_config() {
  model::ModelConfig m;
  m.embedding_size = 8;
  m.heads = 2;
  m.blocks = 1;
  m.gcn_layers = 2;
  m.gcn_dropout = 0.3;
  m.sa_dropout = 0.3;
  return m;
}

namespace {

using ad::Tensor;
using ad::Var;

Tensor random_tensor(ad::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  return ad::uniform_init(std::move(shape), lo, hi, rng);
}

// Values bounded away from zero so relu kinks are not crossed by the probe.
Tensor away_from_zero(ad::Shape shape, std::uint64_t seed) {
  Tensor t = random_tensor(std::move(shape), seed);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += t[i] >= 0.0 ? 0.1 : -0.1;
  return t;
}

Var readout(Var x, std::uint64_t seed) {
  return ad::sum(ad::mul(x, x.tape->constant(random_tensor(x.shape(), seed))));
}

Var p(ad::Tape& tape, ad::ParamStore& params, const char* name) { return tape.param(params.at(name)); }

OpCase unary(std::string name, ad::Shape shape, std::function<Var(Var)> op) {
  return OpCase{name,
                [shape](ad::ParamStore& s) { s.add("a", away_from_zero(shape, 1)); },
                [op](ad::Tape& t, ad::ParamStore& s) { return readout(op(p(t, s, "a")), 99); }};
}

OpCase binary(std::string name, ad::Shape sa, ad::Shape sb, std::function<Var(Var, Var)> op) {
  return OpCase{name,
                [sa, sb](ad::ParamStore& s) {
                  s.add("a", random_tensor(sa, 1));
                  s.add("b", random_tensor(sb, 2));
                },
                [op](ad::Tape& t, ad::ParamStore& s) { return readout(op(p(t, s, "a"), p(t, s, "b")), 99); }};
}

const graph::PoiGraph& small_graph() {
  static const graph::PoiGraph g = [] {
    static std::vector<data::Trajectory> ts(2);
    ts[0].pois = {0, 1, 2, 1};
    ts[1].pois = {3, 2, 2, 4};
    std::vector<const data::Trajectory*> ptrs = {&ts[0], &ts[1]};
    return graph::build_poi_graph(ptrs, 5, graph::EdgeWeighting::kCount);
  }();
  return g;
}

}  // namespace

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  cases.push_back(binary("matmul", {3, 4}, {4, 5}, [](Var a, Var b) { return ad::matmul(a, b); }));
  cases.push_back(binary("matmul_transposed", {3, 4}, {5, 4}, [](Var a, Var b) { return ad::matmul(a, b, true); }));
  cases.push_back(binary("matmul_batched_left", {2, 3, 4}, {4, 5}, [](Var a, Var b) { return ad::matmul(a, b); }));
  cases.push_back(binary("bmm", {2, 3, 4}, {2, 4, 5}, [](Var a, Var b) { return ad::bmm(a, b); }));
  cases.push_back(binary("bmm_transposed", {2, 3, 4}, {2, 5, 4}, [](Var a, Var b) { return ad::bmm(a, b, true); }));
  cases.push_back(binary("add", {3, 4}, {3, 4}, [](Var a, Var b) { return ad::add(a, b); }));
  cases.push_back(binary("sub", {3, 4}, {3, 4}, [](Var a, Var b) { return ad::sub(a, b); }));
  cases.push_back(binary("mul", {3, 4}, {3, 4}, [](Var a, Var b) { return ad::mul(a, b); }));
  cases.push_back(binary("add_row", {2, 3, 4}, {4}, [](Var a, Var b) { return ad::add_row(a, b); }));
  cases.push_back(binary("scale_rows", {3, 4}, {3}, [](Var a, Var b) { return ad::scale_rows(a, b); }));
  cases.push_back(unary("scale", {3, 4}, [](Var a) { return ad::scale(a, -2.5); }));
  cases.push_back(unary("relu", {3, 4}, [](Var a) { return ad::relu(a); }));
  cases.push_back(unary("softmax", {3, 5}, [](Var a) { return ad::softmax(a); }));
  cases.push_back(unary("masked_softmax", {3, 5}, [](Var a) {
    static const std::vector<std::uint8_t> mask = {0, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 1, 1, 1};
    return ad::softmax(ad::masked_fill(a, mask, -std::numeric_limits<double>::infinity()));
  }));
  cases.push_back(unary("gather_rows", {5, 3}, [](Var a) {
    static const std::vector<std::size_t> ids = {4, 0, 4, 2, 1, 1};
    return ad::gather_rows(a, ids, {2, 3});
  }));
  cases.push_back(binary("concat_rows", {2, 3}, {4, 3}, [](Var a, Var b) {
    const Var parts[] = {a, b};
    return ad::concat_rows(parts);
  }));
  cases.push_back(binary("concat_cols", {2, 3, 2}, {2, 3, 4}, [](Var a, Var b) {
    const Var parts[] = {a, b};
    return ad::concat_cols(parts);
  }));
  cases.push_back(unary("slice_cols", {2, 3, 6}, [](Var a) { return ad::slice_cols(a, 1, 4); }));
  cases.push_back(unary("reshape", {2, 6}, [](Var a) { return ad::reshape(a, {3, 4}); }));
  cases.push_back(unary("dropout", {4, 5}, [](Var a) {
    Rng rng(3);
    return ad::dropout(a, 0.4, true, rng);
  }));
  cases.push_back(unary("mean", {3, 4}, [](Var a) { return ad::scale(ad::mean(ad::mul(a, a)), 3.0); }));
  cases.push_back(unary("sum", {3, 4}, [](Var a) { return ad::sum(ad::mul(a, a)); }));
  cases.push_back(unary("binary_cross_entropy", {3, 5}, [](Var a) {
    static const std::vector<std::size_t> targets = {0, 3, 4};
    return ad::binary_cross_entropy(ad::softmax(a), targets);
  }));
  cases.push_back(unary("categorical_cross_entropy", {3, 5}, [](Var a) {
    static const std::vector<std::size_t> targets = {1, 3, 2};
    return ad::categorical_cross_entropy(ad::softmax(a), targets);
  }));
  cases.push_back(unary("softmax_binary_cross_entropy", {4, 5}, [](Var a) {
    static const std::vector<std::size_t> targets = {0, 3, 4, 2};
    return ad::softmax_binary_cross_entropy(ad::scale(a, 6.0), targets);
  }));
  cases.push_back(unary("softmax_cross_entropy", {4, 5}, [](Var a) {
    static const std::vector<std::size_t> targets = {1, 3, 2, 0};
    return ad::softmax_cross_entropy(ad::scale(a, 6.0), targets);
  }));
  cases.push_back(unary("propagate", {5, 3}, [](Var a) {
    const auto& g = small_graph();
    return graph::propagate(g.propagation, g.propagation_t, a);
  }));
  cases.push_back(binary("gcn_forward", {5, 3}, {3, 3}, [](Var h0, Var w) {
    Rng rng(4);
    const Var weights[] = {w, w};
    return graph::gcn_forward(small_graph(), h0, weights, 0.25, true, rng);
  }));
  return cases;
}

std::vector<CheckResult> run_selftest() {
  std::vector<CheckResult> out;
  auto record = [&](std::string name, bool ok, std::string detail) {
    out.push_back(CheckResult{std::move(name), ok, std::move(detail)});
  };

  for (const OpCase& c : op_cases()) {
    ad::ParamStore params;
    c.init(params);
    const ad::GradCheck g = ad::check_gradients(c.fn, params, kGradEpsilon);
    record("gradient " + c.name, g.max_relative_error < kGradTolerance,
           fmt::format("max rel err {:.3g} at {}", g.max_relative_error, g.worst));
  }

  const data::Dataset ds = toy_dataset();
  const graph::PoiGraph graph = graph::build_poi_graph(ds, graph::EdgeWeighting::kCount);
  model::Model mdl(toy_model_config(), model::sizes_of(ds), 3);
  const auto instances = model::expand_prefixes(ds.select(data::Split::kTrain));
  const model::Batch batch = model::make_batch(std::span(instances).first(std::min<std::size_t>(12, instances.size())));
  {
    // Zero biases put ReLU inputs exactly on the kink whenever dropout clears
    // a whole attention row.
    Rng bias_rng(6);
    for (auto& p : mdl.params()) {
      if (p.name.ends_with(".b1") || p.name.ends_with(".b2")) {
        p.value = ad::uniform_init(p.value.shape(), -0.1, 0.1, bias_rng);
      }
    }
    const ad::GradCheck g = ad::check_gradients(
        [&](ad::Tape& tape, ad::ParamStore&) {
          Rng rng(5);
          const auto o = mdl.forward(tape, graph, batch, true, rng);
          return model::compute_loss(o.logits, batch, mdl.config()).total;
        },
        mdl.params(), kGradEpsilon);
    record("gradient end-to-end loss", g.max_relative_error < kGradTolerance,
           fmt::format("max rel err {:.3g} at {}, max abs err {:.3g} over {} elements", g.max_relative_error,
                       g.worst, g.max_absolute_error, g.checked));
  }

  {
    double worst = 0.0;
    for (std::size_t r = 0; r < graph.num_nodes; ++r) worst = std::max(worst, std::abs(graph.propagation.row_sum(r) - 1.0));
    record("propagation rows sum to 1", worst <= 1e-9, fmt::format("max deviation {:.3g}", worst));
  }

  {
    ad::Tape tape;
    Rng rng(0);
    model::AttentionTrace trace;
    const ad::Var table = mdl.poi_table(tape, graph, false, rng);
    const auto o = mdl.forward(tape, table, batch, false, rng, &trace);
    double worst = 0.0;
    auto check_rows = [&](const ad::Tensor& t) {
      for (std::size_t r = 0; r < t.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < t.cols(); ++c) s += t.at(r, c);
        worst = std::max(worst, std::abs(s - 1.0));
      }
    };
    for (const auto& probs : trace.probabilities) check_rows(probs.value());
    check_rows(o.weights.value());
    check_rows(ad::softmax(o.logits.poi).value());
    check_rows(ad::softmax(o.logits.region).value());
    check_rows(ad::softmax(o.logits.category).value());
    record("softmax rows sum to 1", worst <= 1e-9, fmt::format("max deviation {:.3g}", worst));
  }

  {
    std::vector<model::Instance> single = {instances.front()};
    std::vector<model::Instance> mixed = {instances.front(), instances.back()};
    for (const auto& in : instances) {
      if (in.prefix > mixed.back().prefix) mixed.back() = in;
    }
    Rng rng(0);
    ad::Tape t1, t2;
    const auto a = mdl.forward(t1, graph, model::make_batch(single), false, rng);
    const auto b = mdl.forward(t2, graph, model::make_batch(mixed), false, rng);
    double worst = 0.0;
    const ad::Tensor& la = a.logits.poi.value();
    const ad::Tensor& lb = b.logits.poi.value();
    for (std::size_t c = 0; c < la.cols(); ++c) worst = std::max(worst, std::abs(la.at(0, c) - lb.at(0, c)));
    record("padding and batch invariance", worst <= 1e-9, fmt::format("max difference {:.3g}", worst));
  }

  {
    double hr = 0.0;
    for (std::size_t r = 1; r <= 10; ++r) hr += eval::hr_at(r, 5);
    const bool ok = hr / 10.0 == 0.5 && eval::ndcg_at(3, 5) == 0.5 && eval::ndcg_at(7, 5) == 0.0;
    record("ranking metrics", ok, fmt::format("HR@5 over ranks 1..10 = {}", hr / 10.0));
  }
  return out;
}

}  // namespace mcmg::selftest
