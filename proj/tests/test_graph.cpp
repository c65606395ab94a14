// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mcmg/ad/ops.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/graph/poi_graph.hpp"

using namespace mcmg;
using namespace mcmg::graph;
using ad::Tensor;

namespace {

std::vector<data::Trajectory> random_walks(std::size_t n, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<data::Trajectory> out(count);
  for (auto& t : out) {
    const std::size_t len = 2 + rng.below(6);
    for (std::size_t k = 0; k < len; ++k) t.pois.push_back(static_cast<std::int32_t>(rng.below(n)));
  }
  return out;
}

std::vector<const data::Trajectory*> pointers(const std::vector<data::Trajectory>& ts) {
  std::vector<const data::Trajectory*> out;
  for (const auto& t : ts) out.push_back(&t);
  return out;
}

// Dense (A + I) with row i collecting transitions that enter POI i.
Tensor dense_in_degree(const std::vector<data::Trajectory>& ts, std::size_t n, bool binary) {
  Tensor a({n, n});
  for (const auto& t : ts) {
    for (std::size_t k = 1; k < t.pois.size(); ++k) {
      double& cell = a.at(static_cast<std::size_t>(t.pois[k]), static_cast<std::size_t>(t.pois[k - 1]));
      cell = binary ? 1.0 : cell + 1.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) a.at(i, i) += 1.0;
  return a;
}

Tensor dense_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < k; ++q) s += a.at(i, q) * b.at(q, j);
      out.at(i, j) = s;
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("poi_graph") {
  TEST_CASE("edges point into the later POI") {
    std::vector<data::Trajectory> ts(2);
    ts[0].pois = {0, 1, 2, 1};
    ts[1].pois = {0, 1};
    const PoiGraph g = build_poi_graph(pointers(ts), 3, EdgeWeighting::kCount);
    CHECK(g.adjacency.at(1, 0) == 2.0);
    CHECK(g.adjacency.at(0, 1) == 0.0);
    CHECK(g.adjacency.at(2, 1) == 1.0);
    CHECK(g.adjacency.at(1, 2) == 1.0);
    CHECK(g.num_edges() == 3);
    // Row 1 of A + I is (2, 1, 1).
    CHECK(g.propagation.at(1, 0) == doctest::Approx(0.5));
    CHECK(g.propagation.at(1, 1) == doctest::Approx(0.25));
    CHECK(g.propagation.at(0, 0) == 1.0);

    const PoiGraph b = build_poi_graph(pointers(ts), 3, EdgeWeighting::kBinary);
    CHECK(b.adjacency.at(1, 0) == 1.0);
    CHECK(b.propagation.at(1, 0) == doctest::Approx(1.0 / 3));

    data::Vocabulary names = data::Vocabulary::from_names({"a", "b", "c"});
    CHECK(edge_list_tsv(g, names) == "src\tdst\tweight\na\tb\t2\nb\tc\t1\nc\tb\t1\n");
  }

  TEST_CASE("propagation is row stochastic") {
    const auto ts = random_walks(40, 60, 3);
    for (auto w : {EdgeWeighting::kCount, EdgeWeighting::kBinary}) {
      const PoiGraph g = build_poi_graph(pointers(ts), 40, w);
      for (std::size_t r = 0; r < 40; ++r) CHECK(std::abs(g.propagation.row_sum(r) - 1.0) <= 1e-9);
      CHECK(g.propagation_t.dense() == [&] {
        Tensor d = g.propagation.dense();
        Tensor t({40, 40});
        for (std::size_t i = 0; i < 40; ++i) {
          for (std::size_t j = 0; j < 40; ++j) t.at(j, i) = d.at(i, j);
        }
        return t;
      }());
    }
  }

  TEST_CASE("sparse GCN equals dense evaluation") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const std::size_t n = 10 * seed;
      const bool binary = seed % 2 == 0;
      const auto ts = random_walks(n, 3 * n, seed);
      const PoiGraph g = build_poi_graph(pointers(ts), n, binary ? EdgeWeighting::kBinary : EdgeWeighting::kCount);

      Tensor p = dense_in_degree(ts, n, binary);
      for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += p.at(i, j);
        for (std::size_t j = 0; j < n; ++j) p.at(i, j) /= deg;
      }
      CHECK(ad::max_abs_diff(p, g.propagation.dense()) <= 1e-15);

      Rng rng(seed);
      const Tensor h0 = ad::uniform_init({n, 6}, -1, 1, rng);
      const Tensor w1 = ad::glorot_init(6, 6, rng);
      const Tensor w2 = ad::glorot_init(6, 6, rng);
      Tensor expected = h0;
      for (const Tensor* w : {&w1, &w2}) {
        expected = dense_matmul(dense_matmul(p, expected), *w);
        for (double& v : expected.values()) v = std::max(v, 0.0);
      }
      ad::Tape tape;
      const ad::Var weights[] = {tape.constant(w1), tape.constant(w2)};
      Rng unused(0);
      const ad::Var h = gcn_forward(g, tape.constant(h0), weights, 0.5, false, unused);
      CAPTURE(n);
      CHECK(ad::max_abs_diff(h.value(), expected) <= 1e-12);
    }
  }

  TEST_CASE("errors") {
    std::vector<const data::Trajectory*> none;
    CHECK_THROWS_AS(build_poi_graph(none, 3, EdgeWeighting::kCount), DataError);
    CHECK_THROWS_AS(parse_edge_weighting("weighted"), std::invalid_argument);
    CHECK(parse_edge_weighting("binary") == EdgeWeighting::kBinary);

    std::vector<data::Trajectory> ts(1);
    ts[0].pois = {0, 1};
    const PoiGraph g = build_poi_graph(pointers(ts), 2, EdgeWeighting::kCount);
    ad::Tape tape;
    Tensor bad({2, 2});
    bad[0] = std::numeric_limits<double>::infinity();
    const ad::Var w[] = {tape.constant(Tensor::identity(2))};
    Rng rng(0);
    CHECK_THROWS_AS(gcn_forward(g, tape.constant(bad), w, 0.0, false, rng), NumericError);
    CHECK_THROWS_AS(gcn_forward(g, tape.constant(Tensor({3, 2})), w, 0.0, false, rng), ShapeError);
  }
}
