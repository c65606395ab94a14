// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcmg/ad/tape.hpp"
#include "mcmg/common/rng.hpp"
#include "mcmg/data/dataset.hpp"

namespace mcmg::graph {

// Compressed sparse rows. Column indices are ascending within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  struct Entry {
    std::int32_t row;
    std::int32_t col;
    double value;
  };
  // Duplicate coordinates are summed.
  static CsrMatrix from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t nnz() const { return val.size(); }
  double at(std::size_t r, std::size_t c) const;
  double row_sum(std::size_t r) const;
  CsrMatrix transposed() const;
  ad::Tensor dense() const;
  // [cols, d] -> [rows, d]
  ad::Tensor multiply(const ad::Tensor& x) const;
};

enum class EdgeWeighting { kBinary, kCount };

const char* to_string(EdgeWeighting w);
EdgeWeighting parse_edge_weighting(const std::string& text);

// Directed transition graph over POIs. adjacency(i, j) holds the weight of the
// edge j -> i. propagation is the self-looped adjacency normalized to unit
// row sums.
struct PoiGraph {
  std::size_t num_nodes = 0;
  EdgeWeighting weighting = EdgeWeighting::kCount;
  CsrMatrix adjacency;
  CsrMatrix propagation;
  CsrMatrix propagation_t;

  std::size_t num_edges() const { return adjacency.nnz(); }
};

// Edges come from consecutive check-ins of the given trajectories.
PoiGraph build_poi_graph(std::span<const data::Trajectory* const> trajectories, std::size_t num_pois,
                         EdgeWeighting weighting);
// Uses the train split.
PoiGraph build_poi_graph(const data::Dataset& dataset, EdgeWeighting weighting);

// P x as a differentiable op; `p_t` must be the transpose of `p`. Both
// matrices must outlive the tape.
ad::Var propagate(const CsrMatrix& p, const CsrMatrix& p_t, ad::Var x);

// Z layers of relu(P H W), dropout on each layer output in training.
ad::Var gcn_forward(const PoiGraph& graph, ad::Var h0, std::span<const ad::Var> weights, double dropout,
                    bool train, Rng& rng);

// "src\tdst\tweight" lines with POI names, sorted by source then destination.
std::string edge_list_tsv(const PoiGraph& graph, const data::Vocabulary& pois);

}  // namespace mcmg::graph
