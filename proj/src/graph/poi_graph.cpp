// SPDX-License-Identifier: Apache-2.0

#include "mcmg/graph/poi_graph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mcmg/ad/ops.hpp"
#include "mcmg/common/error.hpp"

namespace mcmg::graph {

CsrMatrix CsrMatrix::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.row < 0 || e.col < 0 || static_cast<std::size_t>(e.row) >= rows || static_cast<std::size_t>(e.col) >= cols) {
      throw ShapeError(fmt::format("sparse entry ({}, {}) outside {}x{}", e.row, e.col, rows, cols));
    }
    if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
      m.val.back() += e.value;
      continue;
    }
    m.col.push_back(e.col);
    m.val.push_back(e.value);
    ++m.row_ptr[static_cast<std::size_t>(e.row) + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
    if (static_cast<std::size_t>(col[k]) == c) return val[k];
  }
  return 0.0;
}

double CsrMatrix::row_sum(std::size_t r) const {
  double s = 0.0;
  for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k];
  return s;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<Entry> entries;
  entries.reserve(nnz());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      entries.push_back(Entry{col[k], static_cast<std::int32_t>(r), val[k]});
    }
  }
  return from_entries(cols, rows, std::move(entries));
}

ad::Tensor CsrMatrix::dense() const {
  ad::Tensor out({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out.at(r, static_cast<std::size_t>(col[k])) = val[k];
  }
  return out;
}

ad::Tensor CsrMatrix::multiply(const ad::Tensor& x) const {
  if (x.rank() != 2 || x.dim(0) != cols) {
    throw ShapeError(fmt::format("sparse multiply: {}x{} by {}", rows, cols, ad::to_string(x.shape())));
  }
  const std::size_t d = x.dim(1);
  ad::Tensor out({rows, d});
  for (std::size_t r = 0; r < rows; ++r) {
    double* o = out.data() + r * d;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const double w = val[k];
      const double* xr = x.data() + static_cast<std::size_t>(col[k]) * d;
      for (std::size_t j = 0; j < d; ++j) o[j] += w * xr[j];
    }
  }
  return out;
}

const char* to_string(EdgeWeighting w) { return w == EdgeWeighting::kBinary ? "binary" : "count"; }

EdgeWeighting parse_edge_weighting(const std::string& text) {
  if (text == "binary") return EdgeWeighting::kBinary;
  if (text == "count") return EdgeWeighting::kCount;
  throw std::invalid_argument("edge weighting must be 'binary' or 'count', got '" + text + "'");
}

PoiGraph build_poi_graph(std::span<const data::Trajectory* const> trajectories, std::size_t num_pois,
                         EdgeWeighting weighting) {
  if (trajectories.empty()) throw DataError("cannot build the POI graph from an empty train split");
  std::vector<CsrMatrix::Entry> edges;
  for (const data::Trajectory* t : trajectories) {
    for (std::size_t k = 1; k < t->size(); ++k) edges.push_back({t->pois[k], t->pois[k - 1], 1.0});
  }
  PoiGraph g;
  g.num_nodes = num_pois;
  g.weighting = weighting;
  g.adjacency = CsrMatrix::from_entries(num_pois, num_pois, edges);
  if (weighting == EdgeWeighting::kBinary) std::fill(g.adjacency.val.begin(), g.adjacency.val.end(), 1.0);

  std::vector<CsrMatrix::Entry> looped;
  looped.reserve(g.adjacency.nnz() + num_pois);
  for (std::size_t r = 0; r < num_pois; ++r) {
    for (std::size_t k = g.adjacency.row_ptr[r]; k < g.adjacency.row_ptr[r + 1]; ++k) {
      looped.push_back({static_cast<std::int32_t>(r), g.adjacency.col[k], g.adjacency.val[k]});
    }
    looped.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(r), 1.0});
  }
  g.propagation = CsrMatrix::from_entries(num_pois, num_pois, std::move(looped));
  for (std::size_t r = 0; r < num_pois; ++r) {
    const double degree = g.propagation.row_sum(r);
    for (std::size_t k = g.propagation.row_ptr[r]; k < g.propagation.row_ptr[r + 1]; ++k) {
      g.propagation.val[k] /= degree;
    }
  }
  g.propagation_t = g.propagation.transposed();
  return g;
}

PoiGraph build_poi_graph(const data::Dataset& dataset, EdgeWeighting weighting) {
  return build_poi_graph(dataset.select(data::Split::kTrain), dataset.num_pois(), weighting);
}

ad::Var propagate(const CsrMatrix& p, const CsrMatrix& p_t, ad::Var x) {
  ad::Tensor out = p.multiply(x.value());
  const CsrMatrix* back = &p_t;
  return x.tape->record("propagate", std::move(out), {x.id}, [back, in = x.id](ad::Tape& tape, ad::NodeId self) {
    const ad::Tensor g = back->multiply(tape.grad(self));
    ad::Tensor& acc = tape.grad_accumulator(in);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  });
}

ad::Var gcn_forward(const PoiGraph& graph, ad::Var h0, std::span<const ad::Var> weights, double dropout,
                    bool train, Rng& rng) {
  if (weights.empty()) throw ShapeError("GCN needs at least one layer");
  ad::Var h = h0;
  for (std::size_t z = 0; z < weights.size(); ++z) {
    try {
      h = ad::relu(ad::matmul(propagate(graph.propagation, graph.propagation_t, h), weights[z]));
      h = ad::dropout(h, dropout, train, rng);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("GCN layer {}: {}", z, e.what()));
    }
    if (!h.value().all_finite()) throw NumericError(fmt::format("GCN layer {} produced non-finite values", z));
  }
  return h;
}

std::string edge_list_tsv(const PoiGraph& graph, const data::Vocabulary& pois) {
  const CsrMatrix by_source = graph.adjacency.transposed();
  std::string out = "src\tdst\tweight\n";
  for (std::size_t s = 0; s < by_source.rows; ++s) {
    for (std::size_t k = by_source.row_ptr[s]; k < by_source.row_ptr[s + 1]; ++k) {
      out += fmt::format("{}\t{}\t{}\n", pois.name(static_cast<std::int32_t>(s)), pois.name(by_source.col[k]),
                         by_source.val[k]);
    }
  }
  return out;
}

}  // namespace mcmg::graph
