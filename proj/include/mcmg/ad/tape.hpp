// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcmg/ad/params.hpp"
#include "mcmg/ad/tensor.hpp"

namespace mcmg::ad {

class Tape;

using NodeId = std::size_t;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Propagates the gradient of node `out` into the gradients of its inputs.
using BackwardFn = std::function<void(Tape& tape, NodeId out)>;

// Records operations in execution order, so the node list is always a valid
// topological order. Reverse replay accumulates gradients.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a parameter. Binding the same parameter twice returns the
  // same node.
  Var param(Parameter& p);

  // Appends a node computed from `inputs`. Rejects NaN in the result; `op`
  // names the operation in the error message.
  Var record(const char* op, Tensor value, std::vector<NodeId> inputs, BackwardFn backward);

  // Reverse-mode sweep from a scalar `loss`. Overwrites the gradient of every
  // parameter bound to this tape; parameters the loss does not depend on get
  // exact zeros. Parameters never bound are left untouched.
  void backward(Var loss);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  // Gradient buffer of an input, allocated (zeroed) on first use.
  Tensor& grad_accumulator(NodeId id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
};

}  // namespace mcmg::ad
