// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/tape.hpp"

#include "mcmg/common/error.hpp"

namespace mcmg::ad {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  if (value.has_nan()) throw NumericError("constant input contains NaN");
  nodes_.push_back(Node{std::move(value), Tensor(), {}, nullptr, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  if (p.value.has_nan()) throw NumericError("parameter '" + p.name + "' contains NaN");
  nodes_.push_back(Node{p.value, Tensor(), {}, nullptr, &p});
  const NodeId id = nodes_.size() - 1;
  param_nodes_.emplace(&p, id);
  return Var{this, id};
}

Var Tape::record(const char* op, Tensor value, std::vector<NodeId> inputs, BackwardFn backward) {
  if (value.has_nan()) throw NumericError(std::string(op) + " produced NaN");
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(inputs), std::move(backward), nullptr});
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_accumulator(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss belongs to another tape");
  if (value(loss.id).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + to_string(value(loss.id).shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  grad_accumulator(loss.id).fill(1.0);
  for (NodeId id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr) continue;
    n.param->grad = n.grad.empty() ? Tensor(n.value.shape()) : n.grad;
  }
}

}  // namespace mcmg::ad
