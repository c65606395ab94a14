// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <map>
#include <string>

#include "mcmg/ad/tensor.hpp"
#include "mcmg/common/rng.hpp"

namespace mcmg::ad {

// A learnable tensor. `grad` is empty until the first backward pass that
// reaches it or the first zero_grad().
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameter registry. Iteration follows insertion order; references
// returned by add() stay valid for the lifetime of the store.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Parameter& add(std::string name, Tensor init);

  bool contains(const std::string& name) const { return index_.contains(name); }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  // Copies values (not gradients) from a store with identical names/shapes.
  void assign_values(const ParamStore& other);
  std::size_t total_elements() const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

Tensor uniform_init(Shape shape, double lo, double hi, Rng& rng);
// Glorot/Xavier uniform for a fan_in x fan_out projection.
Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace mcmg::ad
