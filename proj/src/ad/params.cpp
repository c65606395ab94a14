// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/params.hpp"

#include <cmath>
#include <stdexcept>

#include "mcmg/common/error.hpp"

namespace mcmg::ad {

ParamStore::ParamStore(const ParamStore& other) : params_(other.params_), index_(other.index_) {}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    params_ = other.params_;
    index_ = other.index_;
  }
  return *this;
}

Parameter& ParamStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{std::move(name), std::move(init), Tensor()});
  return params_.back();
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return params_[it->second];
}

void ParamStore::zero_grad() {
  for (auto& p : params_) {
    if (p.grad.shape() != p.value.shape()) {
      p.grad = Tensor(p.value.shape());
    } else {
      p.grad.fill(0.0);
    }
  }
}

void ParamStore::assign_values(const ParamStore& other) {
  for (auto& p : params_) {
    const Parameter& src = other.at(p.name);
    if (src.value.shape() != p.value.shape()) {
      throw ShapeError("parameter '" + p.name + "' has shape " + to_string(p.value.shape()) +
                       " but source has " + to_string(src.value.shape()));
    }
    p.value = src.value;
  }
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Tensor uniform_init(Shape shape, double lo, double hi, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_init({fan_in, fan_out}, -limit, limit, rng);
}

}  // namespace mcmg::ad
