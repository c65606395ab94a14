// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/adam.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "mcmg/common/error.hpp"

namespace mcmg::ad {

void Adam::step(ParamStore& params) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  for (Parameter& p : params) {
    auto [it, inserted] = moments_.try_emplace(p.name);
    Moments& m = it->second;
    if (inserted || m.first.shape() != p.value.shape()) {
      m.first = Tensor(p.value.shape());
      m.second = Tensor(p.value.shape());
    }
    const bool has_grad = p.grad.shape() == p.value.shape();
    if (!has_grad && !warned_missing_[p.name]) {
      warned_missing_[p.name] = true;
      spdlog::warn("parameter '{}' has no gradient; treating it as zero", p.name);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = (has_grad ? p.grad[i] : 0.0) + config_.lambda * p.value[i];
      m.first[i] = config_.beta1 * m.first[i] + (1.0 - config_.beta1) * g;
      m.second[i] = config_.beta2 * m.second[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m.first[i] / bias1;
      const double v_hat = m.second[i] / bias2;
      p.value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::restore(AdamConfig config, std::uint64_t steps, std::map<std::string, Moments> moments) {
  config_ = config;
  steps_ = steps;
  moments_ = std::move(moments);
}

}  // namespace mcmg::ad
