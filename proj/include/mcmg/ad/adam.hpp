// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mcmg/ad/params.hpp"

namespace mcmg::ad {

struct AdamConfig {
  double lr = 1e-3;
  double lambda = 0.0;  // L2 coefficient, added to the gradient as lambda * param
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct Moments {
  Tensor first;
  Tensor second;
};

// Bias-corrected Adam over a ParamStore.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // One update using each parameter's current gradient. A parameter without a
  // gradient is updated as if its gradient were zero (and a warning is logged
  // once per name).
  void step(ParamStore& params);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::uint64_t steps() const { return steps_; }
  const std::map<std::string, Moments>& moments() const { return moments_; }

  // Restores a previously saved state. Used by checkpoint loading.
  void restore(AdamConfig config, std::uint64_t steps, std::map<std::string, Moments> moments);

 private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
  std::map<std::string, bool> warned_missing_;
};

}  // namespace mcmg::ad
