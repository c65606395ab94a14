// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcmg/ad/gradcheck.hpp"
#include "mcmg/data/dataset.hpp"
#include "mcmg/model/config.hpp"

namespace mcmg::selftest {

// Ten POIs in three well separated regions, four categories, six users with
// four days each. Small enough for exhaustive gradient checks.
data::Dataset toy_dataset();

// Model settings sized for the toy dataset.
model::ModelConfig toy_model_config();

struct OpCase {
  std::string name;
  std::function<void(ad::ParamStore&)> init;
  ad::ScalarFn fn;
};

// One scalar readout per differentiable operation, with random inputs.
std::vector<OpCase> op_cases();

inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kGradEpsilon = 1e-5;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_selftest();

}  // namespace mcmg::selftest
