// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "mcmg/ad/params.hpp"
#include "mcmg/ad/tape.hpp"

namespace mcmg::ad {

// Builds a scalar from the parameters on a fresh tape. Must be a pure
// function of the parameter values (reseed any dropout stream per call).
using ScalarFn = std::function<Var(Tape& tape, ParamStore& params)>;

struct GradCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::string worst;  // "name[index]" of the worst element
  std::size_t checked = 0;
};

// Relative error of one element: |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckFloor = 1e-5;

// Compares reverse-mode gradients with central differences of step `eps`,
// at most `max_per_param` evenly spaced elements per parameter (0 = all).
GradCheck check_gradients(const ScalarFn& fn, ParamStore& params, double eps = 1e-5,
                          std::size_t max_per_param = 0);

}  // namespace mcmg::ad
