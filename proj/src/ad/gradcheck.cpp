// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mcmg::ad {

GradCheck check_gradients(const ScalarFn& fn, ParamStore& params, double eps, std::size_t max_per_param) {
  {
    Tape tape;
    tape.backward(fn(tape, params));
  }
  std::vector<Tensor> analytic;
  for (const auto& p : params) analytic.push_back(p.grad.empty() ? Tensor(p.value.shape()) : p.grad);

  auto eval = [&] {
    Tape tape;
    return fn(tape, params).value()[0];
  };

  GradCheck out;
  std::size_t pi = 0;
  for (auto& p : params) {
    const std::size_t n = p.value.size();
    const std::size_t stride = max_per_param == 0 || n <= max_per_param ? 1 : n / max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = eval();
      p.value[i] = saved - eps;
      const double down = eval();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      ++out.checked;
      out.max_absolute_error = std::max(out.max_absolute_error, abs_err);
      if (rel > out.max_relative_error || out.worst.empty()) {
        if (rel >= out.max_relative_error) out.worst = p.name + "[" + std::to_string(i) + "]";
        out.max_relative_error = std::max(out.max_relative_error, rel);
      }
    }
    ++pi;
  }
  return out;
}

}  // namespace mcmg::ad
