// SPDX-License-Identifier: Apache-2.0

#include "mcmg/common/rng.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include "mcmg/common/error.hpp"

namespace mcmg {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Rejection sampling on the top of the range avoids modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::restore(std::string_view state) {
  std::istringstream in{std::string(state)};
  in >> engine_;
  if (in.fail()) throw FormatError("invalid random engine state");
}

}  // namespace mcmg
