// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "mcmg/ad/adam.hpp"
#include "mcmg/ad/params.hpp"
#include "mcmg/common/container.hpp"

namespace mcmg::ad {

// Parameter section: count, then per parameter name, shape, raw float64 data.
std::string encode_params(const ParamStore& params);
// Overwrites values in `params`, which must already hold every stored name
// with the stored shape.
void decode_params(ByteReader reader, ParamStore& params);
// Rebuilds a store from scratch.
ParamStore decode_params(ByteReader reader);

// Adam section: hyperparameters, step counter, then per parameter name and
// both moment buffers.
std::string encode_adam(const Adam& adam);
Adam decode_adam(ByteReader reader);

}  // namespace mcmg::ad
