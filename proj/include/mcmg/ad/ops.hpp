// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcmg/ad/tape.hpp"
#include "mcmg/common/rng.hpp"

// Differentiable operations. Every op records itself on the tape of its
// inputs; all inputs must share one tape.
//
// Convention: for a tensor of shape [..., n] the last axis is the column axis
// and the leading axes are flattened into rows.
namespace mcmg::ad {

// [..., k] x [k, n] -> [..., n]. With transpose_b, b is [n, k].
Var matmul(Var a, Var b, bool transpose_b = false);

// Batched product: [B, m, k] x [B, k, n] -> [B, m, n]. With transpose_b, b is
// [B, n, k].
Var bmm(Var a, Var b, bool transpose_b = false);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// a [..., n] plus a length-n row broadcast over every row.
Var add_row(Var a, Var row);
// a [R, n] with row r multiplied by s[r]; s has R elements.
Var scale_rows(Var a, Var s);
Var scale(Var a, double factor);

Var relu(Var a);
// Softmax along the last axis. Entries equal to -inf get probability 0; a row
// that is entirely -inf yields all zeros.
Var softmax(Var a);

// Replaces entries where mask != 0 with `fill`. Mask has one byte per element.
Var masked_fill(Var a, std::span<const std::uint8_t> mask, double fill);

// Rows of `table` (viewed as [R, n]) selected by `ids`. Result shape is
// `prefix` + [n]; numel(prefix) must equal ids.size().
Var gather_rows(Var table, std::span<const std::size_t> ids, Shape prefix);
Var gather_rows(Var table, std::span<const std::size_t> ids);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
// Columns [begin, end) of a [..., n] tensor.
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var reshape(Var a, Shape shape);

// Inverted dropout: in training, zeroes each element with probability `rate`
// and scales survivors by 1/(1-rate). Identity when !train or rate == 0.
Var dropout(Var a, double rate, bool train, Rng& rng);

Var sum(Var a);
Var mean(Var a);

// Per-row loss against integer targets, probabilities clamped to
// [kProbFloor, 1 - kProbFloor] before taking logs. Result shape [R, 1].
inline constexpr double kProbFloor = 1e-12;
// -sum_j [ y_j log p_j + (1 - y_j) log(1 - p_j) ] with y one-hot.
Var binary_cross_entropy(Var probs, std::span<const std::size_t> targets);
// -log p_target.
Var categorical_cross_entropy(Var probs, std::span<const std::size_t> targets);

// The same two losses applied to softmax(logits), evaluated in log space so
// saturated rows keep a usable gradient. Result shape [R, 1].
Var softmax_binary_cross_entropy(Var logits, std::span<const std::size_t> targets);
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets);

}  // namespace mcmg::ad
