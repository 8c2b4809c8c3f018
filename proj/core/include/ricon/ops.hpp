#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ricon/graph.hpp"
#include "ricon/rng.hpp"
#include "ricon/span_grid.hpp"

// Differentiable primitives. Every op checks operand shapes (ShapeError naming
// both shapes) and the finiteness of its output (NumericError naming the op).
// Matrix ops treat rank-1 tensors as a single row.
namespace ricon::ops {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// x (r x c) plus bias (c entries) on every row.
Var add_bias(Var x, Var bias);
// Scales row r of x (r x c) by col[r] where col is (r x 1).
Var mul_col(Var x, Var col);
Var scale(Var x, Real factor);
// factor * x + offset, elementwise.
Var affine(Var x, Real factor, Real offset);

Var tanh(Var x);
Var sigmoid(Var x);
Var log(Var x);
Var exp(Var x);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var gather_rows(Var x, std::span<const std::size_t> rows);
Var transpose(Var x);
Var repeat_rows(Var row, std::size_t count);

// Row softmax with the row max subtracted first.
Var softmax_rows(Var x);
// Row softmax restricted to entries where mask != 0; masked entries are 0.
Var masked_softmax_rows(Var x, std::vector<std::uint8_t> mask);

// Inverted dropout with an explicit stored mask; identity when rate == 0.
Var dropout(Var x, Real rate, Rng& rng);

Var sum(Var x);
Var mean(Var x);

// out[s, k] = sum_ab left[pairs[s].start, a] * weight[a, k, b] * right[pairs[s].end, b]
// for weight of shape (A x K x B).
Var bilinear(Var left, Var weight, Var right, std::span<const Span> pairs);

// Elementwise max over rows start..end of h for every span.
Var span_max_pool(Var h, std::span<const Span> spans);

// Mean over rows of -log softmax(logits)[row, target]; log-sum-exp stabilized.
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets);

inline constexpr Real kProbClamp = 1e-7;
// Mean over rows of binary cross-entropy; probs are clamped to
// [kProbClamp, 1 - kProbClamp] before the log.
Var binary_cross_entropy(Var probs, std::span<const std::uint8_t> targets);

}  // namespace ricon::ops
