#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ricon/graph.hpp"
#include "ricon/reg_aware.hpp"
#include "ricon/rng.hpp"
#include "ricon/span_grid.hpp"

namespace ricon {

struct AgnosticConfig {
  std::size_t width = 4;  // encoding width 2d
  std::size_t mlp_dim = 150;
  double mlp_dropout = 0.2;
  std::size_t max_span_len = 0;
};

// Head and tail projections 2d -> m, and the (m+1) x 1 x (m+1) scorer.
struct AgnosticParams {
  Param* head_w = nullptr;
  Param* head_b = nullptr;
  Param* tail_w = nullptr;
  Param* tail_b = nullptr;
  Param* u_m = nullptr;

  static AgnosticParams create(ParamStore& store, const AgnosticConfig& config, Rng& rng);
};

struct HeadTail {
  Var head;  // l x m
  Var tail;  // l x m
};

// tanh(h W + b) per position with separate head and tail weights. Only the
// agnostic encoding is an input.
HeadTail project_head_tail(Graph& graph, Var h_agnostic, const AgnosticParams& params,
                           const AgnosticConfig& config, Rng* dropout_rng);

// sigmoid([head_i ; 1]^T U_m [tail_j ; 1]) per span, as an S x 1 column.
Var boundary_scores(Graph& graph, const HeadTail& projections, const AgnosticParams& params,
                    std::span<const Span> spans);

using BoundaryGrid = SpanGrid<double>;
BoundaryGrid to_boundary_grid(Var probs, std::span<const Span> spans, std::size_t length,
                              std::size_t max_span_len);

// 1 where the span is a gold mention of any type.
std::vector<std::uint8_t> span_entity_targets(std::span<const Span> spans,
                                              std::span<const LabeledSpan> gold);

// Mean over spans of clamped binary cross-entropy.
Var agnostic_loss(Graph& graph, Var probs, std::span<const std::uint8_t> targets);

}  // namespace ricon
