#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/graph.hpp"
#include "ricon/rng.hpp"
#include "ricon/span_grid.hpp"

namespace ricon {

enum class Pooling { kAttention, kMean, kMax };
enum class Fusion { kGate, kAdd, kConcat };

struct AwareConfig {
  std::size_t width = 4;        // encoding width 2d
  std::size_t num_classes = 2;  // entity types + NONE
  Pooling pooling = Pooling::kAttention;
  Fusion fusion = Fusion::kGate;
  // Separate head/tail projections before the biaffine (ablation variant).
  bool head_tail_mlps = false;
  // Off gives the plain biaffine span classifier.
  bool use_regularity = true;
  std::size_t max_span_len = 0;
};

// w_reg (2d x 1), b_reg (1); u1 (2d x 2d x 2d), u2 (4d x 2d), b1 (2d);
// u3 (4d x 1), b2 (1); w_type (2d x c), b3 (c).
struct AwareParams {
  Param* w_reg = nullptr;
  Param* b_reg = nullptr;
  Param* u1 = nullptr;
  Param* u2 = nullptr;
  Param* b1 = nullptr;
  Param* u3 = nullptr;
  Param* b2 = nullptr;
  Param* w_type = nullptr;
  Param* b3 = nullptr;
  // Present only for the matching variant switches.
  Param* head_w = nullptr;
  Param* head_b = nullptr;
  Param* tail_w = nullptr;
  Param* tail_b = nullptr;
  Param* w_cat = nullptr;
  Param* b_cat = nullptr;

  static AwareParams create(ParamStore& store, const AwareConfig& config, Rng& rng);
};

struct LabeledSpan {
  Span span;
  TypeId type = 0;
};

struct RegularityFeatures {
  Var pooled;  // S x 2d, one row per requested span
  // Attention weights (rows x l) for multi-character spans under attention
  // pooling; alpha_row[s] is the row of span s or npos for bypassed spans.
  Var alpha;
  std::vector<std::size_t> alpha_row;
};

// Pools each span's rows of h. Single-character spans return h_i directly.
RegularityFeatures regularity_features(Graph& graph, Var h, std::span<const Span> spans,
                                       const AwareParams& params, Pooling pooling);

// h_i^T U1 h_j + [h_i ; h_j] U2 + b1 for every span.
Var span_representation(Graph& graph, Var h, std::span<const Span> spans,
                        const AwareParams& params, bool head_tail_mlps = false);

struct FusedSpans {
  Var fused;  // S x 2d
  Var gate;   // S x 1 under gate fusion, invalid otherwise
};

FusedSpans fuse(Graph& graph, Var span_rep, Var regularity, const AwareParams& params,
                Fusion fusion);

// Single-span forms of the above.
Var span_regularity(Graph& graph, Var h, std::size_t i, std::size_t j, const AwareParams& params);
Var span_biaffine(Graph& graph, Var h, std::size_t i, std::size_t j, const AwareParams& params);
Var gate_fuse(Graph& graph, Var h_span, Var h_reg, const AwareParams& params);

struct AwareOutput {
  std::vector<Span> spans;
  Var logits;  // S x c
  Var gate;
  RegularityFeatures regularity;
};

AwareOutput classify_spans(Graph& graph, Var h_aware, const AwareParams& params,
                           const AwareConfig& config);

struct SpanTypeInfo {
  std::vector<double> probs;
  double gate = 0.0;           // NaN when fusion is not gated
  std::vector<double> alpha;   // weights over the span's characters
};

using SpanTypeGrid = SpanGrid<SpanTypeInfo>;

SpanTypeGrid to_type_grid(const AwareOutput& output, std::size_t length,
                          std::size_t max_span_len);

// Gold class per span: the entity type when the span is a gold mention,
// NONE otherwise. `dropped` counts gold mentions outside the enumeration.
std::vector<std::size_t> span_type_targets(std::span<const Span> spans,
                                           std::span<const LabeledSpan> gold,
                                           std::size_t* dropped = nullptr);

// Mean over rows of cross-entropy against the targets.
Var aware_loss(Graph& graph, Var logits, std::span<const std::size_t> targets);

}  // namespace ricon
