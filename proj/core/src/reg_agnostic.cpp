#include "ricon/reg_agnostic.hpp"

#include <cmath>
#include <set>

#include "ricon/errors.hpp"
#include "ricon/ops.hpp"

namespace ricon {
namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

AgnosticParams AgnosticParams::create(ParamStore& store, const AgnosticConfig& cfg, Rng& rng) {
  if (cfg.mlp_dim < 1) throw ConfigError("agnostic mlp_dim must be positive");
  std::size_t w = cfg.width, m = cfg.mlp_dim;
  double bound = std::sqrt(6.0 / static_cast<double>(w + m));
  AgnosticParams p;
  p.head_w = &store.add("agnostic.mlp_head.w", uniform_tensor({w, m}, bound, rng));
  p.head_b = &store.add("agnostic.mlp_head.b", Tensor({m}));
  p.tail_w = &store.add("agnostic.mlp_tail.w", uniform_tensor({w, m}, bound, rng));
  p.tail_b = &store.add("agnostic.mlp_tail.b", Tensor({m}));
  p.u_m = &store.add("agnostic.u_m", uniform_tensor({m + 1, 1, m + 1}, 1.0 / static_cast<double>(m + 1), rng));
  return p;
}

HeadTail project_head_tail(Graph& graph, Var h_agnostic, const AgnosticParams& params,
                           const AgnosticConfig& config, Rng* dropout_rng) {
  HeadTail out;
  out.head = ops::tanh(ops::add_bias(ops::matmul(h_agnostic, graph.param(*params.head_w)),
                                     graph.param(*params.head_b)));
  out.tail = ops::tanh(ops::add_bias(ops::matmul(h_agnostic, graph.param(*params.tail_w)),
                                     graph.param(*params.tail_b)));
  if (dropout_rng) {
    out.head = ops::dropout(out.head, config.mlp_dropout, *dropout_rng);
    out.tail = ops::dropout(out.tail, config.mlp_dropout, *dropout_rng);
  }
  return out;
}

Var boundary_scores(Graph& graph, const HeadTail& projections, const AgnosticParams& params,
                    std::span<const Span> spans) {
  std::size_t length = projections.head.rows();
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) throw ContractError("boundary_scores: invalid span");
  }
  Var ones = graph.constant(Tensor({length, 1}, 1.0));
  std::vector<Var> head_parts{projections.head, ones};
  std::vector<Var> tail_parts{projections.tail, ones};
  Var score = ops::bilinear(ops::concat_cols(head_parts), graph.param(*params.u_m),
                            ops::concat_cols(tail_parts), spans);
  return ops::sigmoid(score);
}

BoundaryGrid to_boundary_grid(Var probs, std::span<const Span> spans, std::size_t length,
                              std::size_t max_span_len) {
  BoundaryGrid grid(length, max_span_len);
  for (std::size_t s = 0; s < spans.size(); ++s) grid(spans[s].start, spans[s].end) = probs.value()[s];
  return grid;
}

std::vector<std::uint8_t> span_entity_targets(std::span<const Span> spans,
                                              std::span<const LabeledSpan> gold) {
  std::set<Span> gold_spans;
  for (const auto& g : gold) gold_spans.insert(g.span);
  std::vector<std::uint8_t> targets(spans.size(), 0);
  for (std::size_t s = 0; s < spans.size(); ++s) targets[s] = gold_spans.contains(spans[s]) ? 1 : 0;
  return targets;
}

Var agnostic_loss(Graph&, Var probs, std::span<const std::uint8_t> targets) {
  return ops::binary_cross_entropy(probs, targets);
}

}  // namespace ricon
