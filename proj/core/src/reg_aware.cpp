#include "ricon/reg_aware.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "ricon/errors.hpp"
#include "ricon/ops.hpp"

namespace ricon {
namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::vector<std::size_t> starts_of(std::span<const Span> spans) {
  std::vector<std::size_t> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(s.start);
  return out;
}

std::vector<std::size_t> ends_of(std::span<const Span> spans) {
  std::vector<std::size_t> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(s.end);
  return out;
}

void check_spans(std::span<const Span> spans, std::size_t length) {
  if (spans.empty()) throw ContractError("no spans given");
  for (const auto& s : spans) {
    if (s.start > s.end) {
      throw ContractError("span start " + std::to_string(s.start) + " after end " +
                          std::to_string(s.end));
    }
    if (s.end >= length) throw ContractError("span end beyond the sentence");
  }
}

}  // namespace

AwareParams AwareParams::create(ParamStore& store, const AwareConfig& cfg, Rng& rng) {
  if (cfg.num_classes < 2) throw ConfigError("type classifier needs at least 2 classes");
  std::size_t w = cfg.width;
  AwareParams p;
  p.w_reg = &store.add("aware.w_reg", uniform_tensor({w, 1}, xavier(w, 1), rng));
  p.b_reg = &store.add("aware.b_reg", Tensor({1}));
  p.u1 = &store.add("aware.u1", uniform_tensor({w, w, w}, 1.0 / static_cast<double>(w), rng));
  p.u2 = &store.add("aware.u2", uniform_tensor({2 * w, w}, xavier(2 * w, w), rng));
  p.b1 = &store.add("aware.b1", Tensor({w}));
  p.u3 = &store.add("aware.u3", uniform_tensor({2 * w, 1}, xavier(2 * w, 1), rng));
  p.b2 = &store.add("aware.b2", Tensor({1}));
  p.w_type = &store.add("aware.w_type", uniform_tensor({w, cfg.num_classes}, xavier(w, cfg.num_classes), rng));
  p.b3 = &store.add("aware.b3", Tensor({cfg.num_classes}));
  if (cfg.head_tail_mlps) {
    p.head_w = &store.add("aware.mlp_head.w", uniform_tensor({w, w}, xavier(w, w), rng));
    p.head_b = &store.add("aware.mlp_head.b", Tensor({w}));
    p.tail_w = &store.add("aware.mlp_tail.w", uniform_tensor({w, w}, xavier(w, w), rng));
    p.tail_b = &store.add("aware.mlp_tail.b", Tensor({w}));
  }
  if (cfg.fusion == Fusion::kConcat) {
    p.w_cat = &store.add("aware.w_cat", uniform_tensor({2 * w, w}, xavier(2 * w, w), rng));
    p.b_cat = &store.add("aware.b_cat", Tensor({w}));
  }
  return p;
}

RegularityFeatures regularity_features(Graph& graph, Var h, std::span<const Span> spans,
                                       const AwareParams& params, Pooling pooling) {
  std::size_t length = h.rows();
  check_spans(spans, length);
  constexpr auto npos = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> single_rows, single_pos, multi_pos;
  std::vector<Span> multi;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (spans[s].start == spans[s].end) {
      single_rows.push_back(spans[s].start);
      single_pos.push_back(s);
    } else {
      multi.push_back(spans[s]);
      multi_pos.push_back(s);
    }
  }

  RegularityFeatures out;
  out.alpha_row.assign(spans.size(), npos);
  std::vector<Var> parts;
  if (!single_rows.empty()) parts.push_back(ops::gather_rows(h, single_rows));
  if (!multi.empty()) {
    Var pooled;
    if (pooling == Pooling::kMax) {
      pooled = ops::span_max_pool(h, multi);
    } else {
      std::vector<std::uint8_t> mask(multi.size() * length, 0);
      for (std::size_t r = 0; r < multi.size(); ++r) {
        for (std::size_t t = multi[r].start; t <= multi[r].end; ++t) mask[r * length + t] = 1;
      }
      Var alpha;
      if (pooling == Pooling::kAttention) {
        Var scores = ops::add_bias(ops::matmul(h, graph.param(*params.w_reg)), graph.param(*params.b_reg));
        Var logits = ops::repeat_rows(ops::transpose(scores), multi.size());
        alpha = ops::masked_softmax_rows(logits, std::move(mask));
      } else {
        Tensor weights({multi.size(), length});
        for (std::size_t r = 0; r < multi.size(); ++r) {
          double w = 1.0 / static_cast<double>(multi[r].length());
          for (std::size_t t = multi[r].start; t <= multi[r].end; ++t) weights.at(r, t) = w;
        }
        alpha = graph.constant(std::move(weights));
      }
      pooled = ops::matmul(alpha, h);
      out.alpha = alpha;
      for (std::size_t r = 0; r < multi.size(); ++r) out.alpha_row[multi_pos[r]] = r;
    }
    parts.push_back(pooled);
  }
  Var stacked = parts.size() == 1 ? parts[0] : ops::concat_rows(parts);

  // Restore the caller's span order when singles are not already first.
  std::vector<std::size_t> order;
  order.reserve(spans.size());
  order.insert(order.end(), single_pos.begin(), single_pos.end());
  order.insert(order.end(), multi_pos.begin(), multi_pos.end());
  bool identity = true;
  for (std::size_t k = 0; k < order.size(); ++k) identity = identity && order[k] == k;
  if (identity) {
    out.pooled = stacked;
  } else {
    std::vector<std::size_t> inverse(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) inverse[order[k]] = k;
    out.pooled = ops::gather_rows(stacked, inverse);
  }
  return out;
}

Var span_representation(Graph& graph, Var h, std::span<const Span> spans,
                        const AwareParams& params, bool head_tail_mlps) {
  check_spans(spans, h.rows());
  Var head = h;
  Var tail = h;
  if (head_tail_mlps) {
    if (!params.head_w) throw ContractError("head/tail MLP parameters were not created");
    head = ops::tanh(ops::add_bias(ops::matmul(h, graph.param(*params.head_w)), graph.param(*params.head_b)));
    tail = ops::tanh(ops::add_bias(ops::matmul(h, graph.param(*params.tail_w)), graph.param(*params.tail_b)));
  }
  Var bilinear = ops::bilinear(head, graph.param(*params.u1), tail, spans);
  auto starts = starts_of(spans);
  auto ends = ends_of(spans);
  std::vector<Var> pair{ops::gather_rows(head, starts), ops::gather_rows(tail, ends)};
  Var linear = ops::matmul(ops::concat_cols(pair), graph.param(*params.u2));
  return ops::add_bias(ops::add(bilinear, linear), graph.param(*params.b1));
}

FusedSpans fuse(Graph& graph, Var span_rep, Var regularity, const AwareParams& params,
                Fusion fusion) {
  FusedSpans out;
  switch (fusion) {
    case Fusion::kAdd:
      out.fused = ops::add(span_rep, regularity);
      break;
    case Fusion::kConcat: {
      if (!params.w_cat) throw ContractError("concat fusion parameters were not created");
      std::vector<Var> both{span_rep, regularity};
      out.fused = ops::add_bias(ops::matmul(ops::concat_cols(both), graph.param(*params.w_cat)),
                                graph.param(*params.b_cat));
      break;
    }
    case Fusion::kGate: {
      std::vector<Var> both{span_rep, regularity};
      Var logit = ops::add_bias(ops::matmul(ops::concat_cols(both), graph.param(*params.u3)),
                                graph.param(*params.b2));
      Var gate = ops::sigmoid(logit);
      out.gate = gate;
      out.fused = ops::add(ops::mul_col(span_rep, gate),
                           ops::mul_col(regularity, ops::affine(gate, -1.0, 1.0)));
      break;
    }
  }
  return out;
}

Var span_regularity(Graph& graph, Var h, std::size_t i, std::size_t j, const AwareParams& params) {
  if (i > j) throw ContractError("span_regularity: start after end");
  Span span{i, j};
  return regularity_features(graph, h, std::span<const Span>(&span, 1), params, Pooling::kAttention).pooled;
}

Var span_biaffine(Graph& graph, Var h, std::size_t i, std::size_t j, const AwareParams& params) {
  if (i > j) throw ContractError("span_biaffine: start after end");
  Span span{i, j};
  return span_representation(graph, h, std::span<const Span>(&span, 1), params);
}

Var gate_fuse(Graph& graph, Var h_span, Var h_reg, const AwareParams& params) {
  return fuse(graph, h_span, h_reg, params, Fusion::kGate).fused;
}

AwareOutput classify_spans(Graph& graph, Var h_aware, const AwareParams& params,
                           const AwareConfig& config) {
  AwareOutput out;
  out.spans = enumerate_spans(h_aware.rows(), config.max_span_len);
  Var span_rep = span_representation(graph, h_aware, out.spans, params, config.head_tail_mlps);
  Var fused = span_rep;
  if (config.use_regularity) {
    out.regularity = regularity_features(graph, h_aware, out.spans, params, config.pooling);
    FusedSpans f = fuse(graph, span_rep, out.regularity.pooled, params, config.fusion);
    fused = f.fused;
    out.gate = f.gate;
  }
  out.logits = ops::add_bias(ops::matmul(fused, graph.param(*params.w_type)), graph.param(*params.b3));
  return out;
}

SpanTypeGrid to_type_grid(const AwareOutput& output, std::size_t length, std::size_t max_span_len) {
  SpanTypeGrid grid(length, max_span_len);
  const Tensor& logits = output.logits.value();
  std::size_t classes = logits.cols();
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  for (std::size_t s = 0; s < output.spans.size(); ++s) {
    const Span& span = output.spans[s];
    SpanTypeInfo info;
    const Real* row = logits.data() + s * classes;
    Real hi = row[0];
    for (std::size_t c = 1; c < classes; ++c) hi = std::max(hi, row[c]);
    double z = 0.0;
    info.probs.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) z += info.probs[c] = std::exp(row[c] - hi);
    for (auto& p : info.probs) p /= z;
    info.gate = output.gate.valid() ? output.gate.value()[s] : std::numeric_limits<double>::quiet_NaN();
    const auto& reg = output.regularity;
    if (span.start == span.end) {
      info.alpha = {1.0};
    } else if (reg.alpha.valid() && reg.alpha_row[s] != npos) {
      auto row_alpha = reg.alpha.value().row(reg.alpha_row[s]);
      info.alpha.assign(row_alpha.begin() + static_cast<std::ptrdiff_t>(span.start),
                        row_alpha.begin() + static_cast<std::ptrdiff_t>(span.end) + 1);
    }
    grid(span.start, span.end) = std::move(info);
  }
  return grid;
}

std::vector<std::size_t> span_type_targets(std::span<const Span> spans,
                                           std::span<const LabeledSpan> gold,
                                           std::size_t* dropped) {
  std::map<Span, TypeId> by_span;
  for (const auto& g : gold) by_span[g.span] = g.type;
  std::vector<std::size_t> targets(spans.size(), Vocab::kNone);
  std::size_t matched = 0;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (auto it = by_span.find(spans[s]); it != by_span.end()) {
      targets[s] = it->second;
      ++matched;
    }
  }
  if (dropped) *dropped = by_span.size() - matched;
  return targets;
}

Var aware_loss(Graph&, Var logits, std::span<const std::size_t> targets) {
  return ops::softmax_cross_entropy(logits, targets);
}

}  // namespace ricon
