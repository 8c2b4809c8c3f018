#include "ricon/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ricon/errors.hpp"
#include "ricon/ops.hpp"
#include "ricon/utf8.hpp"

namespace ricon {

const char* branch_name(Branch branch) {
  return branch == Branch::kAware ? "aware" : "agnostic";
}

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

BiLstmParams create_stack(ParamStore& store, const EncoderConfig& cfg, Branch branch, Rng& rng) {
  BiLstmParams stack;
  std::size_t d = cfg.hidden;
  double bound = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t layer = 0; layer < cfg.layers; ++layer) {
    std::size_t in = layer == 0 ? cfg.embed_dim : 2 * d;
    LstmLayer l;
    for (int dir = 0; dir < 2; ++dir) {
      std::string prefix = std::string("encoder.") + branch_name(branch) + ".l" +
                           std::to_string(layer) + (dir == 0 ? ".fwd" : ".bwd");
      LstmDirection p;
      p.w_input = &store.add(prefix + ".w_input", uniform_tensor({in, 4 * d}, bound, rng));
      p.w_hidden = &store.add(prefix + ".w_hidden", uniform_tensor({d, 4 * d}, bound, rng));
      Tensor bias({4 * d});
      for (std::size_t k = d; k < 2 * d; ++k) bias[k] = 1.0;
      p.bias = &store.add(prefix + ".bias", std::move(bias));
      (dir == 0 ? l.forward : l.backward) = p;
    }
    stack.layers.push_back(l);
  }
  return stack;
}

}  // namespace

EncoderParams EncoderParams::create(ParamStore& store, const EncoderConfig& cfg, Rng& rng) {
  if (cfg.layers < 1) throw ConfigError("encoder.layers must be >= 1");
  if (cfg.hidden < 1 || cfg.embed_dim < 1) throw ConfigError("encoder sizes must be positive");
  EncoderParams params;
  double bound = std::sqrt(3.0 / static_cast<double>(cfg.embed_dim));
  params.table = &store.add("embedding", uniform_tensor({cfg.vocab_size, cfg.embed_dim}, bound, rng));
  params.aware = create_stack(store, cfg, Branch::kAware, rng);
  params.agnostic = create_stack(store, cfg, Branch::kAgnostic, rng);
  return params;
}

Var embed(Graph& graph, std::span<const CharId> ids, Param& table) {
  if (ids.empty()) throw ContractError("embed: empty sentence");
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  return ops::gather_rows(graph.param(table), rows);
}

Var lstm_direction(Graph& graph, Var x, const LstmDirection& p, bool reverse) {
  std::size_t length = x.rows();
  std::size_t d = p.w_hidden->value().shape()[0];
  Var w_hidden = graph.param(*p.w_hidden);
  Var projected = ops::add_bias(ops::matmul(x, graph.param(*p.w_input)), graph.param(*p.bias));

  std::vector<Var> outputs(length);
  Var h, c;
  for (std::size_t step = 0; step < length; ++step) {
    std::size_t t = reverse ? length - 1 - step : step;
    Var pre = ops::slice_rows(projected, t, t + 1);
    if (h.valid()) pre = ops::add(pre, ops::matmul(h, w_hidden));
    Var in_gate = ops::sigmoid(ops::slice_cols(pre, 0, d));
    Var candidate = ops::tanh(ops::slice_cols(pre, 2 * d, 3 * d));
    Var out_gate = ops::sigmoid(ops::slice_cols(pre, 3 * d, 4 * d));
    Var cell = ops::mul(in_gate, candidate);
    if (c.valid()) {
      Var forget = ops::sigmoid(ops::slice_cols(pre, d, 2 * d));
      cell = ops::add(cell, ops::mul(forget, c));
    }
    c = cell;
    h = ops::mul(out_gate, ops::tanh(c));
    outputs[t] = h;
  }
  return ops::concat_rows(outputs);
}

Var bilstm_encode(Graph& graph, Var x, const BiLstmParams& params, const EncoderConfig& cfg,
                  Rng* dropout_rng) {
  Var layer_input = x;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    if (k > 0 && dropout_rng && cfg.lstm_dropout_placement == DropoutPlacement::kBetweenLayers) {
      layer_input = ops::dropout(layer_input, cfg.lstm_dropout, *dropout_rng);
    }
    std::vector<Var> halves{lstm_direction(graph, layer_input, params.layers[k].forward, false),
                            lstm_direction(graph, layer_input, params.layers[k].backward, true)};
    layer_input = ops::concat_cols(halves);
  }
  if (dropout_rng && cfg.lstm_dropout_placement == DropoutPlacement::kOutput) {
    layer_input = ops::dropout(layer_input, cfg.lstm_dropout, *dropout_rng);
  }
  return layer_input;
}

EncodedSentence encode(Graph& graph, std::span<const CharId> ids, const EncoderParams& params,
                       const EncoderConfig& cfg, Rng* dropout_rng, bool with_agnostic) {
  Var x = embed(graph, ids, *params.table);
  if (dropout_rng) x = ops::dropout(x, cfg.embed_dropout, *dropout_rng);
  EncodedSentence out;
  out.aware = bilstm_encode(graph, x, params.aware, cfg, dropout_rng);
  if (with_agnostic) out.agnostic = bilstm_encode(graph, x, params.agnostic, cfg, dropout_rng);
  return out;
}

std::size_t load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                       Param& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open pretrained embeddings " + path.string());
  std::size_t dim = table.value().cols();
  std::size_t replaced = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (line_no == 1 && values.size() == 1) continue;  // "count dim" header
    if (values.size() != dim) {
      throw ConfigError("pretrained embeddings line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(values.size()));
    }
    std::u32string ch = utf8::decode(token);
    if (ch.size() != 1) continue;
    CharId id = vocab.char_id(ch[0]);
    if (id == Vocab::kUnknown) continue;
    for (std::size_t k = 0; k < dim; ++k) table.value().at(id, k) = values[k];
    ++replaced;
  }
  return replaced;
}

}  // namespace ricon
