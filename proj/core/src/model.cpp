#include "ricon/model.hpp"

#include "json.hpp"
#include "ricon/errors.hpp"
#include "ricon/ops.hpp"
#include "ricon/orthogonality.hpp"

namespace ricon {

using nlohmann::json;

const char* to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::kAttention: return "attention";
    case Pooling::kMean: return "mean";
    case Pooling::kMax: return "max";
  }
  return "?";
}

const char* to_string(Fusion fusion) {
  switch (fusion) {
    case Fusion::kGate: return "gate";
    case Fusion::kAdd: return "add";
    case Fusion::kConcat: return "concat";
  }
  return "?";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "attention") return Pooling::kAttention;
  if (name == "mean") return Pooling::kMean;
  if (name == "max") return Pooling::kMax;
  throw ConfigError("model.pooling: expected attention, mean or max, got '" + std::string(name) + "'");
}

Fusion parse_fusion(std::string_view name) {
  if (name == "gate") return Fusion::kGate;
  if (name == "add") return Fusion::kAdd;
  if (name == "concat") return Fusion::kConcat;
  throw ConfigError("model.fusion: expected gate, add or concat, got '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (encoder.embed_dim < 1) throw ConfigError("model.embed_dim must be positive");
  if (encoder.hidden < 1) throw ConfigError("model.hidden must be positive");
  if (encoder.layers < 1) throw ConfigError("model.layers must be >= 1");
  if (mlp_dim < 1) throw ConfigError("model.mlp_dim must be positive");
  auto rate_ok = [](double r) { return r >= 0.0 && r < 1.0; };
  if (!rate_ok(encoder.embed_dropout)) throw ConfigError("model.embed_dropout must lie in [0, 1)");
  if (!rate_ok(encoder.lstm_dropout)) throw ConfigError("model.lstm_dropout must lie in [0, 1)");
  if (!rate_ok(mlp_dropout)) throw ConfigError("model.mlp_dropout must lie in [0, 1)");
}

ModelConfig ModelConfig::from_json_text(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model: expected an object");
  ModelConfig cfg;
  auto size = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw ConfigError("model." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
  };
  auto real = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("model." + key + ": expected a number");
    return v.get<double>();
  };
  auto text = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("model." + key + ": expected a string");
    return v.get<std::string>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "vocab_size") {
      cfg.encoder.vocab_size = size(value, key);
    } else if (key == "embed_dim") {
      cfg.encoder.embed_dim = size(value, key);
    } else if (key == "hidden") {
      cfg.encoder.hidden = size(value, key);
    } else if (key == "layers") {
      cfg.encoder.layers = size(value, key);
    } else if (key == "embed_dropout") {
      cfg.encoder.embed_dropout = real(value, key);
    } else if (key == "lstm_dropout") {
      cfg.encoder.lstm_dropout = real(value, key);
    } else if (key == "lstm_dropout_placement") {
      auto v = text(value, key);
      if (v == "between_layers") {
        cfg.encoder.lstm_dropout_placement = DropoutPlacement::kBetweenLayers;
      } else if (v == "output") {
        cfg.encoder.lstm_dropout_placement = DropoutPlacement::kOutput;
      } else {
        throw ConfigError("model.lstm_dropout_placement: expected between_layers or output");
      }
    } else if (key == "mlp_dim") {
      cfg.mlp_dim = size(value, key);
    } else if (key == "mlp_dropout") {
      cfg.mlp_dropout = real(value, key);
    } else if (key == "max_span_len") {
      cfg.max_span_len = size(value, key);
    } else if (key == "pooling") {
      cfg.pooling = parse_pooling(text(value, key));
    } else if (key == "fusion") {
      cfg.fusion = parse_fusion(text(value, key));
    } else if (key == "aware_mlps") {
      if (!value.is_boolean()) throw ConfigError("model.aware_mlps: expected a boolean");
      cfg.aware_mlps = value.get<bool>();
    } else if (key == "use_regularity") {
      if (!value.is_boolean()) throw ConfigError("model.use_regularity: expected a boolean");
      cfg.use_regularity = value.get<bool>();
    } else {
      throw ConfigError("model: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string ModelConfig::to_json_text() const {
  json j;
  j["vocab_size"] = encoder.vocab_size;
  j["embed_dim"] = encoder.embed_dim;
  j["hidden"] = encoder.hidden;
  j["layers"] = encoder.layers;
  j["embed_dropout"] = encoder.embed_dropout;
  j["lstm_dropout"] = encoder.lstm_dropout;
  j["lstm_dropout_placement"] =
      encoder.lstm_dropout_placement == DropoutPlacement::kBetweenLayers ? "between_layers" : "output";
  j["mlp_dim"] = mlp_dim;
  j["mlp_dropout"] = mlp_dropout;
  j["max_span_len"] = max_span_len;
  j["pooling"] = to_string(pooling);
  j["fusion"] = to_string(fusion);
  j["aware_mlps"] = aware_mlps;
  j["use_regularity"] = use_regularity;
  return j.dump(2);
}

RiconModel::RiconModel(ModelConfig config, Vocab vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(std::make_unique<ParamStore>()) {
  config_.encoder.vocab_size = vocab_.num_chars();
  config_.validate();
  Rng rng(seed);
  encoder_ = EncoderParams::create(*params_, config_.encoder, rng);
  aware_ = AwareParams::create(*params_, aware_config(), rng);
  agnostic_ = AgnosticParams::create(*params_, agnostic_config(), rng);
}

AwareConfig RiconModel::aware_config() const {
  AwareConfig cfg;
  cfg.width = 2 * config_.encoder.hidden;
  cfg.num_classes = vocab_.num_types();
  cfg.pooling = config_.pooling;
  cfg.fusion = config_.fusion;
  cfg.head_tail_mlps = config_.aware_mlps;
  cfg.use_regularity = config_.use_regularity;
  cfg.max_span_len = config_.max_span_len;
  return cfg;
}

AgnosticConfig RiconModel::agnostic_config() const {
  AgnosticConfig cfg;
  cfg.width = 2 * config_.encoder.hidden;
  cfg.mlp_dim = config_.mlp_dim;
  cfg.mlp_dropout = config_.mlp_dropout;
  cfg.max_span_len = config_.max_span_len;
  return cfg;
}

std::vector<LabeledSpan> RiconModel::gold_spans(const Sentence& sentence) const {
  std::vector<LabeledSpan> out;
  out.reserve(sentence.entities.size());
  for (const auto& e : sentence.entities) {
    if (e.start > e.end || e.end >= sentence.length()) {
      throw ContractError("gold entity outside the sentence");
    }
    out.push_back({{e.start, e.end}, vocab_.type_id(e.type)});
  }
  return out;
}

SentenceLosses RiconModel::losses(Graph& graph, const Sentence& sentence, Rng* dropout_rng,
                                  const LossRequest& request) const {
  auto ids = vocab_.encode(sentence.chars);
  bool need_agnostic = request.agnostic || request.orth;
  EncodedSentence enc = encode(graph, ids, encoder_, config_.encoder, dropout_rng, need_agnostic);
  auto gold = gold_spans(sentence);
  auto spans = enumerate_spans(sentence.length(), config_.max_span_len);

  SentenceLosses out;
  out.num_spans = spans.size();
  if (request.aware) {
    AwareOutput aware = classify_spans(graph, enc.aware, aware_, aware_config());
    auto targets = span_type_targets(spans, gold, &out.dropped_gold);
    if (dropout_rng && request.neg_sample_rate < 1.0) {
      std::vector<std::size_t> keep;
      std::vector<std::size_t> kept_targets;
      for (std::size_t s = 0; s < spans.size(); ++s) {
        if (targets[s] != Vocab::kNone || dropout_rng->bernoulli(request.neg_sample_rate)) {
          keep.push_back(s);
          kept_targets.push_back(targets[s]);
        }
      }
      if (keep.empty()) {
        keep.push_back(0);
        kept_targets.push_back(targets[0]);
      }
      out.aware = aware_loss(graph, ops::gather_rows(aware.logits, keep), kept_targets);
    } else {
      out.aware = aware_loss(graph, aware.logits, targets);
    }
  } else {
    std::size_t dropped = 0;
    span_type_targets(spans, gold, &dropped);
    out.dropped_gold = dropped;
  }
  if (request.agnostic) {
    HeadTail projections = project_head_tail(graph, enc.agnostic, agnostic_, agnostic_config(), dropout_rng);
    Var probs = boundary_scores(graph, projections, agnostic_, spans);
    out.agnostic = agnostic_loss(graph, probs, span_entity_targets(spans, gold));
  }
  if (request.orth) out.orth = orth_loss(graph, enc.aware, enc.agnostic);
  return out;
}

SpanTypeGrid RiconModel::classify(const Sentence& sentence) const {
  Graph graph;
  auto ids = vocab_.encode(sentence.chars);
  EncodedSentence enc = encode(graph, ids, encoder_, config_.encoder, nullptr, false);
  AwareOutput aware = classify_spans(graph, enc.aware, aware_, aware_config());
  return to_type_grid(aware, sentence.length(), config_.max_span_len);
}

BoundaryGrid RiconModel::boundary(const Sentence& sentence) const {
  Graph graph;
  auto ids = vocab_.encode(sentence.chars);
  EncodedSentence enc = encode(graph, ids, encoder_, config_.encoder, nullptr, true);
  auto spans = enumerate_spans(sentence.length(), config_.max_span_len);
  HeadTail projections = project_head_tail(graph, enc.agnostic, agnostic_, agnostic_config(), nullptr);
  return to_boundary_grid(boundary_scores(graph, projections, agnostic_, spans), spans,
                          sentence.length(), config_.max_span_len);
}

}  // namespace ricon
