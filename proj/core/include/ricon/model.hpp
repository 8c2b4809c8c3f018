#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/encoder.hpp"
#include "ricon/graph.hpp"
#include "ricon/reg_agnostic.hpp"
#include "ricon/reg_aware.hpp"

namespace ricon {

struct ModelConfig {
  // vocab_size is filled in from the vocabulary.
  EncoderConfig encoder{.vocab_size = 2, .embed_dim = 64, .hidden = 200, .layers = 3};
  std::size_t mlp_dim = 150;
  double mlp_dropout = 0.2;
  // 0 enumerates every span.
  std::size_t max_span_len = 0;
  Pooling pooling = Pooling::kAttention;
  Fusion fusion = Fusion::kGate;
  bool aware_mlps = false;
  bool use_regularity = true;

  void validate() const;
  // JSON (de)serialization; unknown keys raise ConfigError.
  static ModelConfig from_json_text(std::string_view json_text);
  std::string to_json_text() const;
};

// Which loss components to build for a training example.
struct LossRequest {
  bool aware = true;
  bool agnostic = true;
  bool orth = true;
  // Probability of keeping a NONE span in the type loss (1 keeps all).
  double neg_sample_rate = 1.0;
};

struct SentenceLosses {
  Var aware;
  Var agnostic;
  Var orth;
  std::size_t num_spans = 0;
  // Gold mentions longer than max_span_len, excluded from the losses.
  std::size_t dropped_gold = 0;
};

class RiconModel {
 public:
  RiconModel(ModelConfig config, Vocab vocab, std::uint64_t seed);

  RiconModel(const RiconModel&) = delete;
  RiconModel& operator=(const RiconModel&) = delete;
  RiconModel(RiconModel&&) = default;

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  ParamStore& params() { return *params_; }
  const ParamStore& params() const { return *params_; }
  const EncoderParams& encoder_params() const { return encoder_; }
  const AwareParams& aware_params() const { return aware_; }
  const AgnosticParams& agnostic_params() const { return agnostic_; }
  AwareConfig aware_config() const;
  AgnosticConfig agnostic_config() const;

  // Gold mentions with vocabulary type ids; unknown types raise ContractError.
  std::vector<LabeledSpan> gold_spans(const Sentence& sentence) const;

  // Training forward. `dropout_rng` null disables dropout and sampling.
  SentenceLosses losses(Graph& graph, const Sentence& sentence, Rng* dropout_rng,
                        const LossRequest& request) const;

  // Evaluation-mode type grid (dropout off).
  SpanTypeGrid classify(const Sentence& sentence) const;
  // Evaluation-mode boundary grid of the agnostic branch (diagnostics only).
  BoundaryGrid boundary(const Sentence& sentence) const;

 private:
  ModelConfig config_;
  Vocab vocab_;
  std::unique_ptr<ParamStore> params_;
  EncoderParams encoder_;
  AwareParams aware_;
  AgnosticParams agnostic_;
};

const char* to_string(Pooling pooling);
const char* to_string(Fusion fusion);
Pooling parse_pooling(std::string_view name);
Fusion parse_fusion(std::string_view name);

}  // namespace ricon
