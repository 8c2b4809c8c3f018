#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/decode.hpp"
#include "ricon/graph.hpp"
#include "ricon/model.hpp"

namespace ricon {

// How per-span losses are pooled into a batch loss: every sentence weighted
// equally, or every span weighted equally.
enum class LossNorm { kSentence, kSpan };

struct TrainConfig {
  double lambda_aware = 1.0;
  double lambda_agnostic = 1.0;
  double lambda_orth = 0.5;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 8;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  // Global gradient norm cap; 0 disables clipping.
  double clip_norm = 5.0;
  // Dev evaluation every n epochs (the last epoch is always evaluated).
  std::size_t eval_every = 1;
  double neg_sample_rate = 1.0;
  LossNorm loss_norm = LossNorm::kSentence;
  Precision precision = Precision::kDouble;
  std::size_t threads = 1;
  // Overlap handling for dev evaluation; set from the run config, not serialized here.
  OverlapMode decode = OverlapMode::kNested;

  void validate() const;
  static TrainConfig from_json_text(std::string_view json_text);
  std::string to_json_text() const;
};

// Weighted sum of the three losses. A non-finite component raises
// NumericError naming it.
double total_loss(double aware, double agnostic, double orth, const TrainConfig& config);
// Graph form; components that are invalid or carry a zero weight are left out.
Var total_loss(Var aware, Var agnostic, Var orth, const TrainConfig& config);

struct OptimizerState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;

  static OptimizerState for_params(const ParamStore& store);
};

// Scales every gradient so the global norm is at most `max_norm`. Returns
// the norm before scaling.
double clip_gradients(ParamStore& store, double max_norm);

// Clip, bias-corrected Adam update, zero gradients. A non-finite gradient
// raises NumericError naming the parameter and leaves values untouched.
void adam_step(ParamStore& store, OptimizerState& state, const TrainConfig& config);

struct LossTotals {
  double aware = 0.0;
  double agnostic = 0.0;
  double orth = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossTotals loss;
  std::optional<EvalReport> dev;

  std::string to_json_line() const;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  double best_dev_f1 = -1.0;
  std::size_t best_epoch = 0;
};

// One optimizer step over a batch; returns the mean component losses.
LossTotals train_batch(RiconModel& model, OptimizerState& state, const std::vector<const Sentence*>& batch,
                       const TrainConfig& config, std::uint64_t epoch, std::size_t first_index);

// Mean component losses over a corpus with dropout off and no update.
LossTotals probe_losses(const RiconModel& model, const Corpus& corpus, const TrainConfig& config);

// Full training loop. The parameters of the best dev epoch (the later one on
// ties) are restored at the end, or the final epoch when `dev` is empty. One
// JSON line per epoch is written to `log` when given. On divergence the last good parameters are
// restored before the NumericError propagates.
TrainResult train(RiconModel& model, const Corpus& train_set, const Corpus& dev, const TrainConfig& config,
                  std::ostream* log = nullptr);

const char* to_string(LossNorm norm);
const char* to_string(Precision precision);
const char* to_string(OverlapMode mode);

}  // namespace ricon
