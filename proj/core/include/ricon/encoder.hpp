#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/graph.hpp"
#include "ricon/rng.hpp"

namespace ricon {

enum class DropoutPlacement { kBetweenLayers, kOutput };

struct EncoderConfig {
  std::size_t vocab_size = 2;
  std::size_t embed_dim = 64;
  // Per-direction hidden size d; encodings are 2d wide.
  std::size_t hidden = 200;
  std::size_t layers = 3;
  double embed_dropout = 0.1;
  double lstm_dropout = 0.4;
  DropoutPlacement lstm_dropout_placement = DropoutPlacement::kBetweenLayers;
};

enum class Branch { kAware, kAgnostic };
const char* branch_name(Branch branch);

// Gate blocks are laid out as [input | forget | candidate | output].
struct LstmDirection {
  Param* w_input = nullptr;   // in x 4d
  Param* w_hidden = nullptr;  // d x 4d
  Param* bias = nullptr;      // 4d
};

struct LstmLayer {
  LstmDirection forward;
  LstmDirection backward;
};

struct BiLstmParams {
  std::vector<LstmLayer> layers;
};

// Shared character table plus two independent BiLSTM stacks.
struct EncoderParams {
  Param* table = nullptr;
  BiLstmParams aware;
  BiLstmParams agnostic;

  const BiLstmParams& branch(Branch b) const { return b == Branch::kAware ? aware : agnostic; }
  static EncoderParams create(ParamStore& store, const EncoderConfig& config, Rng& rng);
};

struct EncodedSentence {
  Var aware;     // l x 2d
  Var agnostic;  // l x 2d, invalid when the agnostic branch was skipped
};

// Table lookup, one row per character id. Empty input raises ContractError.
Var embed(Graph& graph, std::span<const CharId> ids, Param& table);

// One LSTM direction over the rows of x with zero initial state. When
// `reverse` is set the sequence is consumed last row first; output rows stay
// aligned with input positions.
Var lstm_direction(Graph& graph, Var x, const LstmDirection& params, bool reverse);

// Stacked BiLSTM; each layer's output is [forward ; backward] per position.
// `dropout_rng` null means evaluation mode.
Var bilstm_encode(Graph& graph, Var x, const BiLstmParams& params, const EncoderConfig& config,
                  Rng* dropout_rng);

EncodedSentence encode(Graph& graph, std::span<const CharId> ids, const EncoderParams& params,
                       const EncoderConfig& config, Rng* dropout_rng, bool with_agnostic = true);

// Reads "char v1 ... ve" lines (word2vec text format, optional "count dim"
// header) and overwrites the table rows of characters present in `vocab`.
// Returns the number of rows replaced.
std::size_t load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                       Param& table);

}  // namespace ricon
