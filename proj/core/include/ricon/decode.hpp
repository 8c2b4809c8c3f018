#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/model.hpp"
#include "ricon/reg_aware.hpp"

namespace ricon {

struct EntityPrediction {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  TypeId type = 0;      // never NONE
  double score = 0.0;   // winning softmax probability

  friend bool operator==(const EntityPrediction&, const EntityPrediction&) = default;
};

enum class OverlapMode { kNested, kFlat };

// Argmax per span; NONE wins ties and is dropped.
std::vector<EntityPrediction> extract_candidates(const SpanTypeGrid& grid);

// a.start < b.start <= a.end < b.end, in either order.
bool crosses(const EntityPrediction& a, const EntityPrediction& b);
bool overlaps(const EntityPrediction& a, const EntityPrediction& b);

// Keeps candidates in (score desc, start asc, length asc, type asc) order,
// dropping any that conflict with one already kept. Nested mode only treats
// crossing pairs as conflicts; flat mode rejects any shared character.
std::vector<EntityPrediction> resolve_overlaps(std::vector<EntityPrediction> candidates,
                                               OverlapMode mode = OverlapMode::kNested);

struct TypeCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  std::map<std::string, TypeCounts> per_type;

  std::string to_json_text() const;
};

// Exact (start, end, type) matching, micro averaged. Predictions and gold are
// aligned by sentence index.
EvalReport evaluate(const std::vector<std::vector<GoldEntity>>& predictions, const Corpus& gold);

std::vector<GoldEntity> to_named(const std::vector<EntityPrediction>& predictions, const Vocab& vocab);

std::vector<EntityPrediction> predict_sentence(const RiconModel& model, const Sentence& sentence,
                                               OverlapMode mode = OverlapMode::kNested);

// Per-sentence predictions; `threads` > 1 splits sentences across workers.
std::vector<std::vector<EntityPrediction>> predict_corpus(const RiconModel& model, const Corpus& corpus,
                                                          OverlapMode mode = OverlapMode::kNested,
                                                          std::size_t threads = 1);

EvalReport evaluate_model(const RiconModel& model, const Corpus& corpus,
                          OverlapMode mode = OverlapMode::kNested, std::size_t threads = 1);

// Attention weights of one span, one per character. Requires attention
// pooling unless the span has a single character.
std::vector<double> inspect_regularity(const RiconModel& model, const Sentence& sentence, Span span);

// {"chars": ..., "entities": [{"start", "end", "type", "score"}]}
std::string prediction_json_line(const Sentence& sentence, const std::vector<EntityPrediction>& predictions,
                                 const Vocab& vocab);

}  // namespace ricon
