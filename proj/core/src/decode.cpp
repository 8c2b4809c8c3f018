#include "ricon/decode.hpp"

#include <algorithm>
#include <set>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "ricon/errors.hpp"
#include "ricon/utf8.hpp"

namespace ricon {

using nlohmann::json;

std::vector<EntityPrediction> extract_candidates(const SpanTypeGrid& grid) {
  std::vector<EntityPrediction> out;
  auto spans = enumerate_spans(grid.length(), grid.max_width());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& probs = grid[k].probs;
    if (probs.empty()) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
      if (probs[c] > probs[best]) best = c;
    }
    if (best == Vocab::kNone) continue;
    out.push_back({spans[k].start, spans[k].end, static_cast<TypeId>(best), probs[best]});
  }
  return out;
}

bool crosses(const EntityPrediction& a, const EntityPrediction& b) {
  auto one_way = [](const EntityPrediction& x, const EntityPrediction& y) {
    return x.start < y.start && y.start <= x.end && x.end < y.end;
  };
  return one_way(a, b) || one_way(b, a);
}

bool overlaps(const EntityPrediction& a, const EntityPrediction& b) {
  return a.start <= b.end && b.start <= a.end;
}

std::vector<EntityPrediction> resolve_overlaps(std::vector<EntityPrediction> candidates, OverlapMode mode) {
  std::sort(candidates.begin(), candidates.end(), [](const EntityPrediction& a, const EntityPrediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.type < b.type;
  });
  std::vector<EntityPrediction> kept;
  for (const auto& c : candidates) {
    bool conflict = std::any_of(kept.begin(), kept.end(), [&](const EntityPrediction& k) {
      return mode == OverlapMode::kFlat ? overlaps(c, k) : crosses(c, k);
    });
    if (!conflict) kept.push_back(c);
  }
  return kept;
}

double TypeCounts::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
}

double TypeCounts::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold);
}

double TypeCounts::f1() const {
  double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::string EvalReport::to_json_text() const {
  json j;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["gold"] = gold;
  j["predicted"] = predicted;
  j["correct"] = correct;
  json types = json::object();
  for (const auto& [name, c] : per_type) {
    types[name] = {{"gold", c.gold},
                   {"predicted", c.predicted},
                   {"correct", c.correct},
                   {"precision", c.precision()},
                   {"recall", c.recall()},
                   {"f1", c.f1()}};
  }
  j["per_type"] = types;
  return j.dump(2);
}

EvalReport evaluate(const std::vector<std::vector<GoldEntity>>& predictions, const Corpus& gold) {
  if (predictions.size() != gold.size()) {
    throw ContractError("evaluate: " + std::to_string(predictions.size()) + " prediction sets for " +
                        std::to_string(gold.size()) + " sentences");
  }
  EvalReport report;
  TypeCounts total;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::set<GoldEntity> truth(gold[s].entities.begin(), gold[s].entities.end());
    std::set<GoldEntity> guessed(predictions[s].begin(), predictions[s].end());
    for (const auto& g : truth) {
      ++report.per_type[g.type].gold;
      ++total.gold;
    }
    for (const auto& p : guessed) {
      ++report.per_type[p.type].predicted;
      ++total.predicted;
      if (truth.contains(p)) {
        ++report.per_type[p.type].correct;
        ++total.correct;
      }
    }
  }
  report.gold = total.gold;
  report.predicted = total.predicted;
  report.correct = total.correct;
  report.precision = total.precision();
  report.recall = total.recall();
  report.f1 = total.f1();
  return report;
}

std::vector<GoldEntity> to_named(const std::vector<EntityPrediction>& predictions, const Vocab& vocab) {
  std::vector<GoldEntity> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back({p.start, p.end, vocab.type_name(p.type)});
  return out;
}

std::vector<EntityPrediction> predict_sentence(const RiconModel& model, const Sentence& sentence,
                                               OverlapMode mode) {
  if (sentence.chars.empty()) return {};
  return resolve_overlaps(extract_candidates(model.classify(sentence)), mode);
}

std::vector<std::vector<EntityPrediction>> predict_corpus(const RiconModel& model, const Corpus& corpus,
                                                          OverlapMode mode, std::size_t threads) {
  std::vector<std::vector<EntityPrediction>> out(corpus.size());
  threads = std::max<std::size_t>(1, std::min(threads, corpus.size()));
  if (threads == 1) {
    for (std::size_t s = 0; s < corpus.size(); ++s) out[s] = predict_sentence(model, corpus[s], mode);
    return out;
  }
  std::vector<std::jthread> workers;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t s = t; s < corpus.size(); s += threads) out[s] = predict_sentence(model, corpus[s], mode);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalReport evaluate_model(const RiconModel& model, const Corpus& corpus, OverlapMode mode,
                          std::size_t threads) {
  auto predicted = predict_corpus(model, corpus, mode, threads);
  std::vector<std::vector<GoldEntity>> named;
  named.reserve(predicted.size());
  for (const auto& p : predicted) named.push_back(to_named(p, model.vocab()));
  return evaluate(named, corpus);
}

std::vector<double> inspect_regularity(const RiconModel& model, const Sentence& sentence, Span span) {
  if (span.start > span.end || span.end >= sentence.length()) {
    throw ContractError("span (" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                        ") outside a sentence of length " + std::to_string(sentence.length()));
  }
  if (span.length() == 1) return {1.0};
  if (!model.config().use_regularity || model.config().pooling != Pooling::kAttention) {
    throw ContractError("attention weights need attention pooling with regularity enabled");
  }
  std::size_t cap = model.config().max_span_len;
  if (cap != 0 && span.length() > cap) {
    throw ContractError("span longer than max_span_len " + std::to_string(cap));
  }
  return model.classify(sentence)(span.start, span.end).alpha;
}

std::string prediction_json_line(const Sentence& sentence, const std::vector<EntityPrediction>& predictions,
                                 const Vocab& vocab) {
  json entities = json::array();
  for (const auto& p : predictions) {
    entities.push_back({{"start", p.start}, {"end", p.end}, {"type", vocab.type_name(p.type)}, {"score", p.score}});
  }
  json j;
  j["chars"] = utf8::encode(std::u32string_view(sentence.chars));
  j["entities"] = entities;
  return j.dump();
}

}  // namespace ricon
