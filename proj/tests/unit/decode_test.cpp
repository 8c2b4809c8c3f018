#include <gtest/gtest.h>

#include <algorithm>

#include "json.hpp"
#include "oracles.hpp"
#include "ricon/decode.hpp"
#include "ricon/errors.hpp"
#include "support.hpp"

namespace ricon {
namespace {

EntityPrediction cand(std::size_t s, std::size_t e, double score, TypeId type = 1) {
  return {s, e, type, score};
}

TEST(ExtractCandidates, AllNoneIsEmpty) {
  SpanTypeGrid grid(3, 0);
  for (auto& info : grid) info.probs = {0.8, 0.1, 0.1};
  EXPECT_TRUE(extract_candidates(grid).empty());
}

TEST(ExtractCandidates, ArgmaxTypeAndScore) {
  SpanTypeGrid grid(2, 0);
  for (auto& info : grid) info.probs = {0.9, 0.05, 0.05};
  grid(0, 1).probs = {0.1, 0.7, 0.2};
  auto out = extract_candidates(grid);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cand(0, 1, 0.7, 1));
}

TEST(ExtractCandidates, TieGoesToNone) {
  SpanTypeGrid grid(1, 0);
  grid(0, 0).probs = {0.5, 0.5};
  EXPECT_TRUE(extract_candidates(grid).empty());
  grid(0, 0).probs = {0.2, 0.4, 0.4};
  auto out = extract_candidates(grid);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].type, 1u);
}

TEST(Crossing, Relation) {
  EXPECT_TRUE(crosses(cand(1, 3, 0), cand(2, 4, 0)));
  EXPECT_TRUE(crosses(cand(2, 4, 0), cand(1, 3, 0)));
  EXPECT_TRUE(crosses(cand(0, 2, 0), cand(2, 4, 0)));
  EXPECT_FALSE(crosses(cand(0, 5, 0), cand(1, 3, 0)));
  EXPECT_FALSE(crosses(cand(0, 1, 0), cand(2, 3, 0)));
  EXPECT_FALSE(crosses(cand(1, 3, 0), cand(1, 3, 0, 2)));
  EXPECT_TRUE(overlaps(cand(0, 5, 0), cand(1, 3, 0)));
  EXPECT_FALSE(overlaps(cand(0, 1, 0), cand(2, 3, 0)));
}

TEST(ResolveOverlaps, HigherScoreWins) {
  auto out = resolve_overlaps({cand(1, 3, 0.9), cand(2, 4, 0.8)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cand(1, 3, 0.9));
}

TEST(ResolveOverlaps, NestingKeptByDefault) {
  EXPECT_EQ(resolve_overlaps({cand(0, 5, 0.6), cand(1, 3, 0.9)}).size(), 2u);
  auto flat = resolve_overlaps({cand(0, 5, 0.6), cand(1, 3, 0.9)}, OverlapMode::kFlat);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0], cand(1, 3, 0.9));
}

TEST(ResolveOverlaps, SameSpanDifferentTypesKeptWhenNested) {
  EXPECT_EQ(resolve_overlaps({cand(1, 2, 0.5, 1), cand(1, 2, 0.4, 2)}).size(), 2u);
}

TEST(ResolveOverlaps, Chain) {
  // (0,2) and (2,4) share character 2 and cross, so only the top survives.
  std::vector<EntityPrediction> chain = {cand(0, 2, 0.6), cand(1, 3, 0.7), cand(2, 4, 0.8)};
  auto out = resolve_overlaps(chain);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cand(2, 4, 0.8));
  EXPECT_EQ(out, oracle::resolve(chain, OverlapMode::kNested));
}

TEST(ResolveOverlaps, ScoreTiesBreakByStartThenLength) {
  auto out = resolve_overlaps({cand(2, 4, 0.5), cand(1, 3, 0.5)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], cand(1, 3, 0.5));
  auto flat = resolve_overlaps({cand(1, 3, 0.5), cand(1, 2, 0.5)}, OverlapMode::kFlat);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0], cand(1, 2, 0.5));
}

std::vector<EntityPrediction> random_candidates(Rng& rng, std::size_t max_count) {
  std::size_t n = rng.index(max_count + 1);
  std::vector<EntityPrediction> out;
  while (out.size() < n) {
    std::size_t s = rng.index(8);
    EntityPrediction c = cand(s, s + rng.index(std::min<std::size_t>(4, 8 - s)), 0.1 * (1 + rng.index(9)),
                              static_cast<TypeId>(1 + rng.index(2)));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

TEST(ResolveOverlaps, MatchesExhaustiveOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = random_candidates(rng, 8);
    for (OverlapMode mode : {OverlapMode::kNested, OverlapMode::kFlat}) {
      ASSERT_EQ(resolve_overlaps(c, mode), oracle::resolve(c, mode)) << "trial " << trial;
    }
  }
}

TEST(ResolveOverlaps, OutputHasNoConflicts) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = random_candidates(rng, 12);
    auto nested = resolve_overlaps(c);
    auto flat = resolve_overlaps(c, OverlapMode::kFlat);
    for (std::size_t a = 0; a < nested.size(); ++a) {
      for (std::size_t b = a + 1; b < nested.size(); ++b) ASSERT_FALSE(crosses(nested[a], nested[b]));
    }
    for (std::size_t a = 0; a < flat.size(); ++a) {
      for (std::size_t b = a + 1; b < flat.size(); ++b) ASSERT_FALSE(overlaps(flat[a], flat[b]));
    }
  }
}

TEST(Evaluate, PerfectPredictions) {
  Corpus gold = {Sentence{U"abcd", {{0, 1, "LOC"}}}, Sentence{U"xy", {{1, 1, "ORG"}}}};
  std::vector<std::vector<GoldEntity>> pred = {gold[0].entities, gold[1].entities};
  EvalReport r = evaluate(pred, gold);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Evaluate, Arithmetic) {
  Corpus gold = {Sentence{U"abcdefgh", {{0, 1, "LOC"}, {2, 3, "LOC"}, {4, 5, "ORG"}, {6, 7, "ORG"}}}};
  std::vector<std::vector<GoldEntity>> pred = {{{0, 1, "LOC"}, {2, 3, "LOC"}, {5, 6, "ORG"}}};
  EvalReport r = evaluate(pred, gold);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.f1, 4.0 / 7.0, 1e-12);
  EXPECT_EQ(r.correct, 2u);
}

TEST(Evaluate, WrongTypeCountsAgainstBothTypes) {
  Corpus gold = {Sentence{U"abc", {{0, 1, "LOC"}}}};
  std::vector<std::vector<GoldEntity>> pred = {{{0, 1, "ORG"}}};
  EvalReport r = evaluate(pred, gold);
  EXPECT_EQ(r.correct, 0u);
  EXPECT_EQ(r.per_type["ORG"].predicted, 1u);
  EXPECT_EQ(r.per_type["ORG"].correct, 0u);
  EXPECT_EQ(r.per_type["LOC"].gold, 1u);
  EXPECT_EQ(r.per_type["LOC"].correct, 0u);
}

TEST(Evaluate, DisjointGivesZeroAndEmptyIsZero) {
  Corpus gold = {Sentence{U"abc", {{0, 1, "LOC"}}}};
  EXPECT_EQ(evaluate({{{2, 2, "LOC"}}}, gold).f1, 0.0);
  EXPECT_EQ(evaluate({{}}, gold).f1, 0.0);
}

TEST(Evaluate, SizeMismatchIsContractError) {
  Corpus gold = {Sentence{U"abc", {}}};
  EXPECT_THROW(evaluate({}, gold), ContractError);
}

TEST(Evaluate, PermutationInvariantAndBounded) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Corpus gold(3);
    std::vector<std::vector<GoldEntity>> pred(3);
    for (std::size_t s = 0; s < 3; ++s) {
      gold[s].chars = U"abcdefgh";
      for (int k = 0; k < 3; ++k) {
        std::size_t a = rng.index(8);
        gold[s].entities.push_back({a, a + rng.index(8 - a), rng.bernoulli(0.5) ? "LOC" : "ORG"});
        std::size_t b = rng.index(8);
        pred[s].push_back({b, b + rng.index(8 - b), rng.bernoulli(0.5) ? "LOC" : "ORG"});
      }
      if (rng.bernoulli(0.5)) pred[s].push_back(gold[s].entities[0]);
    }
    EvalReport base = evaluate(pred, gold);
    for (auto& p : pred) std::reverse(p.begin(), p.end());
    EvalReport shuffled = evaluate(pred, gold);
    EXPECT_EQ(base.f1, shuffled.f1);
    EXPECT_GE(base.f1, 0.0);
    EXPECT_LE(base.f1, 1.0);
    EXPECT_LE(base.correct, std::min(base.gold, base.predicted));
  }
}

class ModelDecode : public ::testing::Test {
 protected:
  RiconModel model{testing::tiny_model_config(2), testing::tiny_vocab(), 3};
};

TEST_F(ModelDecode, ThreadedPredictionMatchesSerial) {
  Corpus corpus;
  Rng rng(4);
  for (int s = 0; s < 9; ++s) {
    std::u32string chars;
    for (std::size_t k = 0; k < 3 + rng.index(5); ++k) chars.push_back(U"abcdefgh"[rng.index(8)]);
    corpus.push_back({chars, {}});
  }
  corpus.push_back({U"", {}});
  EXPECT_EQ(predict_corpus(model, corpus, OverlapMode::kNested, 1),
            predict_corpus(model, corpus, OverlapMode::kNested, 4));
}

TEST_F(ModelDecode, InspectRegularity) {
  Sentence s = testing::tiny_sentence();
  auto alpha = inspect_regularity(model, s, {0, 3});
  ASSERT_EQ(alpha.size(), 4u);
  double total = 0.0;
  for (double a : alpha) total += a;
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_EQ(inspect_regularity(model, s, {2, 2}), std::vector<double>{1.0});
  EXPECT_THROW(inspect_regularity(model, s, {3, 5}), ContractError);
  EXPECT_THROW(inspect_regularity(model, s, {3, 2}), ContractError);
}

TEST_F(ModelDecode, InspectNeedsAttention) {
  ModelConfig cfg = testing::tiny_model_config(2);
  cfg.pooling = Pooling::kMean;
  RiconModel mean_model(cfg, testing::tiny_vocab(), 3);
  EXPECT_THROW(inspect_regularity(mean_model, testing::tiny_sentence(), {0, 2}), ContractError);
}

TEST_F(ModelDecode, PredictionsAreValid) {
  auto out = predict_sentence(model, testing::tiny_sentence());
  for (const auto& p : out) {
    EXPECT_LE(p.start, p.end);
    EXPECT_NE(p.type, Vocab::kNone);
    EXPECT_GT(p.score, 0.0);
    EXPECT_LE(p.score, 1.0);
  }
}

TEST(PredictionJson, Format) {
  Vocab vocab = testing::tiny_vocab();
  Sentence s{U"abc", {}};
  auto j = nlohmann::json::parse(prediction_json_line(s, {cand(0, 1, 0.75, vocab.type_id("ORG"))}, vocab));
  EXPECT_EQ(j["chars"], "abc");
  ASSERT_EQ(j["entities"].size(), 1u);
  EXPECT_EQ(j["entities"][0]["type"], "ORG");
  EXPECT_EQ(j["entities"][0]["end"], 1);
  EXPECT_EQ(j["entities"][0]["score"], 0.75);
}

}  // namespace
}  // namespace ricon
