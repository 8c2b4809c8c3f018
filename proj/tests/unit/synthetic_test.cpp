#include <gtest/gtest.h>

#include <set>

#include "ricon/corpus.hpp"
#include "ricon/errors.hpp"
#include "ricon/synthetic.hpp"

namespace ricon {
namespace {

SynthConfig base_config() {
  SynthConfig cfg = default_synth_config();
  cfg.train_count = 300;
  cfg.dev_count = 50;
  cfg.test_count = 50;
  return cfg;
}

TEST(Synthetic, SameSeedIsByteIdentical) {
  SynthConfig cfg = base_config();
  auto a = generate_synthetic(cfg, 7);
  auto b = generate_synthetic(cfg, 7);
  EXPECT_EQ(write_column_corpus(a.train), write_column_corpus(b.train));
  EXPECT_EQ(write_column_corpus(a.dev), write_column_corpus(b.dev));
  EXPECT_EQ(write_column_corpus(a.test), write_column_corpus(b.test));
  auto c = generate_synthetic(cfg, 8);
  EXPECT_NE(write_column_corpus(a.train), write_column_corpus(c.train));
}

TEST(Synthetic, EntitiesEndWithTheirIndicator) {
  SynthConfig cfg = base_config();
  auto data = generate_synthetic(cfg, 3);
  std::size_t entities = 0;
  for (const auto& s : data.train) {
    EXPECT_GE(s.length(), cfg.sentence_len.min);
    EXPECT_LE(s.length(), cfg.sentence_len.max);
    EXPECT_FALSE(has_overlap(s));
    for (const auto& e : s.entities) {
      const auto& type = *std::find_if(cfg.types.begin(), cfg.types.end(),
                                       [&](const SynthType& t) { return t.name == e.type; });
      EXPECT_NE(type.indicators.find(s.chars[e.end]), std::u32string::npos);
      std::size_t len = e.end - e.start + 1;
      EXPECT_GE(len, cfg.entity_len.min);
      EXPECT_LE(len, cfg.entity_len.max);
      ++entities;
    }
  }
  EXPECT_GT(entities, 100u);
}

TEST(Synthetic, NoAmbiguityMeansEveryIndicatorEndsAnEntity) {
  SynthConfig cfg = base_config();
  cfg.ambiguity_rate = 0.0;
  auto data = generate_synthetic(cfg, 5);
  for (const auto* split : {&data.train, &data.dev, &data.test}) {
    for (const auto& s : *split) EXPECT_EQ(count_trap_indicators(s, cfg), 0u);
  }
}

TEST(Synthetic, TrapRateWithinBinomialInterval) {
  SynthConfig cfg = base_config();
  cfg.ambiguity_rate = 0.5;
  cfg.train_count = 1000;
  cfg.dev_count = 0;
  cfg.test_count = 0;
  auto data = generate_synthetic(cfg, 11);
  std::size_t traps = 0;
  for (const auto& s : data.train) {
    std::size_t n = count_trap_indicators(s, cfg);
    EXPECT_LE(n, 1u);
    traps += n;
  }
  // 1000 * 0.5 +- 1.96 * sqrt(1000 * 0.25)
  EXPECT_GE(traps, 469u);
  EXPECT_LE(traps, 531u);
}

TEST(Synthetic, SplitsAreDisjoint) {
  auto data = generate_synthetic(base_config(), 9);
  std::set<std::u32string> seen;
  for (const auto* split : {&data.train, &data.dev, &data.test}) {
    for (const auto& s : *split) EXPECT_TRUE(seen.insert(s.chars).second);
  }
}

TEST(Synthetic, InvalidConfigsAreRejected) {
  SynthConfig empty_filler = base_config();
  empty_filler.filler_alphabet.clear();
  EXPECT_THROW(generate_synthetic(empty_filler, 1), ConfigError);
  SynthConfig bad_len = base_config();
  bad_len.entity_len = {5, 3};
  EXPECT_THROW(bad_len.validate(), ConfigError);
  SynthConfig bad_sentence = base_config();
  bad_sentence.sentence_len = {9, 2};
  EXPECT_THROW(bad_sentence.validate(), ConfigError);
  SynthConfig no_types = base_config();
  no_types.types.clear();
  EXPECT_THROW(no_types.validate(), ConfigError);
  SynthConfig leaking = base_config();
  leaking.filler_alphabet += U"河";
  EXPECT_THROW(leaking.validate(), ConfigError);
  SynthConfig rate = base_config();
  rate.ambiguity_rate = 1.5;
  EXPECT_THROW(rate.validate(), ConfigError);
}

TEST(Synthetic, TooFewDistinctSentencesIsAConfigError) {
  SynthConfig cfg;
  cfg.types = {{"X", U"z"}};
  cfg.filler_alphabet = U"a";
  cfg.sentence_len = {2, 2};
  cfg.entity_len = {2, 2};
  cfg.train_count = 50;
  cfg.dev_count = 0;
  cfg.test_count = 0;
  EXPECT_THROW(generate_synthetic(cfg, 1), ConfigError);
}

TEST(Synthetic, JsonRoundTrip) {
  SynthConfig cfg = base_config();
  cfg.ambiguity_rate = 0.25;
  SynthConfig back = SynthConfig::from_json_text(cfg.to_json_text());
  EXPECT_EQ(back.to_json_text(), cfg.to_json_text());
  EXPECT_EQ(write_column_corpus(generate_synthetic(back, 4).train),
            write_column_corpus(generate_synthetic(cfg, 4).train));
  EXPECT_THROW(SynthConfig::from_json_text(R"({"typo": 1})"), ConfigError);
  EXPECT_THROW(SynthConfig::from_json_text(R"({"types": ["A"], "indicator_chars": {"B": "x"}})"), ConfigError);
}

}  // namespace
}  // namespace ricon
