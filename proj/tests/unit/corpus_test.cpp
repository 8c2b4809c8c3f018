#include <gtest/gtest.h>

#include <sstream>

#include "ricon/corpus.hpp"
#include "ricon/errors.hpp"
#include "ricon/rng.hpp"
#include "ricon/utf8.hpp"
#include "support.hpp"

namespace ricon {
namespace {

std::size_t parse_error_line(std::string_view text) {
  try {
    parse_column_corpus(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseColumnCorpus, BmesRunBecomesOneEntity) {
  auto corpus = parse_column_corpus("波\tB-LOC\n罗\tM-LOC\n的\tM-LOC\n海\tE-LOC\n");
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0].chars, U"波罗的海");
  ASSERT_EQ(corpus[0].entities.size(), 1u);
  EXPECT_EQ(corpus[0].entities[0], (GoldEntity{0, 3, "LOC"}));
}

TEST(ParseColumnCorpus, AllOutsideHasNoEntities) {
  auto corpus = parse_column_corpus("我\tO\n们\tO\n");
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_TRUE(corpus[0].entities.empty());
}

TEST(ParseColumnCorpus, SingleTag) {
  auto corpus = parse_column_corpus("X\tS-PER\n");
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0].entities[0], (GoldEntity{0, 0, "PER"}));
}

TEST(ParseColumnCorpus, BlankLinesSeparateSentences) {
  auto corpus = parse_column_corpus("\n\na\tO\nb\tS-X\n\n\nc\tB-Y\nd\tE-Y\n\n");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[1].entities[0], (GoldEntity{0, 1, "Y"}));
}

TEST(ParseColumnCorpus, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("a\tO\nb\tM-LOC\n"), 2u);
  EXPECT_EQ(parse_error_line("a\tB-LOC\nb\tE-ORG\n"), 2u);
  EXPECT_EQ(parse_error_line("a\tO\nb\tQ-LOC\n"), 2u);
  EXPECT_EQ(parse_error_line("a\tB-LOC\nb\tO\n"), 2u);
  EXPECT_EQ(parse_error_line("a\tB-LOC\nb\tM-LOC\n\nc\tO\n"), 2u);
  EXPECT_EQ(parse_error_line("ab\tO\n"), 1u);
  EXPECT_EQ(parse_error_line("a\n"), 1u);
  EXPECT_EQ(parse_error_line("a\tS-<none>\n"), 1u);
  try {
    parse_column_corpus("a\tO\nb\tE-LOC\n");
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(SpansToBmes, Examples) {
  Sentence four{U"波罗的海", {{0, 3, "LOC"}}};
  EXPECT_EQ(spans_to_bmes(four), (std::vector<std::string>{"B-LOC", "M-LOC", "M-LOC", "E-LOC"}));
  Sentence single{U"abc", {{2, 2, "PER"}}};
  EXPECT_EQ(spans_to_bmes(single)[2], "S-PER");
  Sentence nested{U"abcd", {{0, 3, "A"}, {1, 2, "B"}}};
  EXPECT_THROW(spans_to_bmes(nested), ContractError);
}

Corpus random_flat_corpus(Rng& rng, std::size_t sentences) {
  const std::u32string alphabet = U"abc的了河海司行省市 ";
  const std::vector<std::string> types = {"LOC", "ORG", "GPE", "PER"};
  Corpus corpus;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sentence;
    std::size_t l = rng.between(1, 12);
    for (std::size_t k = 0; k < l; ++k) sentence.chars.push_back(alphabet[rng.index(alphabet.size() - 1)]);
    std::size_t pos = 0;
    while (pos < l) {
      if (rng.bernoulli(0.3)) {
        std::size_t end = std::min(l - 1, pos + rng.index(4));
        sentence.entities.push_back({pos, end, types[rng.index(types.size())]});
        pos = end + 1;
      } else {
        ++pos;
      }
    }
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

TEST(BmesRoundTrip, IdentityOnRandomFlatCorpora) {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus corpus = random_flat_corpus(rng, 50);
    EXPECT_EQ(parse_column_corpus(write_column_corpus(corpus)), corpus);
  }
}

TEST(BmesRoundTrip, FileRoundTrip) {
  testing::TempDir dir("corpus");
  Rng rng(4);
  Corpus corpus = random_flat_corpus(rng, 30);
  save_column_corpus(dir.path() / "c.txt", corpus);
  EXPECT_EQ(read_column_corpus(dir.path() / "c.txt"), corpus);
  EXPECT_THROW(read_column_corpus(dir.path() / "missing.txt"), Error);
}

// Mutations that each make a valid corpus invalid, with the earliest line at
// which the parser may report the problem.
TEST(ParserFuzz, RejectsEverySingleLineCorruption) {
  Rng rng(77);
  std::size_t mutated = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Corpus corpus = random_flat_corpus(rng, 6);
    std::string text = write_column_corpus(corpus);
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);

    for (std::size_t target = 0; target < lines.size(); ++target) {
      if (lines[target].empty()) continue;
      auto tab = lines[target].rfind('\t');
      std::string ch = lines[target].substr(0, tab);
      std::string tag = lines[target].substr(tab + 1);
      std::vector<std::string> variants = {
          ch + "\t" + "X" + tag.substr(1),       // unknown prefix
          ch + ch + "\t" + tag,                  // two characters
          ch,                                    // missing tag
          "\xff\t" + tag,                        // invalid UTF-8
      };
      if (tag[0] == 'M' || tag[0] == 'E') variants.push_back(ch + "\t" + tag.substr(0, 2) + "ZZZ");
      if (tag[0] == 'B') variants.push_back(ch + "\tS" + tag.substr(1) + "ZZZ");
      if (tag[0] == 'E') variants.push_back(ch + "\tO");
      for (const auto& v : variants) {
        auto copy = lines;
        copy[target] = v;
        std::string corrupted;
        for (const auto& l : copy) corrupted += l + "\n";
        std::size_t line = parse_error_line(corrupted);
        ASSERT_NE(line, 0u) << "accepted corruption '" << v << "' at line " << target + 1;
        EXPECT_GE(line, target + 1);
        ++mutated;
      }
    }
  }
  EXPECT_GT(mutated, 1000u);
}

TEST(WriteColumnCorpus, RejectsUnwritableCharacters) {
  Corpus corpus = {Sentence{U"a\tb", {}}};
  EXPECT_THROW(write_column_corpus(corpus), ContractError);
}

TEST(Vocab, ReservedIdsAndStableOrder) {
  Rng rng(1);
  Corpus corpus = random_flat_corpus(rng, 40);
  Vocab a = Vocab::build(corpus);
  Corpus reversed(corpus.rbegin(), corpus.rend());
  Vocab b = Vocab::build(reversed);
  EXPECT_EQ(a, b);
  for (char32_t c : a.chars()) EXPECT_EQ(a.char_id(c), b.char_id(c));
  EXPECT_EQ(a.char_id(U'一'), Vocab::kUnknown);
  EXPECT_EQ(a.type_name(Vocab::kNone), Vocab::kNoneName);
  EXPECT_EQ(a.num_types(), a.types().size() + 1);
  for (std::size_t t = 1; t < a.num_types(); ++t) {
    EXPECT_EQ(a.type_id(a.type_name(static_cast<TypeId>(t))), t);
  }
  EXPECT_THROW(a.type_id("MISSING"), ContractError);
  for (std::size_t k = 2; k < a.num_chars(); ++k) {
    EXPECT_EQ(a.char_id(a.char_at(static_cast<CharId>(k))), k);
  }
}

TEST(Utf8, RoundTripAndRejection) {
  std::u32string text = U"aé河\U0001F600";
  EXPECT_EQ(utf8::decode(utf8::encode(std::u32string_view(text))), text);
  EXPECT_THROW(utf8::decode("\xc0\xaf"), Error);
  EXPECT_THROW(utf8::decode("\xed\xa0\x80"), Error);
  EXPECT_THROW(utf8::decode("\xe6\xb2"), Error);
}

}  // namespace
}  // namespace ricon
