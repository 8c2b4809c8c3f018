#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ricon/corpus.hpp"

namespace ricon {

struct SynthType {
  std::string name;
  // Suffix characters that end every entity of this type. Empty means the
  // type has no regular suffix.
  std::u32string indicators;
};

struct LengthRange {
  std::size_t min = 1;
  std::size_t max = 1;
};

// Generator settings for corpora where entity type is signalled by a final
// indicator character, with optional trap sentences that contain an indicator
// character outside any entity ending.
struct SynthConfig {
  std::vector<SynthType> types;
  std::u32string filler_alphabet;
  // Characters for entity bodies; empty means reuse filler_alphabet.
  std::u32string entity_alphabet;
  LengthRange entity_len{3, 5};
  LengthRange sentence_len{8, 16};
  double ambiguity_rate = 0.0;
  // Probability that an entity starts at a position outside an entity.
  double entity_rate = 0.3;
  std::size_t train_count = 100;
  std::size_t dev_count = 20;
  std::size_t test_count = 20;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // JSON keys: types, indicator_chars, filler_alphabet, entity_alphabet,
  // entity_len, sentence_len, ambiguity_rate, entity_rate, counts.
  static SynthConfig from_json_text(std::string_view json_text);
  std::string to_json_text() const;
};

// Three indicator types over CJK alphabets.
SynthConfig default_synth_config();

struct SyntheticCorpora {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Deterministic for a fixed seed. Each sentence is a trap sentence with
// probability ambiguity_rate; no sentence occurs in more than one split.
SyntheticCorpora generate_synthetic(const SynthConfig& config, std::uint64_t seed);

// Number of characters that belong to some type's indicator set but do not end
// a gold entity.
std::size_t count_trap_indicators(const Sentence& sentence, const SynthConfig& config);

}  // namespace ricon
