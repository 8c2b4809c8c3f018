#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ricon {

// A gold mention [start, end] (end inclusive) of a named type.
struct GoldEntity {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  friend bool operator==(const GoldEntity&, const GoldEntity&) = default;
  friend auto operator<=>(const GoldEntity&, const GoldEntity&) = default;
};

// Characters are Unicode scalar values.
struct Sentence {
  std::u32string chars;
  std::vector<GoldEntity> entities;

  std::size_t length() const { return chars.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

// True when any two entities of the sentence share a character.
bool has_overlap(const Sentence& sentence);

// Column corpus: one "char<TAB>tag" line per character, blank lines between
// sentences, tags O or {B,M,E,S}-TYPE. Throws ParseError with a 1-based line.
Corpus parse_column_corpus(std::string_view text);
Corpus read_column_corpus(const std::filesystem::path& path);

// BMES tags for a flat sentence. Overlapping entities raise ContractError.
std::vector<std::string> spans_to_bmes(const Sentence& sentence);
std::string write_column_corpus(const Corpus& corpus);
void save_column_corpus(const std::filesystem::path& path, const Corpus& corpus);

using CharId = std::uint32_t;
using TypeId = std::uint32_t;

// Character and entity-type vocabularies. Char id 0 is unknown, 1 is padding;
// type id 0 is the NONE (non-entity) class.
class Vocab {
 public:
  static constexpr CharId kUnknown = 0;
  static constexpr CharId kPadding = 1;
  static constexpr TypeId kNone = 0;
  static constexpr std::string_view kNoneName = "<none>";

  Vocab() = default;
  // Ids are assigned in code point order (chars) and lexicographic order
  // (types), so rebuilding from the same corpus yields identical ids.
  static Vocab build(const Corpus& corpus);
  static Vocab from_lists(std::u32string chars, std::vector<std::string> types);

  CharId char_id(char32_t c) const;
  std::vector<CharId> encode(std::u32string_view chars) const;
  char32_t char_at(CharId id) const;
  // Throws ContractError for a type not in the vocabulary.
  TypeId type_id(std::string_view type) const;
  const std::string& type_name(TypeId id) const;

  // Counts include the reserved ids.
  std::size_t num_chars() const { return chars_.size() + 2; }
  std::size_t num_types() const { return types_.size() + 1; }

  const std::u32string& chars() const { return chars_; }
  const std::vector<std::string>& types() const { return types_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.chars_ == b.chars_ && a.types_ == b.types_;
  }

 private:
  void index();

  std::u32string chars_;
  std::vector<std::string> types_;
  std::unordered_map<char32_t, CharId> char_ids_;
  std::unordered_map<std::string, TypeId> type_ids_;
};

}  // namespace ricon
