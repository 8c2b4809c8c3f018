#include "ricon/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ricon/errors.hpp"
#include "ricon/utf8.hpp"

namespace ricon {

bool has_overlap(const Sentence& sentence) {
  const auto& e = sentence.entities;
  for (std::size_t a = 0; a < e.size(); ++a) {
    for (std::size_t b = a + 1; b < e.size(); ++b) {
      if (e[a].start <= e[b].end && e[b].start <= e[a].end) return true;
    }
  }
  return false;
}

namespace {

struct OpenRun {
  std::size_t start;
  std::string type;
  std::size_t line;
};

class ColumnParser {
 public:
  Corpus parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line =
          text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) {
        flush(line_no);
      } else {
        consume(line, line_no);
      }
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    flush(line_no);
    return std::move(corpus_);
  }

 private:
  void consume(std::string_view line, std::size_t line_no) {
    std::size_t split = line.rfind('\t');
    if (split == std::string_view::npos) split = line.rfind(' ');
    if (split == std::string_view::npos || split == 0) {
      throw ParseError(line_no, "expected 'char<TAB>tag'");
    }
    std::u32string ch;
    try {
      ch = utf8::decode(line.substr(0, split));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (ch.size() != 1) {
      throw ParseError(line_no, "character field must hold exactly one character");
    }
    std::string_view tag = line.substr(split + 1);
    while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);

    std::size_t index = current_.chars.size();
    current_.chars.push_back(ch[0]);
    last_line_ = line_no;

    if (tag == "O") {
      require_closed(line_no);
      return;
    }
    if (tag.size() < 3 || tag[1] != '-' || std::string_view("BMES").find(tag[0]) == std::string_view::npos) {
      throw ParseError(line_no, "unknown tag '" + std::string(tag) + "'");
    }
    std::string type(tag.substr(2));
    if (type == Vocab::kNoneName) {
      throw ParseError(line_no, "reserved type name '" + type + "'");
    }
    switch (tag[0]) {
      case 'B':
        require_closed(line_no);
        open_ = OpenRun{index, type, line_no};
        has_open_ = true;
        break;
      case 'S':
        require_closed(line_no);
        current_.entities.push_back({index, index, type});
        break;
      case 'M':
      case 'E':
        if (!has_open_) {
          throw ParseError(line_no, std::string(1, tag[0]) + "-" + type + " without a preceding B-" + type);
        }
        if (open_.type != type) {
          throw ParseError(line_no, "tag type " + type + " inside a " + open_.type + " run");
        }
        if (tag[0] == 'E') {
          current_.entities.push_back({open_.start, index, type});
          has_open_ = false;
        }
        break;
    }
  }

  void require_closed(std::size_t line_no) {
    if (has_open_) {
      throw ParseError(line_no, "B-" + open_.type + " run opened at line " +
                                    std::to_string(open_.line) + " is not closed by E-" +
                                    open_.type);
    }
  }

  void flush(std::size_t line_no) {
    if (current_.chars.empty()) return;
    if (has_open_) require_closed(last_line_ ? last_line_ : line_no);
    corpus_.push_back(std::move(current_));
    current_ = Sentence{};
  }

  Corpus corpus_;
  Sentence current_;
  OpenRun open_;
  bool has_open_ = false;
  std::size_t last_line_ = 0;
};

}  // namespace

Corpus parse_column_corpus(std::string_view text) { return ColumnParser().parse(text); }

Corpus read_column_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_column_corpus(buffer.str());
}

std::vector<std::string> spans_to_bmes(const Sentence& sentence) {
  if (has_overlap(sentence)) {
    throw ContractError("BMES cannot express overlapping entities");
  }
  std::vector<std::string> tags(sentence.length(), "O");
  for (const auto& e : sentence.entities) {
    if (e.start > e.end || e.end >= sentence.length()) {
      throw ContractError("entity outside the sentence");
    }
    if (e.start == e.end) {
      tags[e.start] = "S-" + e.type;
      continue;
    }
    tags[e.start] = "B-" + e.type;
    for (std::size_t t = e.start + 1; t < e.end; ++t) tags[t] = "M-" + e.type;
    tags[e.end] = "E-" + e.type;
  }
  return tags;
}

std::string write_column_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus) {
    auto tags = spans_to_bmes(sentence);
    for (std::size_t t = 0; t < sentence.length(); ++t) {
      char32_t c = sentence.chars[t];
      if (c == U'\n' || c == U'\r' || c == U'\t') {
        throw ContractError("column format cannot hold tab or newline characters");
      }
      out += utf8::encode(c);
      out += '\t';
      out += tags[t];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void save_column_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file " + path.string());
  out << write_column_corpus(corpus);
}

Vocab Vocab::build(const Corpus& corpus) {
  std::set<char32_t> chars;
  std::set<std::string> types;
  for (const auto& s : corpus) {
    chars.insert(s.chars.begin(), s.chars.end());
    for (const auto& e : s.entities) types.insert(e.type);
  }
  Vocab v;
  v.chars_.assign(chars.begin(), chars.end());
  v.types_.assign(types.begin(), types.end());
  v.index();
  return v;
}

Vocab Vocab::from_lists(std::u32string chars, std::vector<std::string> types) {
  Vocab v;
  v.chars_ = std::move(chars);
  v.types_ = std::move(types);
  v.index();
  return v;
}

void Vocab::index() {
  char_ids_.clear();
  type_ids_.clear();
  for (std::size_t k = 0; k < chars_.size(); ++k) {
    if (!char_ids_.emplace(chars_[k], static_cast<CharId>(k + 2)).second) {
      throw ContractError("duplicate character in vocabulary");
    }
  }
  for (std::size_t k = 0; k < types_.size(); ++k) {
    if (types_[k] == kNoneName || !type_ids_.emplace(types_[k], static_cast<TypeId>(k + 1)).second) {
      throw ContractError("duplicate or reserved type '" + types_[k] + "' in vocabulary");
    }
  }
}

CharId Vocab::char_id(char32_t c) const {
  auto it = char_ids_.find(c);
  return it == char_ids_.end() ? kUnknown : it->second;
}

std::vector<CharId> Vocab::encode(std::u32string_view chars) const {
  std::vector<CharId> ids;
  ids.reserve(chars.size());
  for (char32_t c : chars) ids.push_back(char_id(c));
  return ids;
}

char32_t Vocab::char_at(CharId id) const {
  if (id < 2 || id - 2 >= chars_.size()) return U'�';
  return chars_[id - 2];
}

TypeId Vocab::type_id(std::string_view type) const {
  auto it = type_ids_.find(std::string(type));
  if (it == type_ids_.end()) {
    throw ContractError("entity type '" + std::string(type) + "' not in vocabulary");
  }
  return it->second;
}

const std::string& Vocab::type_name(TypeId id) const {
  static const std::string none(kNoneName);
  if (id == kNone) return none;
  if (id > types_.size()) throw ContractError("type id out of range");
  return types_[id - 1];
}

}  // namespace ricon
