#include "ricon/synthetic.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "ricon/errors.hpp"
#include "ricon/rng.hpp"
#include "ricon/utf8.hpp"

namespace ricon {

using nlohmann::json;

void SynthConfig::validate() const {
  if (types.empty()) throw ConfigError("synth.types: at least one entity type required");
  if (filler_alphabet.empty()) throw ConfigError("synth.filler_alphabet: must not be empty");
  if (entity_len.min < 1 || entity_len.min > entity_len.max) {
    throw ConfigError("synth.entity_len: need 1 <= min <= max");
  }
  if (sentence_len.min < 1 || sentence_len.min > sentence_len.max) {
    throw ConfigError("synth.sentence_len: need 1 <= min <= max");
  }
  if (!(ambiguity_rate >= 0.0 && ambiguity_rate <= 1.0)) {
    throw ConfigError("synth.ambiguity_rate: must lie in [0, 1]");
  }
  if (!(entity_rate >= 0.0 && entity_rate <= 1.0)) {
    throw ConfigError("synth.entity_rate: must lie in [0, 1]");
  }
  std::set<std::string> names;
  std::set<char32_t> indicators;
  bool any_indicator = false;
  for (const auto& t : types) {
    if (t.name.empty() || t.name == Vocab::kNoneName || !names.insert(t.name).second) {
      throw ConfigError("synth.types: empty, reserved or duplicate type '" + t.name + "'");
    }
    for (char32_t c : t.indicators) {
      if (!indicators.insert(c).second) {
        throw ConfigError("synth.indicator_chars: character shared between types");
      }
      any_indicator = true;
    }
  }
  const std::u32string& body = entity_alphabet.empty() ? filler_alphabet : entity_alphabet;
  for (char32_t c : filler_alphabet) {
    if (indicators.contains(c)) {
      throw ConfigError("synth.filler_alphabet: contains an indicator character");
    }
  }
  for (char32_t c : body) {
    if (indicators.contains(c)) {
      throw ConfigError("synth.entity_alphabet: contains an indicator character");
    }
  }
  if (ambiguity_rate > 0.0 && !any_indicator) {
    throw ConfigError("synth.ambiguity_rate: traps need at least one indicator character");
  }
}

namespace {

std::u32string read_chars(const json& j, const char* field) {
  if (!j.is_string()) throw ConfigError(std::string("synth.") + field + ": expected a string");
  try {
    return utf8::decode(j.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(std::string("synth.") + field + ": " + e.what());
  }
}

LengthRange read_range(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    throw ConfigError(std::string("synth.") + field + ": expected [min, max]");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

double read_rate(const json& j, const char* field) {
  if (!j.is_number()) throw ConfigError(std::string("synth.") + field + ": expected a number");
  return j.get<double>();
}

}  // namespace

SynthConfig SynthConfig::from_json_text(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("synth: expected an object");
  SynthConfig cfg;
  json indicators = json::object();
  for (const auto& [key, value] : j.items()) {
    if (key == "types") {
      if (!value.is_array()) throw ConfigError("synth.types: expected a list of names");
      for (const auto& name : value) {
        if (!name.is_string()) throw ConfigError("synth.types: expected a list of names");
        cfg.types.push_back({name.get<std::string>(), {}});
      }
    } else if (key == "indicator_chars") {
      if (!value.is_object()) throw ConfigError("synth.indicator_chars: expected an object");
      indicators = value;
    } else if (key == "filler_alphabet") {
      cfg.filler_alphabet = read_chars(value, "filler_alphabet");
    } else if (key == "entity_alphabet") {
      cfg.entity_alphabet = read_chars(value, "entity_alphabet");
    } else if (key == "entity_len") {
      cfg.entity_len = read_range(value, "entity_len");
    } else if (key == "sentence_len") {
      cfg.sentence_len = read_range(value, "sentence_len");
    } else if (key == "ambiguity_rate") {
      cfg.ambiguity_rate = read_rate(value, "ambiguity_rate");
    } else if (key == "entity_rate") {
      cfg.entity_rate = read_rate(value, "entity_rate");
    } else if (key == "counts") {
      if (!value.is_object()) throw ConfigError("synth.counts: expected an object");
      for (const auto& [split, n] : value.items()) {
        if (!n.is_number_unsigned()) throw ConfigError("synth.counts." + split + ": expected a count");
        if (split == "train") {
          cfg.train_count = n.get<std::size_t>();
        } else if (split == "dev") {
          cfg.dev_count = n.get<std::size_t>();
        } else if (split == "test") {
          cfg.test_count = n.get<std::size_t>();
        } else {
          throw ConfigError("synth.counts: unknown split '" + split + "'");
        }
      }
    } else {
      throw ConfigError("synth: unknown key '" + key + "'");
    }
  }
  for (const auto& [name, chars] : indicators.items()) {
    auto it = std::find_if(cfg.types.begin(), cfg.types.end(),
                           [&](const SynthType& t) { return t.name == name; });
    if (it == cfg.types.end()) {
      throw ConfigError("synth.indicator_chars: type '" + name + "' is not listed in types");
    }
    it->indicators = read_chars(chars, "indicator_chars");
  }
  cfg.validate();
  return cfg;
}

std::string SynthConfig::to_json_text() const {
  json j;
  json names = json::array();
  json indicators = json::object();
  for (const auto& t : types) {
    names.push_back(t.name);
    if (!t.indicators.empty()) indicators[t.name] = utf8::encode(t.indicators);
  }
  j["types"] = names;
  j["indicator_chars"] = indicators;
  j["filler_alphabet"] = utf8::encode(filler_alphabet);
  if (!entity_alphabet.empty()) j["entity_alphabet"] = utf8::encode(entity_alphabet);
  j["entity_len"] = {entity_len.min, entity_len.max};
  j["sentence_len"] = {sentence_len.min, sentence_len.max};
  j["ambiguity_rate"] = ambiguity_rate;
  j["entity_rate"] = entity_rate;
  j["counts"] = {{"train", train_count}, {"dev", dev_count}, {"test", test_count}};
  return j.dump(2);
}

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.types = {{"LOC", U"河海湖山"}, {"ORG", U"司行队院"}, {"GPE", U"省市县州"}};
  cfg.filler_alphabet = U"的了在是我有他这大来上个到说们为和你地出道也时年就那要下以会";
  cfg.entity_alphabet = U"波罗尼日尔美英法德阿克斯托马哈里安伊拉巴西图兰卡维纳";
  cfg.entity_len = {3, 5};
  cfg.sentence_len = {8, 16};
  cfg.ambiguity_rate = 0.3;
  cfg.entity_rate = 0.3;
  cfg.train_count = 200;
  cfg.dev_count = 50;
  cfg.test_count = 50;
  return cfg;
}

namespace {

Sentence make_sentence(const SynthConfig& cfg, Rng& rng) {
  const std::u32string& body = cfg.entity_alphabet.empty() ? cfg.filler_alphabet : cfg.entity_alphabet;
  std::size_t target = rng.between(cfg.sentence_len.min, cfg.sentence_len.max);
  bool trap = rng.bernoulli(cfg.ambiguity_rate);
  std::size_t content = trap ? target - 1 : target;

  Sentence s;
  bool after_entity = false;
  while (s.chars.size() < content) {
    std::size_t remaining = content - s.chars.size();
    if (!after_entity && remaining >= cfg.entity_len.min && rng.bernoulli(cfg.entity_rate)) {
      const SynthType& type = cfg.types[rng.index(cfg.types.size())];
      std::size_t len = rng.between(cfg.entity_len.min, std::min(cfg.entity_len.max, remaining));
      std::size_t start = s.chars.size();
      std::size_t body_len = type.indicators.empty() ? len : len - 1;
      for (std::size_t k = 0; k < body_len; ++k) s.chars.push_back(body[rng.index(body.size())]);
      if (!type.indicators.empty()) {
        s.chars.push_back(type.indicators[rng.index(type.indicators.size())]);
      }
      s.entities.push_back({start, start + len - 1, type.name});
      after_entity = true;
    } else {
      s.chars.push_back(cfg.filler_alphabet[rng.index(cfg.filler_alphabet.size())]);
      after_entity = false;
    }
  }

  if (trap) {
    // Insert one indicator character at a gap that is not inside an entity.
    std::vector<std::size_t> gaps;
    for (std::size_t gap = 0; gap <= s.chars.size(); ++gap) {
      bool inside = std::any_of(s.entities.begin(), s.entities.end(), [gap](const GoldEntity& e) {
        return e.start < gap && gap <= e.end;
      });
      if (!inside) gaps.push_back(gap);
    }
    std::u32string pool;
    for (const auto& t : cfg.types) pool += t.indicators;
    std::size_t gap = gaps[rng.index(gaps.size())];
    s.chars.insert(s.chars.begin() + static_cast<std::ptrdiff_t>(gap), pool[rng.index(pool.size())]);
    for (auto& e : s.entities) {
      if (e.start >= gap) {
        ++e.start;
        ++e.end;
      }
    }
  }
  return s;
}

}  // namespace

SyntheticCorpora generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::set<std::u32string> seen;
  auto fill = [&](Corpus& split, std::size_t count) {
    std::size_t attempts = 0;
    std::size_t limit = 1000 * (count + 1);
    while (split.size() < count) {
      if (++attempts > limit) {
        throw ConfigError("synth: cannot generate enough distinct sentences; widen the alphabets or lengths");
      }
      Sentence s = make_sentence(config, rng);
      if (seen.insert(s.chars).second) split.push_back(std::move(s));
    }
  };
  SyntheticCorpora out;
  fill(out.train, config.train_count);
  fill(out.dev, config.dev_count);
  fill(out.test, config.test_count);
  return out;
}

std::size_t count_trap_indicators(const Sentence& sentence, const SynthConfig& config) {
  std::set<char32_t> indicators;
  for (const auto& t : config.types) indicators.insert(t.indicators.begin(), t.indicators.end());
  std::size_t traps = 0;
  for (std::size_t t = 0; t < sentence.length(); ++t) {
    if (!indicators.contains(sentence.chars[t])) continue;
    bool ends_entity = std::any_of(sentence.entities.begin(), sentence.entities.end(),
                                   [t](const GoldEntity& e) { return e.end == t; });
    if (!ends_entity) ++traps;
  }
  return traps;
}

}  // namespace ricon
