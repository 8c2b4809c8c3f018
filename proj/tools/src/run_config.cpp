#include "ricon/tools/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ricon/errors.hpp"

namespace ricon::tools {

using nlohmann::json;

namespace {

const char* decode_name(OverlapMode mode) { return mode == OverlapMode::kFlat ? "flat" : "nested"; }

json defaults() {
  RunConfig cfg;
  cfg.synth = default_synth_config();
  json j;
  j["model"] = json::parse(cfg.model.to_json_text());
  j["train"] = json::parse(cfg.train.to_json_text());
  j["data"] = {{"train", ""}, {"dev", ""}, {"test", ""}, {"embeddings", ""}, {"synth_seed", cfg.data.synth_seed}};
  j["synth"] = json::parse(cfg.synth.to_json_text());
  j["decode"] = {{"mode", decode_name(cfg.decode)}};
  j["output"] = {{"dir", cfg.output_dir.string()}};
  return j;
}

// Objects merge key by key; anything else replaces. Keys must already exist
// in `base`. The indicator map is keyed by type name and replaced whole.
void merge(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : patch.items()) {
    std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (base[key].is_object() && value.is_object() && path != "synth.indicator_chars") {
      merge(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

std::string path_field(const json& section, const char* key, const std::string& where) {
  const auto& v = section.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string path");
  return v.get<std::string>();
}

}  // namespace

std::string RunConfig::to_json_text() const {
  json j;
  j["model"] = json::parse(model.to_json_text());
  j["train"] = json::parse(train.to_json_text());
  j["data"] = {{"train", data.train.string()},
               {"dev", data.dev.string()},
               {"test", data.test.string()},
               {"embeddings", data.embeddings.string()},
               {"synth_seed", data.synth_seed}};
  j["synth"] = json::parse(synth.to_json_text());
  j["decode"] = {{"mode", decode_name(decode)}};
  j["output"] = {{"dir", output_dir.string()}};
  return j.dump(2);
}

Override parse_override(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(text) + "' is not of the form section.key=value");
  }
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

RunConfig resolve_run_config(std::string_view file_text, const std::vector<Override>& overrides) {
  json merged = defaults();
  if (!file_text.empty()) {
    json user;
    try {
      user = json::parse(file_text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    merge(merged, user, "");
  }
  for (const auto& o : overrides) {
    json value;
    try {
      value = json::parse(o.value);
    } catch (const json::exception&) {
      value = o.value;
    }
    // Build {"a": {"b": value}} and merge it like a file.
    json patch = value;
    std::string rest = o.path;
    std::vector<std::string> parts;
    for (std::size_t dot; (dot = rest.find('.')) != std::string::npos; rest = rest.substr(dot + 1)) {
      parts.push_back(rest.substr(0, dot));
    }
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      if (it->empty()) throw ConfigError("override path '" + o.path + "' has an empty component");
      patch = json{{*it, patch}};
    }
    merge(merged, patch, "");
  }

  RunConfig cfg;
  cfg.model = ModelConfig::from_json_text(merged["model"].dump());
  cfg.train = TrainConfig::from_json_text(merged["train"].dump());
  cfg.synth = SynthConfig::from_json_text(merged["synth"].dump());
  const json& data = merged["data"];
  cfg.data.train = path_field(data, "train", "data");
  cfg.data.dev = path_field(data, "dev", "data");
  cfg.data.test = path_field(data, "test", "data");
  cfg.data.embeddings = path_field(data, "embeddings", "data");
  if (!data["synth_seed"].is_number_unsigned()) throw ConfigError("data.synth_seed: expected a non-negative integer");
  cfg.data.synth_seed = data["synth_seed"].get<std::uint64_t>();
  const json& mode = merged["decode"]["mode"];
  if (mode == "nested") {
    cfg.decode = OverlapMode::kNested;
  } else if (mode == "flat") {
    cfg.decode = OverlapMode::kFlat;
  } else {
    throw ConfigError("decode.mode: expected nested or flat");
  }
  cfg.train.decode = cfg.decode;
  cfg.output_dir = path_field(merged["output"], "dir", "output");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file, const std::vector<Override>& overrides) {
  std::string text;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return resolve_run_config(text, overrides);
}

}  // namespace ricon::tools
