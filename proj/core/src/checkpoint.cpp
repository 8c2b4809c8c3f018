#include "ricon/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ricon/errors.hpp"
#include "ricon/utf8.hpp"

namespace ricon {

using nlohmann::json;

namespace {

void put_le(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const RiconModel& model, const std::string& extra_json) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["version"] = kCheckpointVersion;
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little";
  manifest["model"] = json::parse(model.config().to_json_text());
  manifest["vocab"] = {{"chars", utf8::encode(std::u32string_view(model.vocab().chars()))},
                       {"types", model.vocab().types()}};
  std::string blob;
  blob.reserve(model.params().total_entries() * 8);
  json params = json::array();
  std::size_t offset = 0;
  for (const auto& p : model.params()) {
    params.push_back({{"name", p->name()}, {"shape", p->value().shape()}, {"offset", offset}});
    for (Real v : p->value().values()) put_le(blob, v);
    offset += p->value().size();
  }
  manifest["params"] = params;
  manifest["total_entries"] = offset;
  if (!extra_json.empty()) manifest["run_config"] = json::parse(extra_json);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "params.bin", blob);
}

RiconModel load_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("checkpoint directory not found: " + dir.string());
  json manifest;
  try {
    manifest = json::parse(slurp(dir / "manifest.json"));
    if (manifest.at("format") != kCheckpointFormat) throw ConfigError("not a checkpoint manifest");
    if (manifest.at("version") != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
    if (manifest.at("dtype") != "float64" || manifest.at("byte_order") != "little") {
      throw ConfigError("unsupported checkpoint encoding");
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint manifest: " + std::string(e.what()));
  }

  ModelConfig config;
  Vocab vocab;
  try {
    config = ModelConfig::from_json_text(manifest.at("model").dump());
    auto chars = utf8::decode(manifest.at("vocab").at("chars").get<std::string>());
    vocab = Vocab::from_lists(std::move(chars), manifest.at("vocab").at("types").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  RiconModel model(config, std::move(vocab), 0);

  std::string blob = slurp(dir / "params.bin");
  const auto& entries = manifest.at("params");
  if (entries.size() != model.params().size()) {
    throw ConfigError("checkpoint has " + std::to_string(entries.size()) + " parameters, model expects " +
                      std::to_string(model.params().size()));
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Param& p = model.params()[k];
    const auto& e = entries[k];
    if (e.at("name") != p.name()) {
      throw ConfigError("checkpoint parameter " + std::to_string(k) + " is " + e.at("name").get<std::string>() +
                        ", expected " + p.name());
    }
    if (e.at("shape").get<Shape>() != p.value().shape()) {
      throw ConfigError("shape mismatch for " + p.name());
    }
    auto offset = e.at("offset").get<std::size_t>();
    auto values = p.value().values();
    if ((offset + values.size()) * 8 > blob.size()) throw ConfigError("params.bin is truncated");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_le(bytes + (offset + i) * 8);
  }
  return model;
}

}  // namespace ricon
