#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ricon/decode.hpp"
#include "ricon/model.hpp"
#include "ricon/synthetic.hpp"
#include "ricon/trainer.hpp"

namespace ricon::tools {

struct DataPaths {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
  // Optional word2vec-format character vectors.
  std::filesystem::path embeddings;
  // Seed for the synthetic corpus used when `train` is empty.
  std::uint64_t synth_seed = 1;
};

// Everything a command needs, resolved from defaults, a JSON file and
// dotted overrides. Sections: model, train, data, synth, decode, output.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataPaths data;
  SynthConfig synth;
  OverlapMode decode = OverlapMode::kNested;
  std::filesystem::path output_dir = "run";

  std::string to_json_text() const;
};

// "a.b=value"; the value is parsed as JSON when possible, else taken as a string.
struct Override {
  std::string path;
  std::string value;
};
Override parse_override(std::string_view text);

// Layers `file_text` (may be empty) and the overrides over the defaults.
// Unknown sections or keys raise ConfigError with the offending path.
RunConfig resolve_run_config(std::string_view file_text, const std::vector<Override>& overrides);
RunConfig load_run_config(const std::filesystem::path& file, const std::vector<Override>& overrides);

}  // namespace ricon::tools
