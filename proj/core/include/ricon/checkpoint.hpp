#pragma once

#include <filesystem>
#include <string>

#include "ricon/model.hpp"

namespace ricon {

inline constexpr const char* kCheckpointFormat = "ricon-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// Writes <dir>/manifest.json and <dir>/params.bin (little-endian float64
// values in manifest order). `extra_json`, when non-empty, must be a JSON
// document and is stored under "run_config".
void save_checkpoint(const std::filesystem::path& dir, const RiconModel& model,
                     const std::string& extra_json = "");

// Rebuilds the model from a checkpoint directory. Missing files or mismatched
// shapes raise ConfigError.
RiconModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace ricon
