#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>

#include "ricon/gradcheck.hpp"
#include "ricon/tools/ablation.hpp"
#include "ricon/tools/run_config.hpp"

namespace ricon::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Finite-difference audit of the whole model with every loss active,
// dropout off and double precision.
struct AuditConfig {
  std::size_t hidden = 2;
  std::size_t embed_dim = 4;
  std::size_t num_classes = 3;  // including NONE
  std::size_t mlp_dim = 3;
  std::size_t length = 3;
  std::size_t layers = 2;
  std::uint64_t seed = 0;
  double eps = 1e-5;
};
GradCheckReport audit_model_gradients(const AuditConfig& config);

// Corpora named by the config, or the synthetic splits when data.train is empty.
AblationData load_corpora(const RunConfig& config);

// Entry point of the `ricon` binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ricon::tools
