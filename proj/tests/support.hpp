#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "ricon/graph.hpp"
#include "ricon/model.hpp"
#include "ricon/rng.hpp"
#include "ricon/tensor.hpp"

namespace ricon::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (Real& v : t.values()) v = scale * rng.normal();
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

inline ModelConfig tiny_model_config(std::size_t d = 2, std::size_t layers = 1) {
  ModelConfig cfg;
  cfg.encoder.embed_dim = 4;
  cfg.encoder.hidden = d;
  cfg.encoder.layers = layers;
  cfg.mlp_dim = 3;
  return cfg;
}

inline Vocab tiny_vocab() { return Vocab::from_lists(U"abcdefgh", {"LOC", "ORG"}); }

inline Sentence tiny_sentence() {
  return Sentence{U"abcad", {{1, 2, "LOC"}, {4, 4, "ORG"}}};
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("ricon_test_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ricon::testing
