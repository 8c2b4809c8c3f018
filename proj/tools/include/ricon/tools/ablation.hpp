#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ricon/corpus.hpp"
#include "ricon/decode.hpp"
#include "ricon/model.hpp"
#include "ricon/trainer.hpp"

namespace ricon::tools {

// One row of the component ablation.
struct AblationVariant {
  std::string name;
  bool use_regularity = true;
  double lambda_agnostic = 1.0;
  double lambda_orth = 0.5;
};

// vanilla, +agnostic, +aware, +aware&agnostic (no orthogonality), full.
std::vector<AblationVariant> ablation_variants();

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single run
};
Summary summarize(const std::vector<double>& values);

struct VariantResult {
  AblationVariant variant;
  std::vector<EvalReport> runs;  // one per seed, on the test split

  Summary precision() const;
  Summary recall() const;
  Summary f1() const;
};

struct AblationData {
  Corpus train;
  Corpus dev;
  Corpus test;
  Vocab vocab;
};

// Trains one variant with `seed` (model init and training) and scores the
// best-dev parameters on the test split.
EvalReport run_variant(const AblationVariant& variant, const ModelConfig& model, const TrainConfig& train,
                       const AblationData& data, std::uint64_t seed);

std::vector<VariantResult> run_ablation(const std::vector<AblationVariant>& variants, const ModelConfig& model,
                                        const TrainConfig& train, const AblationData& data,
                                        const std::vector<std::uint64_t>& seeds, std::ostream* progress = nullptr);

// Fixed-width text table of mean±sd P/R/F1 per variant.
std::string ablation_table(const std::vector<VariantResult>& results);
std::string ablation_json(const std::vector<VariantResult>& results);

}  // namespace ricon::tools
