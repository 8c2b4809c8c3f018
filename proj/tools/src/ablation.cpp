#include "ricon/tools/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace ricon::tools {

std::vector<AblationVariant> ablation_variants() {
  return {
      {"vanilla", false, 0.0, 0.0},
      {"+agnostic", false, 1.0, 0.0},
      {"+aware", true, 0.0, 0.0},
      {"+aware&agnostic", true, 1.0, 0.0},
      {"full", true, 1.0, 0.5},
  };
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(sq / (n - 1.0));
  }
  return s;
}

namespace {

template <typename Get>
Summary summarize_runs(const std::vector<EvalReport>& runs, Get get) {
  std::vector<double> values;
  for (const auto& r : runs) values.push_back(get(r));
  return summarize(values);
}

}  // namespace

Summary VariantResult::precision() const {
  return summarize_runs(runs, [](const EvalReport& r) { return r.precision; });
}
Summary VariantResult::recall() const {
  return summarize_runs(runs, [](const EvalReport& r) { return r.recall; });
}
Summary VariantResult::f1() const {
  return summarize_runs(runs, [](const EvalReport& r) { return r.f1; });
}

EvalReport run_variant(const AblationVariant& variant, const ModelConfig& model, const TrainConfig& train,
                       const AblationData& data, std::uint64_t seed) {
  ModelConfig mc = model;
  mc.use_regularity = variant.use_regularity;
  TrainConfig tc = train;
  tc.lambda_agnostic = variant.lambda_agnostic;
  tc.lambda_orth = variant.lambda_orth;
  tc.seed = seed;
  RiconModel m(mc, data.vocab, seed);
  ricon::train(m, data.train, data.dev, tc);
  return evaluate_model(m, data.test, tc.decode, tc.threads);
}

std::vector<VariantResult> run_ablation(const std::vector<AblationVariant>& variants, const ModelConfig& model,
                                        const TrainConfig& train, const AblationData& data,
                                        const std::vector<std::uint64_t>& seeds, std::ostream* progress) {
  std::vector<VariantResult> out;
  for (const auto& v : variants) {
    VariantResult result{v, {}};
    for (auto seed : seeds) {
      result.runs.push_back(run_variant(v, model, train, data, seed));
      if (progress) {
        const auto& r = result.runs.back();
        *progress << v.name << " seed=" << seed << " p=" << r.precision << " r=" << r.recall << " f1=" << r.f1
                  << '\n';
      }
    }
    out.push_back(std::move(result));
  }
  return out;
}

std::string ablation_table(const std::vector<VariantResult>& results) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %-17s %-17s %-17s\n", "variant", "P", "R", "F1");
  out += line;
  auto cell = [](Summary s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * s.mean, 100.0 * s.sd);
    return std::string(buf);
  };
  for (const auto& r : results) {
    // '±' is two bytes; pad by hand so columns line up in a terminal.
    std::string p = cell(r.precision()), rc = cell(r.recall()), f = cell(r.f1());
    std::snprintf(line, sizeof line, "%-18s %-18s %-18s %-18s\n", r.variant.name.c_str(), p.c_str(), rc.c_str(),
                  f.c_str());
    out += line;
  }
  return out;
}

std::string ablation_json(const std::vector<VariantResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& e : r.runs) runs.push_back({{"p", e.precision}, {"r", e.recall}, {"f1", e.f1}});
    rows.push_back({{"variant", r.variant.name},
                    {"p_mean", r.precision().mean},
                    {"p_sd", r.precision().sd},
                    {"r_mean", r.recall().mean},
                    {"r_sd", r.recall().sd},
                    {"f1_mean", r.f1().mean},
                    {"f1_sd", r.f1().sd},
                    {"runs", runs}});
  }
  return rows.dump(2);
}

}  // namespace ricon::tools
