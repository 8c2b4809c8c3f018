#include "ricon/tools/commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ricon/checkpoint.hpp"
#include "ricon/errors.hpp"
#include "ricon/utf8.hpp"

namespace ricon::tools {

using nlohmann::json;

GradCheckReport audit_model_gradients(const AuditConfig& config) {
  if (config.num_classes < 2) throw ConfigError("gradcheck: need at least 2 classes");
  if (config.length < 1) throw ConfigError("gradcheck: sentence length must be positive");
  Rng rng(config.seed);
  std::vector<std::string> types;
  for (std::size_t t = 1; t < config.num_classes; ++t) types.push_back("T" + std::to_string(t));
  std::u32string alphabet = U"abcdefgh";
  Vocab vocab = Vocab::from_lists(alphabet, types);

  Sentence sentence;
  for (std::size_t k = 0; k < config.length; ++k) sentence.chars.push_back(alphabet[rng.index(alphabet.size())]);
  // One gold mention so every loss sees both classes.
  std::size_t start = rng.index(config.length);
  std::size_t end = start + rng.index(config.length - start);
  sentence.entities.push_back({start, end, types[rng.index(types.size())]});

  ModelConfig mc;
  mc.encoder.embed_dim = config.embed_dim;
  mc.encoder.hidden = config.hidden;
  mc.encoder.layers = config.layers;
  mc.mlp_dim = config.mlp_dim;
  RiconModel model(mc, vocab, config.seed);
  // Non-zero biases so their gradients are not trivially symmetric.
  Rng jitter = Rng::derive(config.seed, 1);
  for (auto& p : model.params()) {
    for (Real& v : p->value().values()) v += 0.1 * jitter.normal();
  }
  TrainConfig tc;
  LossRequest request;
  auto build = [&](Graph& graph) {
    SentenceLosses l = model.losses(graph, sentence, nullptr, request);
    return total_loss(l.aware, l.agnostic, l.orth, tc);
  };
  return gradient_check(model.params(), build, config.eps);
}

AblationData load_corpora(const RunConfig& config) {
  AblationData data;
  if (config.data.train.empty()) {
    auto synth = generate_synthetic(config.synth, config.data.synth_seed);
    data.train = std::move(synth.train);
    data.dev = std::move(synth.dev);
    data.test = std::move(synth.test);
  } else {
    data.train = read_column_corpus(config.data.train);
    if (!config.data.dev.empty()) data.dev = read_column_corpus(config.data.dev);
    if (!config.data.test.empty()) data.test = read_column_corpus(config.data.test);
  }
  data.vocab = Vocab::build(data.train);
  return data;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<Override> overrides_from(const std::vector<std::string>& raw) {
  std::vector<Override> out;
  for (const auto& r : raw) out.push_back(parse_override(r));
  return out;
}

OverlapMode mode_from_flag(bool flat) { return flat ? OverlapMode::kFlat : OverlapMode::kNested; }

// Reads column-format corpora, or raw text with one sentence per line.
Corpus read_input(const std::filesystem::path& path, bool raw) {
  if (!raw) return read_column_corpus(path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    corpus.push_back({utf8::decode(line), {}});
  }
  return corpus;
}

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config,-c", file, "JSON run config");
    cmd->add_option("--set", sets, "Override a config value, e.g. train.epochs=5")->take_all();
  }
  RunConfig resolve() const { return load_run_config(file, overrides_from(sets)); }
};

int cmd_gen_data(const ConfigArgs& args, const std::string& out_dir, std::ostream& out) {
  RunConfig cfg = args.resolve();
  std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);
  auto corpora = generate_synthetic(cfg.synth, cfg.data.synth_seed);
  std::filesystem::create_directories(dir);
  save_column_corpus(dir / "train.txt", corpora.train);
  save_column_corpus(dir / "dev.txt", corpora.dev);
  save_column_corpus(dir / "test.txt", corpora.test);
  write_text(dir / "config.json", cfg.to_json_text() + "\n");
  out << "wrote " << corpora.train.size() << "/" << corpora.dev.size() << "/" << corpora.test.size()
      << " sentences to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const ConfigArgs& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg = args.resolve();
  AblationData data = load_corpora(cfg);
  RiconModel model(cfg.model, data.vocab, cfg.train.seed);
  if (!cfg.data.embeddings.empty()) {
    auto replaced = load_pretrained_embeddings(cfg.data.embeddings, data.vocab, *model.encoder_params().table);
    out << "loaded " << replaced << " pretrained character vectors\n";
  }
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  std::string echo = cfg.to_json_text();
  write_text(dir / "config.json", echo + "\n");
  std::ofstream log(dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log) throw Error("cannot write " + (dir / "train_log.jsonl").string());
  try {
    TrainResult result = train(model, data.train, data.dev, cfg.train, &log);
    save_checkpoint(dir / "checkpoint", model, echo);
    out << "trained " << result.log.size() << " epochs";
    if (result.best_dev_f1 >= 0) out << ", best dev F1 " << result.best_dev_f1 << " at epoch " << result.best_epoch;
    out << "\ncheckpoint: " << (dir / "checkpoint").string() << "\n";
  } catch (const NumericError& e) {
    save_checkpoint(dir / "checkpoint", model, echo);
    err << "training diverged: " << e.what() << "; last good parameters saved\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, bool flat, std::size_t threads,
             std::ostream& out) {
  RiconModel model = load_checkpoint(checkpoint);
  Corpus corpus = read_column_corpus(data);
  out << evaluate_model(model, corpus, mode_from_flag(flat), threads).to_json_text() << "\n";
  return kExitOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& data, bool raw, bool flat,
                const std::string& out_path, std::ostream& out) {
  RiconModel model = load_checkpoint(checkpoint);
  Corpus corpus = read_input(data, raw);
  auto predictions = predict_corpus(model, corpus, mode_from_flag(flat));
  std::ostringstream lines;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    lines << prediction_json_line(corpus[s], predictions[s], model.vocab()) << "\n";
  }
  if (out_path.empty()) {
    out << lines.str();
  } else {
    write_text(out_path, lines.str());
    json echo = {{"checkpoint", checkpoint}, {"input", data}, {"raw", raw}, {"decode", flat ? "flat" : "nested"}};
    write_text(out_path + ".config.json", echo.dump(2) + "\n");
  }
  return kExitOk;
}

void print_alpha(std::ostream& out, const Sentence& sentence, Span span, const std::string& label,
                 const std::vector<double>& alpha) {
  out << "span [" << span.start << ", " << span.end << "]";
  if (!label.empty()) out << " " << label;
  out << "\n";
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out << "  " << utf8::encode(sentence.chars[span.start + k]) << "\t" << std::fixed << std::setprecision(4)
        << alpha[k] << "\n";
  }
  out.unsetf(std::ios::fixed);
}

int cmd_inspect(const std::string& checkpoint, const std::string& text, long start, long end, std::ostream& out) {
  RiconModel model = load_checkpoint(checkpoint);
  Sentence sentence{utf8::decode(text), {}};
  if (sentence.chars.empty()) throw ConfigError("inspect: empty sentence");
  if (start >= 0 || end >= 0) {
    if (start < 0 || end < 0) throw ConfigError("inspect: give both --start and --end");
    Span span{static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
    print_alpha(out, sentence, span, "", inspect_regularity(model, sentence, span));
    return kExitOk;
  }
  auto predictions = predict_sentence(model, sentence);
  if (predictions.empty()) out << "no entities predicted\n";
  for (const auto& p : predictions) {
    Span span{p.start, p.end};
    print_alpha(out, sentence, span, model.vocab().type_name(p.type), inspect_regularity(model, sentence, span));
  }
  return kExitOk;
}

int cmd_gradcheck(const AuditConfig& base, std::size_t seeds, double tolerance, bool verbose, std::ostream& out) {
  double worst = 0.0;
  for (std::size_t k = 0; k < seeds; ++k) {
    AuditConfig cfg = base;
    cfg.seed = base.seed + k;
    GradCheckReport report = audit_model_gradients(cfg);
    out << "seed " << cfg.seed << ": worst relative error " << std::scientific << std::setprecision(3)
        << report.worst << " (" << report.worst_param << ")\n";
    if (verbose) {
      for (const auto& p : report.params) {
        out << "  " << std::left << std::setw(34) << p.name << std::right << p.max_relative_error << "\n";
      }
    }
    out << std::defaultfloat;
    worst = std::max(worst, report.worst);
  }
  out << "worst " << std::scientific << worst << std::defaultfloat << (worst < tolerance ? " PASS" : " FAIL") << "\n";
  return worst < tolerance ? kExitOk : kExitRuntime;
}

int cmd_ablate(const ConfigArgs& args, std::size_t seeds, std::ostream& out, std::ostream& err) {
  RunConfig cfg = args.resolve();
  AblationData data = load_corpora(cfg);
  if (data.test.empty()) throw ConfigError("ablate: a test split is required");
  std::vector<std::uint64_t> seed_list;
  for (std::size_t k = 0; k < seeds; ++k) seed_list.push_back(cfg.train.seed + k);
  auto results = run_ablation(ablation_variants(), cfg.model, cfg.train, data, seed_list, &err);
  std::filesystem::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "config.json", cfg.to_json_text() + "\n");
  write_text(cfg.output_dir / "ablation.json", ablation_json(results) + "\n");
  out << ablation_table(results);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"RICON span-based named entity recognition"};
  app.require_subcommand(1);

  ConfigArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Write synthetic train/dev/test splits");
  gen_args.attach(gen);
  gen->add_option("--out,-o", gen_out, "Output directory (default: output.dir)");

  ConfigArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model; writes checkpoint, log and config echo");
  train_args.attach(train_cmd);

  std::string checkpoint, data, out_path, text;
  bool flat = false, raw = false;
  std::size_t threads = 1;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a column-format corpus");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--data", data, "Column-format corpus")->required();
  eval->add_flag("--flat", flat, "Reject every overlap instead of only crossing spans");
  eval->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* predict = app.add_subcommand("predict", "Write predictions as JSON lines");
  predict->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  predict->add_option("--data", data, "Input corpus")->required();
  predict->add_flag("--raw", raw, "Input is plain text, one sentence per line");
  predict->add_flag("--flat", flat, "Reject every overlap instead of only crossing spans");
  predict->add_option("--out,-o", out_path, "Output file (default: stdout)");

  long start = -1, end = -1;
  auto* inspect = app.add_subcommand("inspect", "Print regularity attention weights");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  inspect->add_option("--sentence", text, "Sentence text")->required();
  inspect->add_option("--start", start, "Span start (default: every predicted entity)");
  inspect->add_option("--end", end, "Span end, inclusive");

  AuditConfig audit;
  std::size_t audit_seeds = 1;
  double tolerance = 1e-4;
  bool verbose = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference audit of the full model");
  gradcheck->add_option("--d", audit.hidden, "LSTM hidden size per direction")->capture_default_str();
  gradcheck->add_option("--e", audit.embed_dim, "Embedding size")->capture_default_str();
  gradcheck->add_option("--c", audit.num_classes, "Classes including NONE")->capture_default_str();
  gradcheck->add_option("--m", audit.mlp_dim, "Boundary MLP size")->capture_default_str();
  gradcheck->add_option("--l", audit.length, "Sentence length")->capture_default_str();
  gradcheck->add_option("--layers", audit.layers, "BiLSTM layers")->capture_default_str();
  gradcheck->add_option("--seed", audit.seed, "First seed")->capture_default_str();
  gradcheck->add_option("--seeds", audit_seeds, "Number of seeds")->capture_default_str();
  gradcheck->add_option("--tol", tolerance, "Pass threshold")->capture_default_str();
  gradcheck->add_flag("--verbose,-v", verbose, "List the error of every parameter");

  ConfigArgs ablate_args;
  std::size_t ablate_seeds = 5;
  auto* ablate = app.add_subcommand("ablate", "Component ablation over several seeds");
  ablate_args.attach(ablate);
  ablate->add_option("--seeds", ablate_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_args, gen_out, out);
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*eval) return cmd_eval(checkpoint, data, flat, threads, out);
    if (*predict) return cmd_predict(checkpoint, data, raw, flat, out_path, out);
    if (*inspect) return cmd_inspect(checkpoint, text, start, end, out);
    if (*gradcheck) return cmd_gradcheck(audit, audit_seeds, tolerance, verbose, out);
    if (*ablate) return cmd_ablate(ablate_args, ablate_seeds, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ricon::tools
