#include "ricon/trainer.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "ricon/errors.hpp"
#include "ricon/ops.hpp"

namespace ricon {

using nlohmann::json;

const char* to_string(LossNorm norm) { return norm == LossNorm::kSentence ? "sentence" : "span"; }
const char* to_string(Precision precision) { return precision == Precision::kSingle ? "single" : "double"; }
const char* to_string(OverlapMode mode) { return mode == OverlapMode::kNested ? "nested" : "flat"; }

void TrainConfig::validate() const {
  if (lambda_aware < 0 || lambda_agnostic < 0 || lambda_orth < 0) {
    throw ConfigError("train.lambda_*: loss weights must be non-negative");
  }
  if (lambda_aware == 0) throw ConfigError("train.lambda_aware: the type loss is required for decoding");
  if (!(learning_rate > 0)) throw ConfigError("train.learning_rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1)) throw ConfigError("train.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw ConfigError("train.beta2 must lie in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("train.epsilon must be positive");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (eval_every < 1) throw ConfigError("train.eval_every must be >= 1");
  if (clip_norm < 0) throw ConfigError("train.clip_norm must be non-negative");
  if (!(neg_sample_rate > 0 && neg_sample_rate <= 1)) throw ConfigError("train.neg_sample_rate must lie in (0, 1]");
  if (threads < 1) throw ConfigError("train.threads must be >= 1");
}

TrainConfig TrainConfig::from_json_text(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train: expected an object");
  TrainConfig cfg;
  auto real = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("train." + key + ": expected a number");
    return v.get<double>();
  };
  auto size = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw ConfigError("train." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  };
  auto text = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("train." + key + ": expected a string");
    return v.get<std::string>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda_aware") cfg.lambda_aware = real(value, key);
    else if (key == "lambda_agnostic") cfg.lambda_agnostic = real(value, key);
    else if (key == "lambda_orth") cfg.lambda_orth = real(value, key);
    else if (key == "learning_rate") cfg.learning_rate = real(value, key);
    else if (key == "beta1") cfg.beta1 = real(value, key);
    else if (key == "beta2") cfg.beta2 = real(value, key);
    else if (key == "epsilon") cfg.epsilon = real(value, key);
    else if (key == "batch_size") cfg.batch_size = size(value, key);
    else if (key == "epochs") cfg.epochs = size(value, key);
    else if (key == "seed") cfg.seed = size(value, key);
    else if (key == "clip_norm") cfg.clip_norm = real(value, key);
    else if (key == "eval_every") cfg.eval_every = size(value, key);
    else if (key == "neg_sample_rate") cfg.neg_sample_rate = real(value, key);
    else if (key == "threads") cfg.threads = size(value, key);
    else if (key == "loss_norm") {
      auto v = text(value, key);
      if (v == "sentence") cfg.loss_norm = LossNorm::kSentence;
      else if (v == "span") cfg.loss_norm = LossNorm::kSpan;
      else throw ConfigError("train.loss_norm: expected sentence or span");
    } else if (key == "precision") {
      auto v = text(value, key);
      if (v == "single") cfg.precision = Precision::kSingle;
      else if (v == "double") cfg.precision = Precision::kDouble;
      else throw ConfigError("train.precision: expected single or double");
    } else {
      throw ConfigError("train: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string TrainConfig::to_json_text() const {
  json j;
  j["lambda_aware"] = lambda_aware;
  j["lambda_agnostic"] = lambda_agnostic;
  j["lambda_orth"] = lambda_orth;
  j["learning_rate"] = learning_rate;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["epsilon"] = epsilon;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["clip_norm"] = clip_norm;
  j["eval_every"] = eval_every;
  j["neg_sample_rate"] = neg_sample_rate;
  j["loss_norm"] = to_string(loss_norm);
  j["precision"] = to_string(precision);
  j["threads"] = threads;
  return j.dump(2);
}

double total_loss(double aware, double agnostic, double orth, const TrainConfig& config) {
  if (!std::isfinite(aware)) throw NumericError("aware loss is not finite");
  if (!std::isfinite(agnostic)) throw NumericError("agnostic loss is not finite");
  if (!std::isfinite(orth)) throw NumericError("orthogonality loss is not finite");
  return config.lambda_aware * aware + config.lambda_agnostic * agnostic + config.lambda_orth * orth;
}

Var total_loss(Var aware, Var agnostic, Var orth, const TrainConfig& config) {
  struct Term {
    Var var;
    double weight;
    const char* name;
  };
  Var sum;
  for (const Term& t : {Term{aware, config.lambda_aware, "aware"}, Term{agnostic, config.lambda_agnostic, "agnostic"},
                        Term{orth, config.lambda_orth, "orthogonality"}}) {
    if (!t.var.valid() || t.weight == 0.0) continue;
    if (!std::isfinite(t.var.item())) throw NumericError(std::string(t.name) + " loss is not finite");
    Var term = ops::scale(t.var, t.weight);
    sum = sum.valid() ? ops::add(sum, term) : term;
  }
  if (!sum.valid()) throw ContractError("total_loss: every component is missing or has zero weight");
  return sum;
}

OptimizerState OptimizerState::for_params(const ParamStore& store) {
  OptimizerState state;
  for (const auto& p : store) {
    state.m.push_back(Tensor::zeros_like(p->value()));
    state.v.push_back(Tensor::zeros_like(p->value()));
  }
  return state;
}

double clip_gradients(ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& p : store) {
    for (Real g : p->grad().values()) sq += g * g;
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    double factor = max_norm / norm;
    for (auto& p : store) {
      for (Real& g : p->grad().values()) g *= factor;
    }
  }
  return norm;
}

void adam_step(ParamStore& store, OptimizerState& state, const TrainConfig& config) {
  if (state.m.size() != store.size() || state.v.size() != store.size()) {
    throw ContractError("optimizer state does not match the parameter store");
  }
  for (const auto& p : store) {
    for (Real g : p->grad().values()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + p->name());
    }
  }
  clip_gradients(store, config.clip_norm);
  ++state.step;
  double t = static_cast<double>(state.step);
  double correct1 = 1.0 - std::pow(config.beta1, t);
  double correct2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < store.size(); ++k) {
    Param& p = store[k];
    auto value = p.value().values();
    auto grad = p.grad().values();
    auto m = state.m[k].values();
    auto v = state.v[k].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      double m_hat = m[i] / correct1;
      double v_hat = v[i] / correct2;
      value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  if (config.precision == Precision::kSingle) store.round_to_single();
  store.zero_grad();
}

std::string EpochRecord::to_json_line() const {
  json j;
  j["epoch"] = epoch;
  j["loss_aware"] = loss.aware;
  j["loss_agnostic"] = loss.agnostic;
  j["loss_orth"] = loss.orth;
  if (dev) {
    j["dev_p"] = dev->precision;
    j["dev_r"] = dev->recall;
    j["dev_f1"] = dev->f1;
  } else {
    j["dev_p"] = nullptr;
    j["dev_r"] = nullptr;
    j["dev_f1"] = nullptr;
  }
  return j.dump();
}

namespace {

LossRequest request_for(const TrainConfig& config) {
  LossRequest request;
  request.aware = config.lambda_aware > 0;
  request.agnostic = config.lambda_agnostic > 0;
  // Orthogonality is cheap once both encoders run, so it is always logged then.
  request.orth = config.lambda_orth > 0 || config.lambda_agnostic > 0;
  request.neg_sample_rate = config.neg_sample_rate;
  return request;
}

struct SentenceResult {
  LossTotals values;
  std::size_t spans = 0;
};

double item_or_zero(Var v) { return v.valid() ? v.item() : 0.0; }

// Runs forward and backward of one sentence; `weight` scales its gradient.
SentenceResult sentence_step(const RiconModel& model, const Sentence& sentence, const TrainConfig& config,
                             Rng* rng, double aware_weight, double orth_weight, GradBuffer* sink) {
  Graph graph(config.precision);
  SentenceLosses l = model.losses(graph, sentence, rng, request_for(config));
  SentenceResult out{{item_or_zero(l.aware), item_or_zero(l.agnostic), item_or_zero(l.orth)}, l.num_spans};
  total_loss(out.values.aware, out.values.agnostic, out.values.orth, config);
  if (sink) {
    // Span-normalized batches weight the span losses and the orthogonality
    // term separately, so each gets its own scale.
    Var span_terms = total_loss(l.aware, l.agnostic, Var{}, config);
    Var loss = span_terms;
    if (l.orth.valid() && config.lambda_orth > 0) {
      double ratio = orth_weight / aware_weight;
      loss = ops::add(span_terms, ops::scale(l.orth, config.lambda_orth * ratio));
    }
    graph.backward(loss, *sink, aware_weight);
  }
  return out;
}

template <typename Fn>
void run_parallel(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t k = t; k < count; k += threads) fn(k);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Tensor> snapshot(const ParamStore& store) {
  std::vector<Tensor> out;
  out.reserve(store.size());
  for (const auto& p : store) out.push_back(p->value());
  return out;
}

void restore(ParamStore& store, const std::vector<Tensor>& values) {
  for (std::size_t k = 0; k < store.size(); ++k) store[k].value() = values[k];
  store.zero_grad();
}

}  // namespace

LossTotals train_batch(RiconModel& model, OptimizerState& state, const std::vector<const Sentence*>& batch,
                       const TrainConfig& config, std::uint64_t epoch, std::size_t first_index) {
  if (batch.empty()) throw ContractError("train_batch: empty batch");
  std::size_t n = batch.size();
  std::vector<std::size_t> spans(n);
  std::size_t total_spans = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t l = batch[k]->length();
    spans[k] = span_count(l, model.config().max_span_len);
    total_spans += spans[k];
  }
  std::vector<GradBuffer> sinks;
  sinks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) sinks.emplace_back(model.params());
  std::vector<SentenceResult> results(n);
  run_parallel(n, config.threads, [&](std::size_t k) {
    Rng rng = Rng::derive(config.seed, epoch + 1, first_index + k);
    double orth_weight = 1.0 / static_cast<double>(n);
    double span_weight = config.loss_norm == LossNorm::kSentence
                             ? orth_weight
                             : static_cast<double>(spans[k]) / static_cast<double>(total_spans);
    results[k] = sentence_step(model, *batch[k], config, &rng, span_weight, orth_weight, &sinks[k]);
  });
  for (const auto& sink : sinks) sink.add_to(model.params());
  adam_step(model.params(), state, config);

  LossTotals mean;
  for (const auto& r : results) {
    mean.aware += r.values.aware;
    mean.agnostic += r.values.agnostic;
    mean.orth += r.values.orth;
  }
  mean.aware /= static_cast<double>(n);
  mean.agnostic /= static_cast<double>(n);
  mean.orth /= static_cast<double>(n);
  return mean;
}

LossTotals probe_losses(const RiconModel& model, const Corpus& corpus, const TrainConfig& config) {
  LossRequest request;
  std::vector<LossTotals> parts(corpus.size());
  run_parallel(corpus.size(), config.threads, [&](std::size_t k) {
    Graph graph(Precision::kDouble);
    SentenceLosses l = model.losses(graph, corpus[k], nullptr, request);
    parts[k] = {l.aware.item(), l.agnostic.item(), l.orth.item()};
  });
  LossTotals mean;
  for (const auto& p : parts) {
    mean.aware += p.aware;
    mean.agnostic += p.agnostic;
    mean.orth += p.orth;
  }
  if (!corpus.empty()) {
    double n = static_cast<double>(corpus.size());
    mean.aware /= n;
    mean.agnostic /= n;
    mean.orth /= n;
  }
  return mean;
}

TrainResult train(RiconModel& model, const Corpus& train_set, const Corpus& dev, const TrainConfig& config,
                  std::ostream* log) {
  config.validate();
  if (train_set.empty()) throw ContractError("train: empty training corpus");
  for (const auto& s : train_set) {
    if (s.chars.empty()) throw ContractError("train: empty sentence in the training corpus");
  }
  if (config.precision == Precision::kSingle) model.params().round_to_single();
  model.params().zero_grad();

  OptimizerState state = OptimizerState::for_params(model.params());
  TrainResult result;
  std::vector<Tensor> best;
  std::vector<Tensor> last_good = snapshot(model.params());
  std::vector<std::size_t> order(train_set.size());

  try {
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng shuffle_rng = Rng::derive(config.seed, epoch);
      shuffle_rng.shuffle(order.begin(), order.end());

      EpochRecord record;
      record.epoch = epoch;
      std::size_t batches = 0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        std::size_t stop = std::min(order.size(), start + config.batch_size);
        std::vector<const Sentence*> batch;
        for (std::size_t k = start; k < stop; ++k) batch.push_back(&train_set[order[k]]);
        LossTotals l = train_batch(model, state, batch, config, epoch, start);
        record.loss.aware += l.aware;
        record.loss.agnostic += l.agnostic;
        record.loss.orth += l.orth;
        ++batches;
      }
      record.loss.aware /= static_cast<double>(batches);
      record.loss.agnostic /= static_cast<double>(batches);
      record.loss.orth /= static_cast<double>(batches);
      last_good = snapshot(model.params());

      bool due = epoch % config.eval_every == 0 || epoch == config.epochs;
      if (!dev.empty() && due) {
        record.dev = evaluate_model(model, dev, config.decode, config.threads);
        if (record.dev->f1 >= result.best_dev_f1) {
          result.best_dev_f1 = record.dev->f1;
          result.best_epoch = epoch;
          best = last_good;
        }
      }
      if (log) *log << record.to_json_line() << '\n' << std::flush;
      result.log.push_back(std::move(record));
    }
  } catch (const NumericError&) {
    restore(model.params(), best.empty() ? last_good : best);
    throw;
  }
  if (!best.empty()) {
    restore(model.params(), best);
  } else {
    result.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace ricon
