#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "ricon/encoder.hpp"
#include "ricon/errors.hpp"
#include "ricon/gradcheck.hpp"
#include "ricon/ops.hpp"
#include "support.hpp"

namespace ricon {
namespace {

EncoderConfig small_config(std::size_t d = 3, std::size_t layers = 1) {
  EncoderConfig cfg;
  cfg.vocab_size = 10;
  cfg.embed_dim = 4;
  cfg.hidden = d;
  cfg.layers = layers;
  return cfg;
}

TEST(Embed, LooksUpRows) {
  ParamStore store;
  Rng rng(1);
  Param& table = store.add("table", testing::random_tensor({8, 3}, rng));
  Graph g;
  std::vector<CharId> ids = {5, 2, 5};
  Var x = embed(g, ids, table);
  ASSERT_EQ(x.value().shape(), (Shape{3, 3}));
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(x.value().at(0, k), table.value().at(5, k));
    EXPECT_EQ(x.value().at(1, k), table.value().at(2, k));
  }
  EXPECT_THROW(embed(g, std::vector<CharId>{}, table), ContractError);
}

TEST(Embed, ZeroTableGivesZeros) {
  ParamStore store;
  Param& table = store.add("table", Tensor({6, 2}));
  Graph g;
  std::vector<CharId> ids = {1, 4};
  for (Real v : embed(g, ids, table).value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Embed, GradientCountsOccurrences) {
  ParamStore store;
  Rng rng(2);
  Param& table = store.add("table", testing::random_tensor({8, 3}, rng));
  std::vector<CharId> ids = {5, 1, 5, 5, 7};
  Graph g;
  g.backward(ops::sum(embed(g, ids, table)));
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(table.grad().at(5, k), 3.0);
    EXPECT_EQ(table.grad().at(7, k), 1.0);
    EXPECT_EQ(table.grad().at(2, k), 0.0);
  }
  auto report = gradient_check(store, [&](Graph& g2) {
    Var x = embed(g2, ids, table);
    return ops::sum(ops::mul(x, x));
  });
  EXPECT_LT(report.worst, 1e-6);
}

TEST(Lstm, ZeroWeightsAndInputsGiveZeros) {
  EncoderConfig cfg = small_config(3, 2);
  ParamStore store;
  Rng rng(3);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  for (auto& p : store) p->value().fill(0.0);
  Graph g;
  Var out = bilstm_encode(g, g.constant(Tensor({4, 4})), params.aware, cfg, nullptr);
  EXPECT_EQ(out.value().shape(), (Shape{4, 6}));
  for (Real v : out.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, SingleStepHandValue) {
  ParamStore store;
  LstmDirection dir{&store.add("wi", Tensor({1, 4}, 1.0)), &store.add("wh", Tensor({1, 4}, 1.0)),
                    &store.add("b", Tensor({4}, 0.0))};
  Graph g;
  Var h = lstm_direction(g, g.constant(Tensor::matrix({{1.0}})), dir, false);
  // c = sigmoid(1) * tanh(1); h = sigmoid(1) * tanh(c)
  double s = 1.0 / (1.0 + std::exp(-1.0));
  double expected = s * std::tanh(s * std::tanh(1.0));
  EXPECT_NEAR(h.item(), expected, 1e-12);
  EXPECT_NEAR(h.item(), 0.36960635, 1e-8);
}

TEST(Lstm, OutputShape) {
  EncoderConfig cfg = small_config(3, 1);
  ParamStore store;
  Rng rng(4);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  Graph g;
  std::vector<CharId> ids = {2, 3, 4, 5};
  EncodedSentence enc = encode(g, ids, params, cfg, nullptr);
  EXPECT_EQ(enc.aware.value().shape(), (Shape{4, 6}));
  EXPECT_EQ(enc.agnostic.value().shape(), (Shape{4, 6}));
  Graph g2;
  EncodedSentence only = encode(g2, ids, params, cfg, nullptr, false);
  EXPECT_FALSE(only.agnostic.valid());
}

TEST(Lstm, ParameterNamesAndForgetBias) {
  EncoderConfig cfg = small_config(2, 2);
  ParamStore store;
  Rng rng(5);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  EXPECT_NE(store.find("embedding"), nullptr);
  EXPECT_NE(store.find("encoder.agnostic.l1.bwd.w_hidden"), nullptr);
  const Tensor& bias = params.aware.layers[0].forward.bias->value();
  for (std::size_t k = 0; k < bias.size(); ++k) EXPECT_EQ(bias[k], (k >= 2 && k < 4) ? 1.0 : 0.0);
  EXPECT_EQ(params.aware.layers.size(), 2u);
  EXPECT_EQ(params.agnostic.layers[1].forward.w_input->value().shape(), (Shape{4, 8}));
}

TEST(Lstm, ReversalSymmetry) {
  for (std::size_t layers : {1u, 2u}) {
    EncoderConfig cfg = small_config(3, layers);
    ParamStore store;
    Rng rng(6);
    EncoderParams params = EncoderParams::create(store, cfg, rng);
    // Deeper layers read [fwd ; bwd], so their input rows swap halves too.
    ParamStore copies;
    auto mirrored = [&](const LstmDirection& dir, bool swap_halves) {
      Tensor w = dir.w_input->value();
      if (swap_halves) {
        for (std::size_t r = 0; r < 3; ++r) {
          for (std::size_t c = 0; c < w.cols(); ++c) std::swap(w.at(r, c), w.at(r + 3, c));
        }
      }
      LstmDirection out = dir;
      out.w_input = &copies.add(dir.w_input->name() + ".m", w);
      return out;
    };
    BiLstmParams swapped;
    for (std::size_t k = 0; k < params.aware.layers.size(); ++k) {
      const auto& layer = params.aware.layers[k];
      swapped.layers.push_back({mirrored(layer.backward, k > 0), mirrored(layer.forward, k > 0)});
    }

    Tensor x = testing::random_tensor({5, 4}, rng);
    Tensor reversed({5, 4});
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 4; ++c) reversed.at(4 - r, c) = x.at(r, c);
    }
    Graph g;
    Tensor out = bilstm_encode(g, g.constant(x), params.aware, cfg, nullptr).value();
    Tensor rev = bilstm_encode(g, g.constant(reversed), swapped, cfg, nullptr).value();
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_NEAR(rev.at(4 - r, c), out.at(r, c + 3), 1e-12);
        EXPECT_NEAR(rev.at(4 - r, c + 3), out.at(r, c), 1e-12);
      }
    }
  }
}

TEST(Lstm, BranchIsolation) {
  EncoderConfig cfg = small_config(2, 2);
  ParamStore store;
  Rng rng(7);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  std::vector<CharId> ids = {2, 5, 3};
  Graph before;
  Tensor agnostic = encode(before, ids, params, cfg, nullptr).agnostic.value();
  for (auto& p : store) {
    if (p->name().rfind("encoder.aware.", 0) == 0) {
      for (Real& v : p->value().values()) v += 0.5;
    }
  }
  Graph after;
  EncodedSentence enc = encode(after, ids, params, cfg, nullptr);
  EXPECT_EQ(enc.agnostic.value(), agnostic);
}

TEST(Lstm, GradientCheckAllEncoderParameters) {
  EncoderConfig cfg = small_config(2, 2);
  ParamStore store;
  Rng rng(8);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  std::vector<CharId> ids = {2, 7, 4};
  Tensor wa = testing::random_tensor({3, 4}, rng);
  Tensor wb = testing::random_tensor({3, 4}, rng);
  auto report = gradient_check(store, [&](Graph& g) {
    EncodedSentence enc = encode(g, ids, params, cfg, nullptr);
    return ops::add(ops::sum(ops::mul(enc.aware, g.constant(wa))), ops::sum(ops::mul(enc.agnostic, g.constant(wb))));
  });
  EXPECT_EQ(report.params.size(), store.size());
  EXPECT_LT(report.worst, 1e-4) << report.worst_param;
}

TEST(Lstm, DropoutOnlyInTraining) {
  EncoderConfig cfg = small_config(3, 2);
  ParamStore store;
  Rng rng(9);
  EncoderParams params = EncoderParams::create(store, cfg, rng);
  std::vector<CharId> ids = {2, 3, 4, 5, 6};
  Graph a, b, c;
  Tensor eval1 = encode(a, ids, params, cfg, nullptr).aware.value();
  Tensor eval2 = encode(b, ids, params, cfg, nullptr).aware.value();
  EXPECT_EQ(eval1, eval2);
  Rng drop(1);
  Tensor train = encode(c, ids, params, cfg, &drop).aware.value();
  EXPECT_NE(train, eval1);
}

TEST(PretrainedEmbeddings, OverwritesKnownRows) {
  testing::TempDir dir("emb");
  Vocab vocab = Vocab::from_lists(U"ab河", {"LOC"});
  ParamStore store;
  Param& table = store.add("table", Tensor({vocab.num_chars(), 2}));
  {
    std::ofstream out(dir.path() / "vec.txt");
    out << "4 2\n河 0.5 -1\nz 9 9\nab 1 1\na 2 3\n";
  }
  EXPECT_EQ(load_pretrained_embeddings(dir.path() / "vec.txt", vocab, table), 2u);
  EXPECT_EQ(table.value().at(vocab.char_id(U'河'), 1), -1.0);
  EXPECT_EQ(table.value().at(vocab.char_id(U'a'), 0), 2.0);
  EXPECT_EQ(table.value().at(vocab.char_id(U'b'), 0), 0.0);
  {
    std::ofstream out(dir.path() / "bad.txt");
    out << "a 1 2 3\n";
  }
  EXPECT_THROW(load_pretrained_embeddings(dir.path() / "bad.txt", vocab, table), ConfigError);
  EXPECT_THROW(load_pretrained_embeddings(dir.path() / "none.txt", vocab, table), ConfigError);
}

}  // namespace
}  // namespace ricon
