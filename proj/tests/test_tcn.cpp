#include <filesystem>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tsseg/checkpoint.hpp"
#include "tsseg/tcn.hpp"

using namespace tsseg;
using namespace tsseg::testing;

namespace {

double linear_loss(const ForwardTrace& tr, const std::vector<MatrixD>& g) {
  double l = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s)
    for (std::size_t i = 0; i < g[s].size(); ++i) l += g[s].data()[i] * tr.stages[s].scores.data()[i];
  return l;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = tiny_config();
  CHECK_NOTHROW(c.validate());
  c.num_stages = 1;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = tiny_config();
  c.first_stage_kernels = {3, 4};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = tiny_config();
  c.channel_width = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("layout tensor count and sizes") {
  const ModelConfig c = tiny_config();
  const ParamLayout layout(c);
  // stage 1: 2 branches × (2 + 4·3) + 2, stage 2: 1 branch × (2 + 4·3) + 2
  CHECK(layout.tensors().size() == 2 * 14 + 2 + 14 + 2);
  std::size_t total = 0;
  for (const auto& t : layout.tensors()) total += t.size;
  CHECK(total == layout.total_size());
  CHECK(layout.stages()[0].branches[1].layers[2].dilation == 4);
  CHECK(layout.stages()[0].branches[1].kernel == 5);
  CHECK(layout.stages()[1].in_dim == 3);
}

TEST_CASE("init is deterministic, seed dependent and fan-in bounded") {
  const ModelConfig c = tiny_config();
  const auto a = init_params(c, 0);
  const auto b = init_params(c, 0);
  const auto d = init_params(c, 1);
  CHECK(a == b);
  CHECK_FALSE(a == d);
  for (const auto& t : a.layout().tensors()) {
    std::size_t fan_in = 1;
    for (std::size_t i = 0; i + 1 < t.dims.size(); ++i) fan_in *= t.dims[i];
    const double bound = t.dims.size() == 1 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size; ++i) CHECK(std::abs(a.values()[t.offset + i]) <= bound);
  }
}

TEST_CASE("forward preserves T at every stage, including T = 1") {
  std::mt19937_64 rng(4);
  const auto p = init_params(tiny_config(), 2);
  for (std::size_t t : {1, 2, 5, 20, 67}) {
    const auto tr = forward(p, random_features(rng, t, 4));
    REQUIRE(tr.stages.size() == 2);
    for (const auto& st : tr.stages) {
      CHECK(st.scores.rows() == t);
      CHECK(st.scores.cols() == 3);
    }
  }
}

TEST_CASE("zero parameters give zero scores") {
  std::mt19937_64 rng(4);
  const ModelParams p(tiny_config());
  const auto tr = forward(p, random_features(rng, 13, 4));
  for (const auto& st : tr.stages)
    for (double v : st.scores.flat()) CHECK(v == 0.0);
}

TEST_CASE("forward rejects a feature dimension mismatch") {
  std::mt19937_64 rng(4);
  const auto p = init_params(tiny_config(), 2);
  CHECK_THROWS_AS(forward(p, random_features(rng, 10, 5)), InvalidInput);
}

TEST_CASE("forward is bitwise deterministic") {
  std::mt19937_64 rng(9);
  const auto p = init_params(tiny_config(), 3);
  const auto x = random_features(rng, 30, 4);
  CHECK(forward(p, x).final_scores() == forward(p, x).final_scores());
}

TEST_CASE("dilated receptive field of the kernel-3 branch") {
  std::mt19937_64 rng(21);
  ModelConfig c = tiny_config();
  c.first_stage_layers = 4;
  const auto p = init_params(c, 5);
  const std::size_t t_len = 64, t0 = 30;
  const auto x = random_features(rng, t_len, 4);
  MatrixF bumped = x.values();
  for (std::size_t j = 0; j < 4; ++j) bumped(t0, j) += 0.5f;
  const auto a = forward(p, x);
  const auto b = forward(p, FeatureSequence(bumped));
  const auto& ha = a.stages[0].branches[0].hidden;
  const auto& hb = b.stages[0].branches[0].hidden;
  std::size_t reach = 0;
  for (std::size_t l = 0; l < c.first_stage_layers; ++l) {
    reach += std::size_t{1} << l;  // (k - 1) / 2 = 1
    bool changed_at_edge = false;
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t dist = t > t0 ? t - t0 : t0 - t;
      bool differs = false;
      for (std::size_t ch = 0; ch < c.channel_width; ++ch) differs |= ha[l + 1](t, ch) != hb[l + 1](t, ch);
      if (dist > reach) CHECK_FALSE(differs);
      if (dist == reach) changed_at_edge |= differs;
    }
    CHECK(changed_at_edge);
  }
}

TEST_CASE("backward is linear in the upstream gradient") {
  std::mt19937_64 rng(8);
  const auto p = init_params(tiny_config(), 1);
  const auto tr = forward(p, random_features(rng, 20, 4));
  std::vector<MatrixD> zero{MatrixD(20, 3), MatrixD(20, 3)};
  for (double g : backward(p, tr, zero).values) CHECK(g == 0.0);
  std::vector<MatrixD> g1{random_matrix(rng, 20, 3), random_matrix(rng, 20, 3)};
  std::vector<MatrixD> g2 = g1;
  for (auto& m : g2)
    for (double& v : m.flat()) v *= 2.0;
  const auto a = backward(p, tr, g1);
  const auto b = backward(p, tr, g2);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i] == doctest::Approx(2.0 * a.values[i]).epsilon(1e-12));
}

TEST_CASE("backward rejects mis-shaped gradients") {
  std::mt19937_64 rng(8);
  const auto p = init_params(tiny_config(), 1);
  const auto tr = forward(p, random_features(rng, 20, 4));
  std::vector<MatrixD> wrong{MatrixD(20, 3)};
  CHECK_THROWS_AS(backward(p, tr, wrong), InvalidInput);
  std::vector<MatrixD> shape{MatrixD(19, 3), MatrixD(20, 3)};
  CHECK_THROWS_AS(backward(p, tr, shape), InvalidInput);
}

TEST_CASE("backward matches central finite differences") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 3; ++rep) {
    auto p = init_params(tiny_config(), 100 + rep);
    // non-zero biases so every tensor's gradient is exercised away from symmetry
    for (double& v : p.values()) v += 0.05 * std::normal_distribution<double>(0, 1)(rng);
    const auto x = random_features(rng, 20, 4);
    const std::vector<MatrixD> g{random_matrix(rng, 20, 3), random_matrix(rng, 20, 3)};
    const auto grads = backward(p, forward(p, x), g);
    const auto res = check_gradient(
        p, grads.values, [&](const ModelParams& q) { return linear_loss(forward(q, x), g); },
        [&](const ModelParams& q) { return relu_signature(forward(q, x)); });
    CAPTURE(res.skipped);
    CHECK(res.checked > p.size() * 9 / 10);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto p = round_to_f32(init_params(tiny_config(), 6));
  const std::string path = (std::filesystem::temp_directory_path() / "tsseg_tcn_roundtrip.ckpt").string();
  write_model_checkpoint(path, p);
  CHECK(read_model_checkpoint(path) == p);
  CHECK(read_any_checkpoint(path) == p);
  CHECK_THROWS_AS(read_teacher_checkpoint(path), DataError);
}

TEST_CASE("truncated checkpoint is reported with its path") {
  const auto p = init_params(tiny_config(), 6);
  const std::string path = (std::filesystem::temp_directory_path() / "tsseg_tcn_truncated.ckpt").string();
  write_model_checkpoint(path, p);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 7);
  try {
    read_model_checkpoint(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}
