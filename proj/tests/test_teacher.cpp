#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "tsseg/teacher.hpp"

using namespace tsseg;
using namespace tsseg::testing;

namespace {

ModelParams filled(double v) {
  ModelParams p(tiny_config());
  for (double& x : p.values()) x = v;
  return p;
}

}  // namespace

TEST_CASE("first update copies the student exactly") {
  for (double lambda : {0.1, 0.9, 0.99, 0.999}) {
    auto teacher = TeacherState::from_student(init_params(tiny_config(), 1), lambda);
    const auto student = init_params(tiny_config(), 2);
    ema_update(teacher, student);
    CHECK(teacher.iteration == 1);
    CHECK(teacher.params == student);
  }
}

TEST_CASE("lambda zero tracks the student") {
  auto teacher = TeacherState::from_student(init_params(tiny_config(), 1), 0.0);
  for (int i = 0; i < 5; ++i) {
    const auto student = init_params(tiny_config(), 10 + i);
    ema_update(teacher, student);
    CHECK(teacher.params == student);
  }
}

TEST_CASE("constant student is a fixed point") {
  auto teacher = TeacherState::from_student(filled(-3.0), 0.9);
  const auto student = filled(0.37);
  for (int i = 0; i < 20; ++i) ema_update(teacher, student);
  for (double v : teacher.params.values()) CHECK(std::abs(v - 0.37) < 1e-12);
}

TEST_CASE("switch iteration") {
  CHECK(ema_switch_iteration(0.9) == 10);
  CHECK(ema_switch_iteration(0.99) == 100);
  CHECK(ema_switch_iteration(0.999) == 1000);
  CHECK(ema_switch_iteration(0.0) == 1);
  CHECK(uses_running_average(9, 0.9));
  CHECK_FALSE(uses_running_average(10, 0.9));
  CHECK_THROWS_AS(ema_switch_iteration(1.0), InvalidInput);
}

TEST_CASE("update sequences match a long double recurrence") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double lambda : kLambdaPresets) {
    const std::size_t steps = lambda == 0.999 ? 1000 : 300;
    const ModelConfig cfg = tiny_config();
    const std::size_t probe = 17;  // parameter tracked against the oracle
    auto teacher = TeacherState::from_student(filled(n(rng)), lambda);
    const long double init = teacher.params.values()[probe];
    std::vector<double> seq;
    ModelParams student(cfg);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < steps; ++i) {
      for (double& v : student.values()) v = n(rng);
      seq.push_back(student.values()[probe]);
      lo = std::min(lo, seq.back());
      hi = std::max(hi, seq.back());
      ema_update(teacher, student);
      const double got = teacher.params.values()[probe];
      CHECK(got >= lo);
      CHECK(got <= hi);
    }
    const long double want = oracle::ema_sequence(seq, lambda, init);
    CHECK(std::abs(static_cast<long double>(teacher.params.values()[probe]) - want) < 1e-12L);
  }
}

TEST_CASE("architecture mismatch is rejected") {
  auto teacher = TeacherState::from_student(init_params(tiny_config(), 1), 0.9);
  ModelConfig other = tiny_config();
  other.channel_width = 4;
  CHECK_THROWS_AS(ema_update(teacher, init_params(other, 1)), InvalidInput);
  CHECK_THROWS_AS(TeacherState::from_student(init_params(tiny_config(), 1), 1.5), InvalidInput);
}

TEST_CASE("zero teacher predicts class 0") {
  std::mt19937_64 rng(4);
  const auto t = TeacherState::from_student(ModelParams(tiny_config()), 0.9);
  for (ClassId c : teacher_predict(t, random_features(rng, 30, 4))) CHECK(c == 0);
}

TEST_CASE("teacher predictions agree with a row scan") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = init_params(tiny_config(), 50 + rep);
    const auto x = random_features(rng, 40, 4);
    const auto t = TeacherState::from_student(p, 0.99);
    const auto labels = teacher_predict(t, x);
    CHECK(labels == predict_labels(p, x));
    const auto scores = forward(p, x).final_scores();
    for (std::size_t f = 0; f < 40; ++f) {
      ClassId best = 0;
      for (std::size_t c = 1; c < scores.cols(); ++c)
        if (scores(f, c) > scores(f, best)) best = static_cast<ClassId>(c);
      CHECK(labels[f] == best);
    }
  }
}

TEST_CASE("argmax is invariant to per-row shifts") {
  std::mt19937_64 rng(6);
  auto m = random_matrix(rng, 50, 5);
  const auto a = argmax_rows(softmax_rows(m).values());
  for (std::size_t t = 0; t < 50; ++t)
    for (std::size_t c = 0; c < 5; ++c) m(t, c) += static_cast<double>(t) * 0.5;
  CHECK(argmax_rows(softmax_rows(m).values()) == a);
}
