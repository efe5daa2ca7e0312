#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tsseg/core.hpp"

using namespace tsseg;

TEST_CASE("softmax of a zero row is uniform") {
  const auto p = softmax_rows(MatrixD(1, 3, {0.0, 0.0, 0.0}));
  for (std::size_t c = 0; c < 3; ++c) CHECK(p(0, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax is shift invariant") {
  const double k = 2.5;
  for (double c : {-1000.0, -3.0, 0.0, 7.0, 1e4}) {
    const auto a = softmax_rows(MatrixD(1, 3, {c, c + k, c}));
    const auto b = softmax_rows(MatrixD(1, 3, {0.0, k, 0.0}));
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a(0, j) - b(0, j)) < 1e-12);
  }
}

TEST_CASE("softmax of [1,2,3] matches a long-double oracle") {
  const auto p = softmax_rows(MatrixD(1, 3, {1.0, 2.0, 3.0}));
  long double e[3] = {expl(1.0L), expl(2.0L), expl(3.0L)};
  const long double z = e[0] + e[1] + e[2];
  for (int c = 0; c < 3; ++c) CHECK(std::abs(p(0, c) - static_cast<double>(e[c] / z)) < 1e-12);
}

TEST_CASE("softmax rows sum to one for extreme scores") {
  std::mt19937_64 rng(3);
  auto m = testing::random_matrix(rng, 50, 6, 1e4);
  m(0, 0) = 1e4;
  m(0, 1) = -1e4;
  const auto p = softmax_rows(m);
  for (std::size_t t = 0; t < p.num_frames(); ++t) {
    double s = 0.0;
    for (double v : p.row(t)) {
      CHECK((v >= 0.0 && v <= 1.0));
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("softmax rejects non-finite input") {
  CHECK_THROWS_AS(softmax_rows(MatrixD(1, 2, {0.0, std::nan("")})), InvalidInput);
  CHECK_THROWS_AS(softmax_rows(MatrixD(1, 2, {0.0, INFINITY})), InvalidInput);
}

TEST_CASE("segments_from_frames run-length examples") {
  const FrameLabeling a{0, 0, 1, 1, 1, 0};
  CHECK(segments_from_frames(a) == SegmentLabeling{{0, 0, 1}, {1, 2, 4}, {0, 5, 5}});
  const FrameLabeling b{2, 2, 2};
  CHECK(segments_from_frames(b) == SegmentLabeling{{2, 0, 2}});
  CHECK_THROWS_AS(segments_from_frames(FrameLabeling{}), InvalidInput);
}

TEST_CASE("frames/segments round trip on random labelings") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<ClassId> cls(0, 3);
  for (int rep = 0; rep < 20; ++rep) {
    FrameLabeling labels(1000);
    for (auto& l : labels) l = rng() % 4 == 0 ? cls(rng) : (rng() % 2 ? 1 : 2);
    const auto segs = segments_from_frames(labels);
    CHECK(frames_from_segments(segs, labels.size()) == labels);
    CHECK(segments_from_frames(frames_from_segments(segs, labels.size())) == segs);
  }
}

TEST_CASE("frames_from_segments rejects non-canonical input") {
  CHECK(frames_from_segments(SegmentLabeling{{1, 0, 4}}, 5) == FrameLabeling{1, 1, 1, 1, 1});
  CHECK_THROWS_AS(frames_from_segments(SegmentLabeling{{0, 0, 1}, {0, 2, 3}}, 4), InvalidInput);
  CHECK_THROWS_AS(frames_from_segments(SegmentLabeling{{0, 0, 1}, {1, 3, 3}}, 4), InvalidInput);
  CHECK_THROWS_AS(frames_from_segments(SegmentLabeling{{0, 0, 1}, {1, 1, 3}}, 4), InvalidInput);
  CHECK_THROWS_AS(frames_from_segments(SegmentLabeling{{0, 0, 2}}, 4), InvalidInput);
}

TEST_CASE("annotation invariants") {
  CHECK_NOTHROW(TimestampAnnotation({{0, 1}, {5, 0}}, 10));
  CHECK_THROWS_AS(TimestampAnnotation({}, 10), InvalidInput);
  CHECK_THROWS_AS(TimestampAnnotation({{5, 1}, {5, 0}}, 10), InvalidInput);
  CHECK_THROWS_AS(TimestampAnnotation({{6, 1}, {5, 0}}, 10), InvalidInput);
  CHECK_THROWS_AS(TimestampAnnotation({{1, 1}, {5, 1}}, 10), InvalidInput);
  CHECK_THROWS_AS(TimestampAnnotation({{10, 1}}, 10), InvalidInput);
  const TimestampAnnotation ann({{0, 1}, {5, 2}}, 10);
  CHECK_NOTHROW(ann.check_classes(3));
  CHECK_THROWS_AS(ann.check_classes(2), InvalidInput);
}

TEST_CASE("feature sequence validation") {
  CHECK_THROWS_AS(FeatureSequence(MatrixF(0, 3)), InvalidInput);
  CHECK_THROWS_AS(FeatureSequence(MatrixF(1, 1, {NAN})), InvalidInput);
  const FeatureSequence f(MatrixF(2, 3, 1.0f));
  CHECK(f.num_frames() == 2);
  CHECK(f.feature_dim() == 3);
}

TEST_CASE("argmax ties go to the lowest class") {
  const MatrixD m(2, 3, {0.2, 0.4, 0.4, 1.0, 1.0, 1.0});
  CHECK(argmax_rows(m) == FrameLabeling{1, 0});
}
