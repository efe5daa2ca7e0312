#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tsseg/error.hpp"
#include "tsseg/matrix.hpp"

namespace tsseg {

using ClassId = std::int32_t;

/// Probabilities are clamped to this floor before any logarithm.
inline constexpr double kProbFloor = 1e-12;

/// Per-frame input features, T × D, stored as f32.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  /// Throws InvalidInput on an empty shape or non-finite values.
  explicit FeatureSequence(MatrixF values);

  std::size_t num_frames() const { return values_.rows(); }
  std::size_t feature_dim() const { return values_.cols(); }
  const MatrixF& values() const { return values_; }

  bool operator==(const FeatureSequence&) const = default;

 private:
  MatrixF values_;
};

struct Timestamp {
  std::size_t frame = 0;
  ClassId label = 0;
  bool operator==(const Timestamp&) const = default;
};

/// One annotated frame per action instance, sorted by time.
class TimestampAnnotation {
 public:
  TimestampAnnotation() = default;
  /// Validates 1 <= N <= T, strictly increasing frames inside [0, T) and
  /// distinct labels on adjacent stamps.
  TimestampAnnotation(std::vector<Timestamp> stamps, std::size_t num_frames);

  std::size_t size() const { return stamps_.size(); }
  std::size_t num_frames() const { return num_frames_; }
  const Timestamp& operator[](std::size_t n) const { return stamps_[n]; }
  std::span<const Timestamp> stamps() const { return stamps_; }
  auto begin() const { return stamps_.begin(); }
  auto end() const { return stamps_.end(); }

  /// Throws InvalidInput if any label is outside [0, num_classes).
  void check_classes(std::size_t num_classes) const;

  bool operator==(const TimestampAnnotation&) const = default;

 private:
  std::vector<Timestamp> stamps_;
  std::size_t num_frames_ = 0;
};

/// Raw per-frame class scores, T × N_c.
using ScoreSequence = MatrixD;

/// Row-stochastic softmax output, T × N_c, every entry strictly positive.
class ProbSequence {
 public:
  ProbSequence() = default;
  /// Validates positivity and unit row sums (tolerance 1e-9).
  static ProbSequence from_values(MatrixD values);

  std::size_t num_frames() const { return values_.rows(); }
  std::size_t num_classes() const { return values_.cols(); }
  double operator()(std::size_t t, std::size_t c) const { return values_(t, c); }
  std::span<const double> row(std::size_t t) const { return values_.row(t); }
  const MatrixD& values() const { return values_; }

 private:
  friend ProbSequence softmax_rows(const ScoreSequence&);
  explicit ProbSequence(MatrixD values) : values_(std::move(values)) {}
  MatrixD values_;
};

using FrameLabeling = std::vector<ClassId>;

struct Segment {
  ClassId label = 0;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive
  std::size_t length() const { return end - start + 1; }
  bool operator==(const Segment&) const = default;
};

using SegmentLabeling = std::vector<Segment>;

/// Row-wise softmax with max subtraction. Throws InvalidInput on non-finite scores.
ProbSequence softmax_rows(const ScoreSequence& scores);

/// Softmax of a single row written into `out` (same length as `scores`).
void softmax_row(std::span<const double> scores, std::span<double> out);

/// Maximal runs of equal labels. Throws InvalidInput on empty input.
SegmentLabeling segments_from_frames(std::span<const ClassId> labels);

/// Expands a canonical segmentation (tiles [0, T), adjacent labels differ).
FrameLabeling frames_from_segments(std::span<const Segment> segments, std::size_t num_frames);

/// Per-row argmax, ties to the lowest class id.
FrameLabeling argmax_rows(const MatrixD& values);

}  // namespace tsseg
