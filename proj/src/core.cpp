#include "tsseg/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsseg {

FeatureSequence::FeatureSequence(MatrixF values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw InvalidInput("feature sequence must have T >= 1 and D >= 1");
  }
  for (float v : values_.flat()) {
    if (!std::isfinite(v)) throw InvalidInput("feature sequence contains a non-finite value");
  }
}

TimestampAnnotation::TimestampAnnotation(std::vector<Timestamp> stamps, std::size_t num_frames)
    : stamps_(std::move(stamps)), num_frames_(num_frames) {
  if (stamps_.empty()) throw InvalidInput("annotation needs at least one timestamp");
  if (stamps_.size() > num_frames_) throw InvalidInput("more timestamps than frames");
  for (std::size_t n = 0; n < stamps_.size(); ++n) {
    const auto& s = stamps_[n];
    if (s.frame >= num_frames_) {
      throw InvalidInput("timestamp frame " + std::to_string(s.frame) + " outside [0, " +
                         std::to_string(num_frames_) + ")");
    }
    if (s.label < 0) throw InvalidInput("negative class id in annotation");
    if (n > 0) {
      if (s.frame <= stamps_[n - 1].frame) throw InvalidInput("timestamps must be strictly increasing");
      if (s.label == stamps_[n - 1].label) {
        throw InvalidInput("adjacent timestamps share class " + std::to_string(s.label));
      }
    }
  }
}

void TimestampAnnotation::check_classes(std::size_t num_classes) const {
  for (const auto& s : stamps_) {
    if (static_cast<std::size_t>(s.label) >= num_classes) {
      throw InvalidInput("timestamp class " + std::to_string(s.label) + " outside [0, " +
                         std::to_string(num_classes) + ")");
    }
  }
}

ProbSequence ProbSequence::from_values(MatrixD values) {
  for (std::size_t t = 0; t < values.rows(); ++t) {
    double sum = 0.0;
    for (double p : values.row(t)) {
      if (!(p > 0.0) || p > 1.0) throw InvalidInput("probabilities must lie in (0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("probability row does not sum to 1");
  }
  return ProbSequence(std::move(values));
}

void softmax_row(std::span<const double> scores, std::span<double> out) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    out[c] = std::exp(scores[c] - mx);
    sum += out[c];
  }
  const double inv = 1.0 / sum;
  for (double& v : out) v *= inv;
}

ProbSequence softmax_rows(const ScoreSequence& scores) {
  if (scores.cols() == 0) throw InvalidInput("softmax over zero classes");
  for (double v : scores.flat()) {
    if (!std::isfinite(v)) throw InvalidInput("softmax input contains a non-finite score");
  }
  MatrixD probs(scores.rows(), scores.cols());
  for (std::size_t t = 0; t < scores.rows(); ++t) softmax_row(scores.row(t), probs.row(t));
  return ProbSequence(std::move(probs));
}

SegmentLabeling segments_from_frames(std::span<const ClassId> labels) {
  if (labels.empty()) throw InvalidInput("cannot segment an empty labeling");
  SegmentLabeling segs;
  std::size_t start = 0;
  for (std::size_t t = 1; t <= labels.size(); ++t) {
    if (t == labels.size() || labels[t] != labels[start]) {
      segs.push_back({labels[start], start, t - 1});
      start = t;
    }
  }
  return segs;
}

FrameLabeling frames_from_segments(std::span<const Segment> segments, std::size_t num_frames) {
  FrameLabeling out;
  out.reserve(num_frames);
  std::size_t next = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.start != next || s.end < s.start) throw InvalidInput("segments leave a gap or overlap");
    if (i > 0 && segments[i - 1].label == s.label) {
      throw InvalidInput("adjacent segments share a class (non-canonical segmentation)");
    }
    out.insert(out.end(), s.length(), s.label);
    next = s.end + 1;
  }
  if (next != num_frames) throw InvalidInput("segments do not cover exactly the frame range");
  return out;
}

FrameLabeling argmax_rows(const MatrixD& values) {
  FrameLabeling out(values.rows(), 0);
  for (std::size_t t = 0; t < values.rows(); ++t) {
    auto row = values.row(t);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[t] = static_cast<ClassId>(best);
  }
  return out;
}

}  // namespace tsseg
