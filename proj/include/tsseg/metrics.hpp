#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsseg/core.hpp"

namespace tsseg {

inline constexpr double kDefaultIouThresholds[] = {0.10, 0.25, 0.50};

struct F1Result {
  double threshold = 0.0;
  double f1 = 0.0;  // percentage
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  double acc = 0.0;
  double edit = 0.0;
  std::vector<F1Result> f1;  // one entry per threshold, ascending

  /// "acc,edit,f1@10,f1@25,f1@50" with the header from csv_header().
  std::string csv_row() const;
  static std::string csv_header();
  double f1_at(double threshold) const;
};

/// 100 · matching frames / T. Throws InvalidInput on length mismatch or empty input.
double framewise_accuracy(std::span<const ClassId> pred, std::span<const ClassId> gt);

/// Levenshtein distance between two class sequences, unit costs.
std::size_t levenshtein(std::span<const ClassId> a, std::span<const ClassId> b);

/// 100 · (1 - lev(pred classes, gt classes) / max(len)). Durations are ignored.
double edit_score(std::span<const Segment> pred, std::span<const Segment> gt);

/// Greedy matching in predicted order: each predicted segment takes the
/// unmatched same-class ground-truth segment of highest IoU and is a TP when
/// that IoU reaches `threshold`.
F1Result f1_at_iou(std::span<const Segment> pred, std::span<const Segment> gt, double threshold);

/// Inclusive-interval IoU of two segments (labels ignored).
double segment_iou(const Segment& a, const Segment& b);

struct LabeledVideo {
  FrameLabeling pred;
  FrameLabeling gt;
};

/// Pooled accuracy, per-video mean Edit, F1 from pooled TP/FP/FN counts.
EvalReport evaluate_dataset(std::span<const LabeledVideo> videos,
                            std::span<const double> thresholds = kDefaultIouThresholds);

}  // namespace tsseg
