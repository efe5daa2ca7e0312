#pragma once

// Stamp-to-stamp pseudo labels: between each pair of consecutive annotated
// frames, place one change point at the split that minimises the two-sided
// within-segment squared deviation of the score rows from their side means.

#include <vector>

#include "tsseg/core.hpp"

namespace tsseg {

struct ChangePointEstimate {
  std::size_t left_stamp = 0;   // frame of the left annotated stamp
  std::size_t right_stamp = 0;  // frame of the right annotated stamp
  std::size_t change_frame = 0; // last frame of the left instance, in [left, right)
  double energy = 0.0;
};

/// E(t) = Σ_{i=left..t} ||s_i - μ_L||² + Σ_{i=t+1..right} ||s_i - μ_R||²,
/// minimised over t in [left, right - 1] via prefix sums; ties go to the
/// lowest t. Throws InvalidInput unless left < right < T.
ChangePointEstimate estimate_change(const ScoreSequence& scores, std::size_t left, std::size_t right);

/// Every change point of the annotation, in stamp order.
std::vector<ChangePointEstimate> estimate_changes(const ScoreSequence& scores,
                                                  const TimestampAnnotation& ann);

/// Frames up to and including each change point take the left stamp's class;
/// frames before the first stamp take its class, frames after the last take
/// the last stamp's class.
FrameLabeling generate_pseudo_labels(const ScoreSequence& scores, const TimestampAnnotation& ann);

}  // namespace tsseg
