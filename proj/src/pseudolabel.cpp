#include "tsseg/pseudolabel.hpp"

#include <string>

namespace tsseg {

ChangePointEstimate estimate_change(const ScoreSequence& scores, std::size_t left, std::size_t right) {
  if (!(left < right) || right >= scores.rows()) {
    throw InvalidInput("change window [" + std::to_string(left) + ", " + std::to_string(right) +
                       "] invalid for T = " + std::to_string(scores.rows()));
  }
  const std::size_t nc = scores.cols();
  const std::size_t len = right - left + 1;
  // Rows are centred on the window's first row so constant windows give
  // exactly zero energy everywhere.
  auto origin = scores.row(left);
  std::vector<double> sum((len + 1) * nc, 0.0);
  std::vector<double> sq(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    auto row = scores.row(left + i);
    double acc = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double v = row[c] - origin[c];
      sum[(i + 1) * nc + c] = sum[i * nc + c] + v;
      acc += v * v;
    }
    sq[i + 1] = sq[i] + acc;
  }
  // SSE of rows [a, b) = Σ||x||² - ||Σx||² / n
  auto sse = [&](std::size_t a, std::size_t b) {
    const double n = static_cast<double>(b - a);
    double norm = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double s = sum[b * nc + c] - sum[a * nc + c];
      norm += s * s;
    }
    const double e = (sq[b] - sq[a]) - norm / n;
    return e > 0.0 ? e : 0.0;
  };
  ChangePointEstimate best{left, right, left, 0.0};
  bool have = false;
  for (std::size_t k = 1; k < len; ++k) {  // left part is rows [0, k)
    const double e = sse(0, k) + sse(k, len);
    if (!have || e < best.energy) {
      best.change_frame = left + k - 1;
      best.energy = e;
      have = true;
    }
  }
  return best;
}

std::vector<ChangePointEstimate> estimate_changes(const ScoreSequence& scores,
                                                  const TimestampAnnotation& ann) {
  if (ann.num_frames() != scores.rows()) throw InvalidInput("annotation length mismatch");
  std::vector<ChangePointEstimate> out;
  for (std::size_t n = 0; n + 1 < ann.size(); ++n) {
    out.push_back(estimate_change(scores, ann[n].frame, ann[n + 1].frame));
  }
  return out;
}

FrameLabeling generate_pseudo_labels(const ScoreSequence& scores, const TimestampAnnotation& ann) {
  const auto changes = estimate_changes(scores, ann);
  FrameLabeling labels(scores.rows(), ann[ann.size() - 1].label);
  std::size_t begin = 0;
  for (std::size_t n = 0; n < changes.size(); ++n) {
    for (std::size_t t = begin; t <= changes[n].change_frame; ++t) labels[t] = ann[n].label;
    begin = changes[n].change_frame + 1;
  }
  return labels;
}

}  // namespace tsseg
