#include "tsseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsseg {

void LossWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0) throw InvalidInput("loss weights must be non-negative");
  if (!(tau > 0.0) || !(tau_tmse > 0.0)) throw InvalidInput("clamp thresholds must be positive");
}

namespace {

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

// Adds coef · ∂log(max(p_c, floor))/∂scores at frame t into grad.
void add_dlog(const ProbSequence& probs, std::size_t t, std::size_t c, double coef, MatrixD& grad) {
  if (probs(t, c) < kProbFloor) return;
  auto row = probs.row(t);
  auto g = grad.row(t);
  for (std::size_t j = 0; j < row.size(); ++j) g[j] -= coef * row[j];
  g[c] += coef;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossValue partial_ce(const ProbSequence& probs, const TimestampAnnotation& ann) {
  const std::size_t nc = probs.num_classes();
  if (ann.num_frames() != probs.num_frames()) throw InvalidInput("annotation length mismatch");
  ann.check_classes(nc);
  LossValue out{0.0, MatrixD(probs.num_frames(), nc)};
  const double inv_n = 1.0 / static_cast<double>(ann.size());
  for (const auto& s : ann) {
    const auto c = static_cast<std::size_t>(s.label);
    out.value -= inv_n * safe_log(probs(s.frame, c));
    add_dlog(probs, s.frame, c, -inv_n, out.grad_scores);
  }
  return out;
}

LossValue pseudo_ce(const ProbSequence& probs, std::span<const ClassId> labels) {
  const std::size_t t_len = probs.num_frames();
  const std::size_t nc = probs.num_classes();
  if (labels.size() != t_len) {
    throw InvalidInput("label length " + std::to_string(labels.size()) + " != T " +
                       std::to_string(t_len));
  }
  LossValue out{0.0, MatrixD(t_len, nc)};
  const double inv_t = 1.0 / static_cast<double>(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    if (labels[t] < 0 || static_cast<std::size_t>(labels[t]) >= nc) {
      throw InvalidInput("frame label outside class range");
    }
    const auto c = static_cast<std::size_t>(labels[t]);
    out.value -= inv_t * safe_log(probs(t, c));
    add_dlog(probs, t, c, -inv_t, out.grad_scores);
  }
  return out;
}

std::vector<SmoothingWindow> smoothing_windows(const TimestampAnnotation& ann) {
  const std::size_t n = ann.size();
  const std::size_t t_len = ann.num_frames();
  std::vector<SmoothingWindow> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Window covers frames (prev, next]; prev = -1 and next = T-1 at the ends.
    const bool first = i == 0;
    const bool last = i + 1 == n;
    const std::size_t lo = first ? 0 : ann[i - 1].frame + 1;
    const std::size_t hi = last ? t_len - 1 : ann[i + 1].frame;
    SmoothingWindow w;
    w.label = ann[i].label;
    w.first = std::max<std::size_t>(lo, 1);
    w.last = hi;
    if (first || last) {
      w.normaliser = static_cast<double>(hi - lo + 1);
    } else {
      w.normaliser = static_cast<double>(ann[i + 1].frame - ann[i - 1].frame - 1);
    }
    out.push_back(w);
  }
  return out;
}

LossValue segmental_smooth(const ProbSequence& probs, const TimestampAnnotation& ann, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  if (ann.num_frames() != probs.num_frames()) throw InvalidInput("annotation length mismatch");
  ann.check_classes(probs.num_classes());
  LossValue out{0.0, MatrixD(probs.num_frames(), probs.num_classes())};
  for (const auto& w : smoothing_windows(ann)) {
    const auto c = static_cast<std::size_t>(w.label);
    const double inv = 1.0 / w.normaliser;
    for (std::size_t t = w.first; t <= w.last && w.first <= w.last; ++t) {
      const double diff = safe_log(probs(t, c)) - safe_log(probs(t - 1, c));
      const double mag = std::abs(diff);
      if (mag >= tau) {
        out.value += inv * tau;
        continue;
      }
      out.value += inv * mag;
      const double coef = inv * sign(diff);
      if (coef == 0.0) continue;
      add_dlog(probs, t, c, coef, out.grad_scores);
      add_dlog(probs, t - 1, c, -coef, out.grad_scores);
    }
  }
  return out;
}

LossValue tmse(const ProbSequence& probs, double tau_tmse) {
  if (!(tau_tmse > 0.0)) throw InvalidInput("tau_tmse must be positive");
  const std::size_t t_len = probs.num_frames();
  const std::size_t nc = probs.num_classes();
  if (t_len < 2) throw InvalidInput("tmse needs at least two frames");
  LossValue out{0.0, MatrixD(t_len, nc)};
  const double inv = 1.0 / static_cast<double>((t_len - 1) * nc);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double diff = safe_log(probs(t, c)) - safe_log(probs(t - 1, c));
      if (std::abs(diff) >= tau_tmse) {
        out.value += inv * tau_tmse * tau_tmse;
        continue;
      }
      out.value += inv * diff * diff;
      const double coef = 2.0 * inv * diff;
      add_dlog(probs, t, c, coef, out.grad_scores);
      add_dlog(probs, t - 1, c, -coef, out.grad_scores);
    }
  }
  return out;
}

PairLossValue consistency_mse(const ProbSequence& student, const ProbSequence& teacher) {
  const std::size_t t_len = student.num_frames();
  const std::size_t nc = student.num_classes();
  if (teacher.num_frames() != t_len || teacher.num_classes() != nc) {
    throw InvalidInput("student/teacher probability shapes differ");
  }
  PairLossValue out{0.0, MatrixD(t_len, nc), MatrixD(t_len, nc)};
  const double inv_t = 1.0 / static_cast<double>(t_len);
  std::vector<double> dp(nc);
  for (std::size_t t = 0; t < t_len; ++t) {
    auto ps = student.row(t);
    auto pt = teacher.row(t);
    double dot = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double d = ps[c] - pt[c];
      out.value += inv_t * d * d;
      dp[c] = 2.0 * inv_t * d;
      dot += ps[c] * dp[c];
    }
    auto g = out.grad_student.row(t);
    for (std::size_t c = 0; c < nc; ++c) g[c] = ps[c] * (dp[c] - dot);
  }
  return out;
}

namespace {

void accumulate(MatrixD& dst, const MatrixD& src, double scale) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += scale * src.data()[i];
}

double add_smoothing(AggregateLoss& agg, MatrixD& grad, const ProbSequence& probs,
                     const TimestampAnnotation& ann, const LossWeights& weights) {
  if (weights.smoothing == Smoothing::none || weights.alpha == 0.0) return 0.0;
  LossValue smo = weights.smoothing == Smoothing::segmental
                      ? segmental_smooth(probs, ann, weights.tau)
                      : tmse(probs, weights.tau_tmse);
  agg.smoothing += smo.value;
  accumulate(grad, smo.grad_scores, weights.alpha);
  return weights.alpha * smo.value;
}

}  // namespace

AggregateLoss warmup_total(std::span<const ProbSequence> stage_probs, const TimestampAnnotation& ann,
                           const LossWeights& weights) {
  weights.validate();
  AggregateLoss agg;
  for (const auto& probs : stage_probs) {
    LossValue cls = partial_ce(probs, ann);
    agg.classification += cls.value;
    agg.total += cls.value;
    agg.total += add_smoothing(agg, cls.grad_scores, probs, ann, weights);
    agg.stage_grads.push_back(std::move(cls.grad_scores));
  }
  return agg;
}

AggregateLoss meanteacher_total(std::span<const ProbSequence> stage_probs,
                                const ProbSequence* teacher_final, std::span<const ClassId> pseudo,
                                const TimestampAnnotation& ann, const LossWeights& weights) {
  weights.validate();
  if (stage_probs.empty()) throw InvalidInput("no stage outputs");
  AggregateLoss agg;
  for (const auto& probs : stage_probs) {
    LossValue cls = pseudo_ce(probs, pseudo);
    agg.classification += cls.value;
    agg.total += cls.value;
    agg.total += add_smoothing(agg, cls.grad_scores, probs, ann, weights);
    agg.stage_grads.push_back(std::move(cls.grad_scores));
  }
  if (teacher_final != nullptr) {
    PairLossValue cons = consistency_mse(stage_probs.back(), *teacher_final);
    agg.consistency = cons.value;
    agg.total += weights.beta * cons.value;
    accumulate(agg.stage_grads.back(), cons.grad_student, weights.beta);
  }
  return agg;
}

}  // namespace tsseg
