#pragma once

// Training losses over softmax probabilities. Every loss returns its scalar
// value and the gradient w.r.t. the raw scores that produced the
// probabilities (the softmax Jacobian is folded in). Logarithms always see
// max(p, kProbFloor).

#include <span>
#include <vector>

#include "tsseg/core.hpp"

namespace tsseg {

enum class Smoothing { none, segmental, tmse };

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.0;
  double tau = 1.0;
  double tau_tmse = 4.0;
  Smoothing smoothing = Smoothing::segmental;

  void validate() const;
};

struct LossValue {
  double value = 0.0;
  MatrixD grad_scores;
};

/// Consistency loss; the teacher side is a stop-gradient and its gradient is
/// reported as an explicit all-zero matrix.
struct PairLossValue {
  double value = 0.0;
  MatrixD grad_student;
  MatrixD grad_teacher;
};

/// Mean cross entropy over annotated frames only.
LossValue partial_ce(const ProbSequence& probs, const TimestampAnnotation& ann);

/// Mean cross entropy over all frames against a full labeling.
LossValue pseudo_ce(const ProbSequence& probs, std::span<const ClassId> labels);

/// Clamped absolute log-ratio of the annotated class's probability between
/// consecutive frames, accumulated per stamp over the window
/// (t_{n-1}, t_{n+1}] and normalised by the frames strictly between the two
/// flanking stamps. The first window opens at frame 0 and the last closes at
/// T-1; those two use their own frame count as normaliser.
LossValue segmental_smooth(const ProbSequence& probs, const TimestampAnnotation& ann, double tau);

/// Frames and normaliser of one smoothing window; δ is summed for t in
/// [first, last] with first >= 1.
struct SmoothingWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  double normaliser = 1.0;
  ClassId label = 0;
};
std::vector<SmoothingWindow> smoothing_windows(const TimestampAnnotation& ann);

/// Truncated MSE over every class and every consecutive frame pair, averaged
/// over the (T-1)·N_c terms.
LossValue tmse(const ProbSequence& probs, double tau_tmse);

/// (1/T) Σ_t ||student_t - teacher_t||².
PairLossValue consistency_mse(const ProbSequence& student, const ProbSequence& teacher);

struct AggregateLoss {
  double total = 0.0;
  double classification = 0.0;  // summed over stages
  double smoothing = 0.0;       // summed over stages, unweighted
  double consistency = 0.0;     // final stage only, unweighted
  std::vector<MatrixD> stage_grads;
};

/// Σ_stages (partial_ce + α·smoothing).
AggregateLoss warmup_total(std::span<const ProbSequence> stage_probs, const TimestampAnnotation& ann,
                           const LossWeights& weights);

/// Σ_stages (pseudo_ce + α·smoothing) + β·consistency(final student, teacher).
/// Pass `teacher_final == nullptr` to drop the consistency term.
AggregateLoss meanteacher_total(std::span<const ProbSequence> stage_probs,
                                const ProbSequence* teacher_final, std::span<const ClassId> pseudo,
                                const TimestampAnnotation& ann, const LossWeights& weights);

}  // namespace tsseg
