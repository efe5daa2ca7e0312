#pragma once

#include <cstdint>

#include "tsseg/core.hpp"
#include "tsseg/tcn.hpp"

namespace tsseg {

/// EMA copy of the student's weights plus its update counter.
struct TeacherState {
  ModelParams params;
  std::uint64_t iteration = 0;
  double lambda = 0.9;

  /// Starts from a copy of `student` with no updates applied.
  static TeacherState from_student(const ModelParams& student, double lambda);
};

/// Decay presets used for short, medium and long training sets.
inline constexpr double kLambdaPresets[] = {0.9, 0.99, 0.999};

/// True when update number `i` (1-based) uses the running arithmetic mean,
/// i.e. when 1 - 1/i < lambda.
bool uses_running_average(std::uint64_t i, double lambda);

/// First update index that takes the EMA branch.
std::uint64_t ema_switch_iteration(double lambda);

/// Increments the counter to i, then blends the student in:
///   running mean  θ̄ = (1 - 1/i)·θ̄ + (1/i)·θ   while 1 - 1/i < λ
///   EMA           θ̄ = λ·θ̄ + (1 - λ)·θ         afterwards.
/// Throws InvalidInput on a config mismatch or λ outside [0, 1).
void ema_update(TeacherState& teacher, const ModelParams& student);

/// Per-frame argmax of the final-stage softmax (lowest class id on ties).
FrameLabeling teacher_predict(const TeacherState& teacher, const FeatureSequence& input);

/// Same inference rule for an arbitrary parameter set.
FrameLabeling predict_labels(const ModelParams& params, const FeatureSequence& input);

}  // namespace tsseg
