#include "tsseg/teacher.hpp"

#include "tsseg/simd/kernels.hpp"

namespace tsseg {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in [0, 1)");
}

}  // namespace

TeacherState TeacherState::from_student(const ModelParams& student, double lambda) {
  check_lambda(lambda);
  return TeacherState{student, 0, lambda};
}

bool uses_running_average(std::uint64_t i, double lambda) {
  return 1.0 - 1.0 / static_cast<double>(i) < lambda;
}

std::uint64_t ema_switch_iteration(double lambda) {
  check_lambda(lambda);
  std::uint64_t i = 1;
  while (uses_running_average(i, lambda)) ++i;
  return i;
}

void ema_update(TeacherState& teacher, const ModelParams& student) {
  check_lambda(teacher.lambda);
  if (!(teacher.params.config() == student.config())) {
    throw InvalidInput("teacher and student architectures differ");
  }
  const std::uint64_t i = ++teacher.iteration;
  double keep = teacher.lambda;
  double take = 1.0 - teacher.lambda;
  if (uses_running_average(i, teacher.lambda)) {
    keep = 1.0 - 1.0 / static_cast<double>(i);
    take = 1.0 / static_cast<double>(i);
  }
  auto dst = teacher.params.values();
  auto src = student.values();
  simd::active().axpby(dst.size(), take, src.data(), keep, dst.data());
}

FrameLabeling predict_labels(const ModelParams& params, const FeatureSequence& input) {
  const ForwardTrace trace = forward(params, input);
  return argmax_rows(trace.stages.back().probs);
}

FrameLabeling teacher_predict(const TeacherState& teacher, const FeatureSequence& input) {
  return predict_labels(teacher.params, input);
}

}  // namespace tsseg
