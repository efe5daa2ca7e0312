#pragma once

// Two-phase training: a warm-up phase on the annotated frames, then a
// mean-teacher phase in which pseudo labels are regenerated every epoch from
// the student's final-stage scores, the student is trained on them plus a
// consistency term against an EMA teacher, and the teacher is updated after
// every optimizer step. Training is sequential over videos (batch size 1)
// and bitwise reproducible for a fixed seed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsseg/data.hpp"
#include "tsseg/losses.hpp"
#include "tsseg/metrics.hpp"
#include "tsseg/tcn.hpp"
#include "tsseg/teacher.hpp"

namespace tsseg {

enum class Supervision {
  timestamp,  // warm-up on stamps, then the mean-teacher phase
  full,       // every epoch on ground-truth frame labels (reference upper bound)
};

struct TrainConfig {
  std::size_t total_epochs = 50;
  std::size_t warmup_epochs = 30;
  double learning_rate = 5e-4;
  double lr_decay_factor = 0.1;
  std::size_t lr_decay_every = 40;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double lambda = 0.99;
  double alpha = 0.1;
  double tau = 1.0;
  double tau_tmse = 4.0;
  double beta_max = 0.5;
  std::uint64_t seed = 0;
  bool no_teacher = false;
  Smoothing smoothing = Smoothing::segmental;
  Supervision supervision = Supervision::timestamp;
  bool export_pseudo_labels = false;
  bool evaluate_teacher_on_train = true;

  void validate() const;
  std::size_t mean_teacher_epochs() const { return total_epochs - warmup_epochs; }
};

/// lr₀ · factor^⌊epoch / every⌋ with a global 0-based epoch index.
double learning_rate_at(const TrainConfig& cfg, std::size_t epoch);

/// β for 0-based epoch `k` of the mean-teacher phase: beta_max · k / phase_length.
/// k = phase_length (the phase's closing boundary) gives beta_max.
double beta_at(const TrainConfig& cfg, std::size_t k);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  static AdamState zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Throws NumericalError on a non-finite gradient and
/// InvalidInput on a size mismatch.
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamHyper& hyper = {});

enum class Phase { warmup, mean_teacher, full };
const char* phase_name(Phase p);

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

struct EpochRecord {
  std::size_t epoch = 0;
  Phase phase = Phase::warmup;
  double lr = 0.0;
  double beta = 0.0;
  double mean_loss = 0.0;
  double student_train_acc = kNotMeasured;
  double teacher_train_acc = kNotMeasured;
  double pseudo_agreement = kNotMeasured;  // % frames unchanged vs previous epoch
  std::optional<EvalReport> test;

  static std::string csv_header();
  std::string csv_row() const;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
};

struct TrainData {
  std::vector<std::string> class_names;
  std::vector<const Video*> train;
  std::vector<const Video*> test;  // may be empty

  static TrainData from_dataset(const Dataset& ds, const std::string& train_split,
                                const std::string& test_split);
};

struct TrainOptions {
  std::string log_csv;     // appended after every epoch when non-empty
  std::string pseudo_dir;  // per-epoch pseudo-label export when non-empty
  std::function<void(const EpochRecord&)> on_epoch;
};

struct WarmupResult {
  ModelParams student;
  AdamState adam;
  TrainReport report;
};

/// Warm-up epochs on the annotated frames (or on ground truth for
/// Supervision::full, where the whole schedule runs here).
WarmupResult run_warmup(const TrainConfig& cfg, const ModelConfig& model, const TrainData& data,
                        const TrainOptions& opts = {});

struct MeanTeacherResult {
  ModelParams student;
  std::optional<TeacherState> teacher;  // empty with no_teacher
  AdamState adam;
  TrainReport report;
};

/// Remaining epochs after warm-up. `report` continues the warm-up report.
MeanTeacherResult run_mean_teacher(const TrainConfig& cfg, const TrainData& data, ModelParams student,
                                   AdamState adam, TrainReport report, const TrainOptions& opts = {});

struct TrainResult {
  ModelParams student;
  std::optional<TeacherState> teacher;
  TrainReport report;
};

/// Full schedule: init_params(model, cfg.seed), warm-up, mean-teacher phase.
TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const TrainData& data,
                  const TrainOptions& opts = {});

/// Argmax predictions of `params` on every video, aggregated by evaluate_dataset.
EvalReport evaluate(const ModelParams& params, std::span<const Video* const> videos);

/// Model used for final predictions: the teacher when present, otherwise the student.
const ModelParams& inference_params(const TrainResult& result);

}  // namespace tsseg
