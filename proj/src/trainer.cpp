#include "tsseg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "tsseg/pseudolabel.hpp"

namespace tsseg {

void TrainConfig::validate() const {
  if (warmup_epochs > total_epochs) throw InvalidInput("warmup_epochs exceeds total_epochs");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
  if (!(lr_decay_factor > 0.0) || lr_decay_every == 0) throw InvalidInput("invalid lr decay");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw InvalidInput("invalid Adam hyperparameters");
  }
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in [0, 1)");
  if (alpha < 0.0 || beta_max < 0.0) throw InvalidInput("loss weights must be non-negative");
  if (!(tau > 0.0) || !(tau_tmse > 0.0)) throw InvalidInput("clamp thresholds must be positive");
}

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.learning_rate * std::pow(cfg.lr_decay_factor, static_cast<double>(epoch / cfg.lr_decay_every));
}

double beta_at(const TrainConfig& cfg, std::size_t k) {
  const std::size_t len = cfg.mean_teacher_epochs();
  if (len == 0) return 0.0;
  return cfg.beta_max * static_cast<double>(k) / static_cast<double>(len);
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
               const AdamHyper& hyper) {
  const std::size_t n = params.size();
  if (grads.values.size() != n || state.m.size() != n || state.v.size() != n) {
    throw InvalidInput("Adam state/gradient size does not match parameters");
  }
  for (double g : grads.values) {
    if (!std::isfinite(g)) throw NumericalError("non-finite gradient");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  auto p = params.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads.values[i];
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::warmup: return "warmup";
    case Phase::mean_teacher: return "mean_teacher";
    case Phase::full: return "full";
  }
  return "?";
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string EpochRecord::csv_header() {
  return "epoch,phase,lr,beta,mean_loss,student_train_acc,teacher_train_acc,pseudo_agreement,"
         "test_acc,test_edit,test_f1@10,test_f1@25,test_f1@50";
}

std::string EpochRecord::csv_row() const {
  char head[64];
  std::snprintf(head, sizeof head, "%zu,%s,%.8g,", epoch, phase_name(phase), lr);
  std::string row = head;
  row += fmt(beta) + "," + fmt(mean_loss) + "," + fmt(student_train_acc) + "," +
         fmt(teacher_train_acc) + "," + fmt(pseudo_agreement);
  if (test) {
    row += "," + fmt(test->acc) + "," + fmt(test->edit);
    for (const auto& f : test->f1) row += "," + fmt(f.f1);
  } else {
    row += ",,,,,";
  }
  return row;
}

TrainData TrainData::from_dataset(const Dataset& ds, const std::string& train_split,
                                  const std::string& test_split) {
  TrainData d;
  d.class_names = ds.class_names;
  d.train = ds.split(train_split);
  if (!test_split.empty() && ds.splits.count(test_split)) d.test = ds.split(test_split);
  return d;
}

EvalReport evaluate(const ModelParams& params, std::span<const Video* const> videos) {
  std::vector<LabeledVideo> labeled;
  labeled.reserve(videos.size());
  for (const Video* v : videos) labeled.push_back({predict_labels(params, v->features), v->gt});
  return evaluate_dataset(labeled);
}

const ModelParams& inference_params(const TrainResult& result) {
  return result.teacher ? result.teacher->params : result.student;
}

namespace {

constexpr std::uint64_t kShuffleTag = 0x5348554646ULL;

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const TrainData& data, const TrainOptions& opts)
      : cfg_(cfg), data_(data), opts_(opts) {
    cfg_.validate();
    if (data_.train.empty()) throw InvalidInput("training split is empty");
  }

  std::vector<std::size_t> epoch_order(std::size_t epoch) const {
    std::vector<std::size_t> order(data_.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto rng = video_rng(cfg_.seed, epoch, kShuffleTag);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
  }

  LossWeights weights(double beta) const {
    LossWeights w;
    w.alpha = cfg_.alpha;
    w.beta = beta;
    w.tau = cfg_.tau;
    w.tau_tmse = cfg_.tau_tmse;
    w.smoothing = cfg_.smoothing;
    return w;
  }

  AdamHyper hyper() const { return {cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_epsilon}; }

  void check_finite(double loss, std::size_t epoch, const Video& v) const {
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", video " + v.id);
    }
  }

  void step(ModelParams& student, AdamState& adam, const ParamGrads& grads, double lr,
            std::size_t epoch, const Video& v) const {
    try {
      adam_step(student, grads, adam, lr, hyper());
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", video " + v.id);
    }
  }

  // Student forward over the training set: refreshes cached final-stage
  // scores and returns pooled frame accuracy against ground truth.
  double refresh_train_scores(const ModelParams& student) {
    train_scores_.clear();
    std::size_t hits = 0, frames = 0;
    for (const Video* v : data_.train) {
      const ForwardTrace tr = forward(student, v->features);
      const auto pred = argmax_rows(tr.stages.back().probs);
      for (std::size_t t = 0; t < pred.size(); ++t) hits += pred[t] == v->gt[t];
      frames += pred.size();
      train_scores_.push_back(tr.final_scores());
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(frames);
  }

  double train_accuracy(const ModelParams& params) const {
    std::size_t hits = 0, frames = 0;
    for (const Video* v : data_.train) {
      const auto pred = predict_labels(params, v->features);
      for (std::size_t t = 0; t < pred.size(); ++t) hits += pred[t] == v->gt[t];
      frames += pred.size();
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(frames);
  }

  void finish_epoch(EpochRecord rec, const ModelParams& student, const ModelParams& eval_model,
                    TrainReport& report) {
    rec.student_train_acc = refresh_train_scores(student);
    if (!data_.test.empty()) rec.test = evaluate(eval_model, data_.test);
    if (!opts_.log_csv.empty()) {
      std::ofstream out(opts_.log_csv, std::ios::app);
      if (!out) throw DataError("cannot append to " + opts_.log_csv);
      out << rec.csv_row() << '\n';
    }
    if (opts_.on_epoch) opts_.on_epoch(rec);
    report.epochs.push_back(std::move(rec));
  }

  WarmupResult warmup(const ModelConfig& model) {
    const auto t0 = std::chrono::steady_clock::now();
    WarmupResult res{init_params(model, cfg_.seed), AdamState{}, TrainReport{}};
    res.adam = AdamState::zeros(res.student.size());
    if (!opts_.log_csv.empty()) {
      std::ofstream out(opts_.log_csv, std::ios::trunc);
      if (!out) throw DataError("cannot write " + opts_.log_csv);
      out << EpochRecord::csv_header() << '\n';
    }
    const bool full = cfg_.supervision == Supervision::full;
    const std::size_t epochs = full ? cfg_.total_epochs : cfg_.warmup_epochs;
    const LossWeights w = weights(0.0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      const double lr = learning_rate_at(cfg_, epoch);
      double loss_sum = 0.0;
      for (std::size_t idx : epoch_order(epoch)) {
        const Video& v = *data_.train[idx];
        const ForwardTrace tr = forward(res.student, v.features);
        const auto probs = tr.all_stage_probs();
        const AggregateLoss loss = full ? meanteacher_total(probs, nullptr, v.gt, v.stamps, w)
                                        : warmup_total(probs, v.stamps, w);
        check_finite(loss.total, epoch, v);
        loss_sum += loss.total;
        step(res.student, res.adam, backward(res.student, tr, loss.stage_grads), lr, epoch, v);
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.phase = full ? Phase::full : Phase::warmup;
      rec.lr = lr;
      rec.beta = 0.0;
      rec.mean_loss = loss_sum / static_cast<double>(data_.train.size());
      finish_epoch(std::move(rec), res.student, res.student, res.report);
    }
    res.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

  MeanTeacherResult mean_teacher(ModelParams student, AdamState adam, TrainReport report) {
    const auto t0 = std::chrono::steady_clock::now();
    MeanTeacherResult res{std::move(student), std::nullopt, std::move(adam), std::move(report)};
    if (cfg_.supervision == Supervision::full) return res;
    if (!cfg_.no_teacher) res.teacher = TeacherState::from_student(res.student, cfg_.lambda);
    if (train_scores_.size() != data_.train.size()) refresh_train_scores(res.student);

    std::vector<FrameLabeling> previous;
    const std::size_t phase_len = cfg_.mean_teacher_epochs();
    for (std::size_t k = 0; k < phase_len; ++k) {
      const std::size_t epoch = cfg_.warmup_epochs + k;
      const double lr = learning_rate_at(cfg_, epoch);
      const double beta = beta_at(cfg_, k);
      const LossWeights w = weights(beta);

      std::vector<FrameLabeling> pseudo;
      pseudo.reserve(data_.train.size());
      for (std::size_t i = 0; i < data_.train.size(); ++i) {
        pseudo.push_back(generate_pseudo_labels(train_scores_[i], data_.train[i]->stamps));
      }
      export_pseudo(epoch, pseudo);

      double loss_sum = 0.0;
      for (std::size_t idx : epoch_order(epoch)) {
        const Video& v = *data_.train[idx];
        const ForwardTrace tr = forward(res.student, v.features);
        const auto probs = tr.all_stage_probs();
        std::optional<ProbSequence> teacher_probs;
        if (res.teacher) {
          const ForwardTrace ttr = forward(res.teacher->params, v.features);
          teacher_probs = ttr.stage_probs(ttr.stages.size() - 1);
        }
        const AggregateLoss loss =
            meanteacher_total(probs, teacher_probs ? &*teacher_probs : nullptr, pseudo[idx], v.stamps, w);
        check_finite(loss.total, epoch, v);
        loss_sum += loss.total;
        step(res.student, res.adam, backward(res.student, tr, loss.stage_grads), lr, epoch, v);
        if (res.teacher) ema_update(*res.teacher, res.student);
      }

      EpochRecord rec;
      rec.epoch = epoch;
      rec.phase = Phase::mean_teacher;
      rec.lr = lr;
      rec.beta = beta;
      rec.mean_loss = loss_sum / static_cast<double>(data_.train.size());
      if (!previous.empty()) rec.pseudo_agreement = agreement(previous, pseudo);
      if (res.teacher && cfg_.evaluate_teacher_on_train) {
        rec.teacher_train_acc = train_accuracy(res.teacher->params);
      }
      const ModelParams& eval_model = res.teacher ? res.teacher->params : res.student;
      finish_epoch(std::move(rec), res.student, eval_model, res.report);
      previous = std::move(pseudo);
    }
    res.report.wall_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  static double agreement(const std::vector<FrameLabeling>& a, const std::vector<FrameLabeling>& b) {
    std::size_t same = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t t = 0; t < a[i].size(); ++t) same += a[i][t] == b[i][t];
      total += a[i].size();
    }
    return 100.0 * static_cast<double>(same) / static_cast<double>(total);
  }

  void export_pseudo(std::size_t epoch, const std::vector<FrameLabeling>& pseudo) const {
    if (opts_.pseudo_dir.empty() || !cfg_.export_pseudo_labels) return;
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03zu", epoch);
    const auto dir = std::filesystem::path(opts_.pseudo_dir) / name;
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
      write_labels((dir / (data_.train[i]->id + ".txt")).string(), pseudo[i], data_.class_names);
    }
  }

  TrainConfig cfg_;
  const TrainData& data_;
  TrainOptions opts_;
  std::vector<ScoreSequence> train_scores_;
};

}  // namespace

WarmupResult run_warmup(const TrainConfig& cfg, const ModelConfig& model, const TrainData& data,
                        const TrainOptions& opts) {
  return Trainer(cfg, data, opts).warmup(model);
}

MeanTeacherResult run_mean_teacher(const TrainConfig& cfg, const TrainData& data, ModelParams student,
                                   AdamState adam, TrainReport report, const TrainOptions& opts) {
  return Trainer(cfg, data, opts).mean_teacher(std::move(student), std::move(adam), std::move(report));
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const TrainData& data,
                  const TrainOptions& opts) {
  Trainer trainer(cfg, data, opts);
  WarmupResult w = trainer.warmup(model);
  MeanTeacherResult mt = trainer.mean_teacher(std::move(w.student), std::move(w.adam), std::move(w.report));
  return {std::move(mt.student), std::move(mt.teacher), std::move(mt.report)};
}

}  // namespace tsseg
