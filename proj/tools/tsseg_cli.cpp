// tsseg: synthetic data generation, training, evaluation, pseudo-label
// export and accuracy plots for timestamp-supervised action segmentation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tsseg/checkpoint.hpp"
#include "tsseg/config.hpp"
#include "tsseg/data.hpp"
#include "tsseg/plot.hpp"
#include "tsseg/pseudolabel.hpp"
#include "tsseg/simd/kernels.hpp"
#include "tsseg/trainer.hpp"

namespace fs = std::filesystem;
using namespace tsseg;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Config problems are usage errors; everything raised while touching data is a data error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return parse_config("");
  try {
    return load_config(path);
  } catch (const InvalidInput& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

int cmd_gen_data(const std::string& config, const std::string& out) {
  const RunConfig cfg = config_or_default(config);
  const Dataset ds = generate_dataset(cfg.data);
  write_dataset(out, ds);
  write_text(fs::path(out) / "config.txt", format_config(cfg));
  std::size_t frames = 0;
  for (const auto& v : ds.videos) frames += v.gt.size();
  std::printf("wrote %zu videos (%zu frames, %zu classes) to %s\n", ds.videos.size(), frames,
              ds.class_names.size(), out.c_str());
  return kOk;
}

struct TrainArgs {
  std::string data, split = "train", test_split = "test", config, out, smoothing;
  bool no_teacher = false;
  bool export_pseudo = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = config_or_default(a.config);
  if (a.no_teacher) cfg.train.no_teacher = true;
  if (a.export_pseudo) cfg.train.export_pseudo_labels = true;
  if (!a.smoothing.empty()) {
    try {
      cfg.train.smoothing = parse_smoothing(a.smoothing);
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
  }
  const Dataset ds = read_dataset(a.data);
  ModelConfig model = cfg.model;
  model.feature_dim = ds.feature_dim();
  model.num_classes = ds.num_classes();
  const TrainData data = TrainData::from_dataset(ds, a.split, a.test_split);

  fs::create_directories(a.out);
  const fs::path run(a.out);
  write_text(run / "config.txt", format_config(cfg));
  TrainOptions opts;
  opts.log_csv = (run / "log.csv").string();
  if (cfg.train.export_pseudo_labels) opts.pseudo_dir = (run / "pseudo").string();
  if (!a.quiet) {
    opts.on_epoch = [](const EpochRecord& r) {
      std::fprintf(stderr, "epoch %3zu %-12s loss %.4f  train %.2f", r.epoch, phase_name(r.phase),
                   r.mean_loss, r.student_train_acc);
      if (r.test) std::fprintf(stderr, "  test acc %.2f edit %.2f", r.test->acc, r.test->edit);
      std::fprintf(stderr, "\n");
    };
  }
  std::fprintf(stderr, "kernels: %s\n", std::string(simd::active().name).c_str());
  const TrainResult res = train(cfg.train, model, data, opts);
  write_model_checkpoint((run / "student.ckpt").string(), res.student);
  if (res.teacher) write_teacher_checkpoint((run / "teacher.ckpt").string(), *res.teacher);
  std::fprintf(stderr, "trained in %.1f s\n", res.report.wall_seconds);
  if (!data.test.empty()) {
    const EvalReport rep = evaluate(inference_params(res), data.test);
    write_text(run / "eval.csv", EvalReport::csv_header() + "\n" + rep.csv_row() + "\n");
    std::printf("%s\n%s\n", EvalReport::csv_header().c_str(), rep.csv_row().c_str());
  }
  return kOk;
}

int cmd_eval(const std::string& data_dir, const std::string& split, const std::string& ckpt,
             const std::string& out) {
  const Dataset ds = read_dataset(data_dir);
  const ModelParams params = read_any_checkpoint(ckpt);
  if (params.config().feature_dim != ds.feature_dim() || params.config().num_classes != ds.num_classes()) {
    throw DataError(ckpt + ": checkpoint dimensions do not match dataset " + data_dir);
  }
  const auto videos = ds.split(split);
  const EvalReport rep = evaluate(params, videos);
  const std::string text = EvalReport::csv_header() + "\n" + rep.csv_row() + "\n";
  std::printf("%s", text.c_str());
  const fs::path dest = out.empty() ? fs::path(ckpt).parent_path() / ("eval_" + split + ".csv") : fs::path(out);
  write_text(dest, text);
  return kOk;
}

int cmd_pseudo(const std::string& data_dir, const std::string& split, const std::string& ckpt,
               const std::string& out) {
  const Dataset ds = read_dataset(data_dir);
  const ModelParams params = read_any_checkpoint(ckpt);
  if (params.config().feature_dim != ds.feature_dim() || params.config().num_classes != ds.num_classes()) {
    throw DataError(ckpt + ": checkpoint dimensions do not match dataset " + data_dir);
  }
  fs::create_directories(out);
  std::size_t agree = 0, frames = 0;
  for (const Video* v : ds.split(split)) {
    const ScoreSequence scores = predict_scores(params, v->features);
    const FrameLabeling pseudo = generate_pseudo_labels(scores, v->stamps);
    write_labels((fs::path(out) / (v->id + ".txt")).string(), pseudo, ds.class_names);
    for (std::size_t t = 0; t < pseudo.size(); ++t) agree += pseudo[t] == v->gt[t];
    frames += pseudo.size();
  }
  std::printf("pseudo-label accuracy vs ground truth: %.2f%%\n",
              100.0 * static_cast<double>(agree) / static_cast<double>(frames));
  return kOk;
}

int cmd_plot(const std::string& log, const std::string& out) {
  write_text(out, plot_training_log(log));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timestamp-supervised temporal action segmentation with a mean teacher"};
  app.require_subcommand(1);

  std::string gen_config, gen_out;
  auto* gen = app.add_subcommand("gen-data", "Synthesize a dataset on disk");
  gen->add_option("--config", gen_config, "key=value config file");
  gen->add_option("--out", gen_out, "Output dataset directory")->required();

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Warm-up and mean-teacher training");
  tr->add_option("--data", ta.data, "Dataset directory")->required();
  tr->add_option("--split", ta.split, "Training split name")->capture_default_str();
  tr->add_option("--test-split", ta.test_split, "Split evaluated after every epoch (skipped if absent)")
      ->capture_default_str();
  tr->add_option("--config", ta.config, "key=value config file");
  tr->add_option("--out", ta.out, "Run directory")->required();
  tr->add_flag("--no-teacher", ta.no_teacher, "Ablation: pseudo labels only, no EMA teacher");
  tr->add_option("--smoothing", ta.smoothing, "segmental|tmse|none")
      ->check(CLI::IsMember({"segmental", "tmse", "none"}));
  tr->add_flag("--export-pseudo", ta.export_pseudo, "Write per-epoch pseudo labels under <out>/pseudo");
  tr->add_flag("--quiet", ta.quiet, "No per-epoch progress on stderr");

  std::string ev_data, ev_split = "test", ev_ckpt, ev_out;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--split", ev_split, "Split name")->capture_default_str();
  ev->add_option("--ckpt", ev_ckpt, "Student or teacher checkpoint")->required();
  ev->add_option("--out", ev_out, "CSV destination (default: next to the checkpoint)");

  std::string ps_data, ps_split = "train", ps_ckpt, ps_out;
  auto* ps = app.add_subcommand("pseudo", "Export pseudo labels generated from a checkpoint's scores");
  ps->add_option("--data", ps_data, "Dataset directory")->required();
  ps->add_option("--split", ps_split, "Split name")->capture_default_str();
  ps->add_option("--ckpt", ps_ckpt, "Student or teacher checkpoint")->required();
  ps->add_option("--out", ps_out, "Output directory")->required();

  std::string pl_log, pl_out;
  auto* pl = app.add_subcommand("plot", "Accuracy-per-epoch SVG from a training log");
  pl->add_option("--log", pl_log, "log.csv of a run")->required();
  pl->add_option("--out", pl_out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_config, gen_out);
    if (*tr) return cmd_train(ta);
    if (*ev) return cmd_eval(ev_data, ev_split, ev_ckpt, ev_out);
    if (*ps) return cmd_pseudo(ps_data, ps_split, ps_ckpt, ps_out);
    if (*pl) return cmd_plot(pl_log, pl_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
