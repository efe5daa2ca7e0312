#include "tsseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tsseg {

std::string EvalReport::csv_header() { return "acc,edit,f1@10,f1@25,f1@50"; }

std::string EvalReport::csv_row() const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f,%.4f", acc, edit);
  out += buf;
  for (const auto& f : f1) {
    std::snprintf(buf, sizeof buf, ",%.4f", f.f1);
    out += buf;
  }
  return out;
}

double EvalReport::f1_at(double threshold) const {
  for (const auto& f : f1) {
    if (std::abs(f.threshold - threshold) < 1e-12) return f.f1;
  }
  throw InvalidInput("no F1 entry for the requested threshold");
}

double framewise_accuracy(std::span<const ClassId> pred, std::span<const ClassId> gt) {
  if (pred.size() != gt.size()) throw InvalidInput("prediction and ground truth lengths differ");
  if (gt.empty()) throw InvalidInput("empty labeling");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) hits += pred[t] == gt[t];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(gt.size());
}

std::size_t levenshtein(std::span<const ClassId> a, std::span<const ClassId> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::vector<ClassId> class_sequence(std::span<const Segment> segs) {
  std::vector<ClassId> out;
  out.reserve(segs.size());
  for (const auto& s : segs) out.push_back(s.label);
  return out;
}

std::size_t span_end(std::span<const Segment> segs) { return segs.empty() ? 0 : segs.back().end; }

}  // namespace

double edit_score(std::span<const Segment> pred, std::span<const Segment> gt) {
  if (pred.empty() || gt.empty()) throw InvalidInput("edit score needs non-empty segmentations");
  const auto d = levenshtein(class_sequence(pred), class_sequence(gt));
  const auto len = std::max(pred.size(), gt.size());
  return 100.0 * (1.0 - static_cast<double>(d) / static_cast<double>(len));
}

double segment_iou(const Segment& a, const Segment& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  const double inter = hi >= lo ? static_cast<double>(hi - lo + 1) : 0.0;
  const double uni = static_cast<double>(a.length() + b.length()) - inter;
  return inter / uni;
}

F1Result f1_at_iou(std::span<const Segment> pred, std::span<const Segment> gt, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("IoU threshold must lie in (0, 1)");
  if (!pred.empty() && !gt.empty() && span_end(pred) != span_end(gt)) {
    throw InvalidInput("prediction and ground truth cover different frame ranges");
  }
  F1Result r;
  r.threshold = threshold;
  std::vector<bool> used(gt.size(), false);
  for (const auto& p : pred) {
    double best = -1.0;
    std::size_t best_j = gt.size();
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (used[j] || gt[j].label != p.label) continue;
      const double iou = segment_iou(p, gt[j]);
      if (iou > best) {
        best = iou;
        best_j = j;
      }
    }
    if (best_j < gt.size() && best >= threshold) {
      ++r.tp;
      used[best_j] = true;
    } else {
      ++r.fp;
    }
  }
  r.fn = gt.size() - r.tp;
  const std::size_t denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom == 0 ? 0.0 : 100.0 * 2.0 * static_cast<double>(r.tp) / static_cast<double>(denom);
  return r;
}

EvalReport evaluate_dataset(std::span<const LabeledVideo> videos, std::span<const double> thresholds) {
  if (videos.empty()) throw InvalidInput("cannot evaluate an empty dataset");
  EvalReport rep;
  std::size_t hits = 0;
  std::size_t frames = 0;
  double edit_sum = 0.0;
  std::vector<F1Result> pooled;
  for (double th : thresholds) pooled.push_back(F1Result{th});
  for (const auto& v : videos) {
    if (v.pred.size() != v.gt.size()) throw InvalidInput("prediction and ground truth lengths differ");
    if (v.gt.empty()) throw InvalidInput("empty video in evaluation set");
    for (std::size_t t = 0; t < v.gt.size(); ++t) hits += v.pred[t] == v.gt[t];
    frames += v.gt.size();
    const auto ps = segments_from_frames(v.pred);
    const auto gs = segments_from_frames(v.gt);
    edit_sum += edit_score(ps, gs);
    for (auto& f : pooled) {
      const auto one = f1_at_iou(ps, gs, f.threshold);
      f.tp += one.tp;
      f.fp += one.fp;
      f.fn += one.fn;
    }
  }
  rep.acc = 100.0 * static_cast<double>(hits) / static_cast<double>(frames);
  rep.edit = edit_sum / static_cast<double>(videos.size());
  for (auto& f : pooled) {
    const std::size_t denom = 2 * f.tp + f.fp + f.fn;
    f.f1 = denom == 0 ? 0.0 : 100.0 * 2.0 * static_cast<double>(f.tp) / static_cast<double>(denom);
  }
  rep.f1 = std::move(pooled);
  return rep;
}

}  // namespace tsseg
