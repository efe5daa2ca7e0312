#pragma once

// Shared generators for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tsseg/core.hpp"
#include "tsseg/tcn.hpp"

namespace tsseg::testing {

inline MatrixD random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixD m(rows, cols);
  for (double& v : m.flat()) v = n(rng);
  return m;
}

inline FeatureSequence random_features(std::mt19937_64& rng, std::size_t t, std::size_t d) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  MatrixF m(t, d);
  for (float& v : m.flat()) v = n(rng);
  return FeatureSequence(std::move(m));
}

/// Random labeling with `segments` runs of random length in [1, max_len].
inline FrameLabeling random_labeling(std::mt19937_64& rng, std::size_t segments, std::size_t max_len,
                                     std::size_t num_classes) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<ClassId> cls(0, static_cast<ClassId>(num_classes - 1));
  FrameLabeling out;
  ClassId prev = -1;
  for (std::size_t s = 0; s < segments; ++s) {
    ClassId c = cls(rng);
    while (c == prev) c = cls(rng);
    out.insert(out.end(), len(rng), c);
    prev = c;
  }
  return out;
}

/// Random valid annotation with `n` stamps over `t` frames.
inline TimestampAnnotation random_annotation(std::mt19937_64& rng, std::size_t t, std::size_t n,
                                             std::size_t num_classes) {
  std::vector<std::size_t> frames(t);
  for (std::size_t i = 0; i < t; ++i) frames[i] = i;
  std::shuffle(frames.begin(), frames.end(), rng);
  frames.resize(n);
  std::sort(frames.begin(), frames.end());
  std::uniform_int_distribution<ClassId> cls(0, static_cast<ClassId>(num_classes - 1));
  std::vector<Timestamp> stamps;
  ClassId prev = -1;
  for (std::size_t f : frames) {
    ClassId c = cls(rng);
    while (c == prev) c = cls(rng);
    stamps.push_back({f, c});
    prev = c;
  }
  return TimestampAnnotation(std::move(stamps), t);
}

inline ModelConfig tiny_config() {
  ModelConfig c;
  c.feature_dim = 4;
  c.num_classes = 3;
  c.channel_width = 8;
  c.num_stages = 2;
  c.first_stage_layers = 3;
  c.later_stage_layers = 3;
  return c;
}

inline double max_abs_diff(const MatrixD& a, const MatrixD& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace tsseg::testing

namespace tsseg::testing {

/// Bit pattern of every ReLU sign in a forward trace; a change between two
/// parameter values means a finite difference straddles a ReLU kink.
inline std::vector<char> relu_signature(const ForwardTrace& tr) {
  std::vector<char> sig;
  for (const auto& st : tr.stages)
    for (const auto& br : st.branches)
      for (const auto& a : br.pre_act)
        for (double v : a.flat()) sig.push_back(v > 0.0);
  return sig;
}

/// Clamp indicators of every loss: |Δlog p| >= each threshold, and p below the log floor.
inline std::vector<char> clamp_signature(const ForwardTrace& tr, std::initializer_list<double> taus) {
  std::vector<char> sig;
  for (const auto& st : tr.stages) {
    const MatrixD& p = st.probs;
    for (std::size_t t = 0; t < p.rows(); ++t) {
      for (std::size_t c = 0; c < p.cols(); ++c) {
        sig.push_back(p(t, c) < kProbFloor);
        if (t == 0) continue;
        const double d = std::abs(std::log(std::max(p(t, c), kProbFloor)) -
                                  std::log(std::max(p(t - 1, c), kProbFloor)));
        for (double tau : taus) sig.push_back(d >= tau);
      }
    }
  }
  return sig;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // finite-difference stencil crosses a kink
};

/// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// Central differences of `loss` w.r.t. every parameter. `signature`
/// returns the kink pattern at a parameter value; parameters whose ±eps
/// stencil changes the pattern are skipped.
template <typename LossFn, typename SigFn>
GradCheckResult check_gradient(const ModelParams& params, const std::vector<double>& analytic, LossFn&& loss,
                               SigFn&& signature, double eps = 1e-5) {
  GradCheckResult r;
  ModelParams work = params;
  const auto base_sig = signature(work);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = work.values()[i];
    work.values()[i] = orig + eps;
    const double lp = loss(work);
    const bool kink_p = signature(work) != base_sig;
    work.values()[i] = orig - eps;
    const double lm = loss(work);
    const bool kink_m = signature(work) != base_sig;
    work.values()[i] = orig;
    if (kink_p || kink_m) {
      ++r.skipped;
      continue;
    }
    const double numeric = (lp - lm) / (2.0 * eps);
    r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[i], numeric));
    ++r.checked;
  }
  return r;
}

}  // namespace tsseg::testing

namespace tsseg::testing {

inline ProbSequence random_probs(std::mt19937_64& rng, std::size_t t, std::size_t nc, double scale = 2.0) {
  return softmax_rows(random_matrix(rng, t, nc, scale));
}

}  // namespace tsseg::testing
