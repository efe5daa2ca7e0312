#include "tsseg/tcn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tsseg/simd/kernels.hpp"

namespace tsseg {

void ModelConfig::validate() const {
  if (feature_dim == 0 || num_classes == 0 || channel_width == 0) {
    throw InvalidInput("model dimensions must be positive");
  }
  if (num_stages < 2) throw InvalidInput("model needs at least two stages");
  if (first_stage_layers == 0 || later_stage_layers == 0) {
    throw InvalidInput("every stage needs at least one layer");
  }
  if (first_stage_kernels.empty()) throw InvalidInput("first stage needs at least one branch");
  for (std::size_t k : first_stage_kernels) {
    if (k == 0 || k % 2 == 0) throw InvalidInput("kernel sizes must be odd and positive");
  }
  if (first_stage_layers >= 63 || later_stage_layers >= 63) {
    throw InvalidInput("too many layers for the dilation schedule");
  }
}

ParamLayout::ParamLayout(const ModelConfig& config) {
  config.validate();
  const std::size_t w = config.channel_width;
  for (std::size_t s = 0; s < config.num_stages; ++s) {
    StageSlots stage;
    stage.in_dim = s == 0 ? config.feature_dim : config.num_classes;
    const std::string sp = "stage" + std::to_string(s);
    const auto kernels = s == 0 ? config.first_stage_kernels : std::vector<std::size_t>{3};
    const std::size_t layers = s == 0 ? config.first_stage_layers : config.later_stage_layers;
    for (std::size_t b = 0; b < kernels.size(); ++b) {
      BranchSlots br;
      br.kernel = kernels[b];
      const std::string bp = sp + ".branch" + std::to_string(b);
      br.in_w = add(bp + ".in_w", {stage.in_dim, w});
      br.in_b = add(bp + ".in_b", {w});
      for (std::size_t l = 0; l < layers; ++l) {
        LayerSlots ls;
        ls.kernel = br.kernel;
        ls.dilation = std::size_t{1} << l;
        const std::string lp = bp + ".layer" + std::to_string(l);
        ls.conv_w = add(lp + ".conv_w", {br.kernel, w, w});
        ls.conv_b = add(lp + ".conv_b", {w});
        ls.res_w = add(lp + ".res_w", {w, w});
        ls.res_b = add(lp + ".res_b", {w});
        br.layers.push_back(ls);
      }
      stage.branches.push_back(std::move(br));
    }
    stage.out_w = add(sp + ".out_w", {w, config.num_classes});
    stage.out_b = add(sp + ".out_b", {config.num_classes});
    stages_.push_back(std::move(stage));
  }
}

std::size_t ParamLayout::add(std::string name, std::vector<std::size_t> dims) {
  std::size_t size = 1;
  for (std::size_t d : dims) size *= d;
  const std::size_t offset = total_;
  tensors_.push_back({std::move(name), std::move(dims), offset, size});
  total_ += size;
  return offset;
}

ModelParams::ModelParams(ModelConfig config)
    : config_(std::move(config)),
      layout_(std::make_shared<const ParamLayout>(config_)),
      values_(layout_->total_size(), 0.0) {}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params(config);
  std::mt19937_64 rng(seed);
  auto values = params.values();
  for (const auto& t : params.layout().tensors()) {
    if (t.dims.size() == 1) continue;  // biases stay zero
    std::size_t fan_in = 1;
    for (std::size_t i = 0; i + 1 < t.dims.size(); ++i) fan_in *= t.dims[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < t.size; ++i) values[t.offset + i] = dist(rng);
  }
  return params;
}

std::vector<ProbSequence> ForwardTrace::all_stage_probs() const {
  std::vector<ProbSequence> out;
  out.reserve(stages.size());
  for (std::size_t s = 0; s < stages.size(); ++s) out.push_back(stage_probs(s));
  return out;
}

namespace {

// Rows of the output that receive a contribution from tap offset `off`.
struct TapRange {
  std::size_t out_begin = 0;
  std::size_t count = 0;
  std::size_t in_begin = 0;
};

TapRange tap_range(std::size_t num_frames, std::ptrdiff_t off) {
  const auto t = static_cast<std::ptrdiff_t>(num_frames);
  if (off >= t || -off >= t) return {};
  const std::ptrdiff_t begin = off < 0 ? -off : 0;
  const std::ptrdiff_t end = off > 0 ? t - off : t;
  return {static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin),
          static_cast<std::size_t>(begin + off)};
}

std::ptrdiff_t tap_offset(std::size_t tap, const LayerSlots& ls) {
  const auto half = static_cast<std::ptrdiff_t>(ls.kernel / 2);
  return (static_cast<std::ptrdiff_t>(tap) - half) * static_cast<std::ptrdiff_t>(ls.dilation);
}

MatrixD broadcast_bias(std::size_t rows, const double* bias, std::size_t cols) {
  MatrixD out(rows, cols);
  for (std::size_t t = 0; t < rows; ++t) std::copy(bias, bias + cols, out.row(t).begin());
  return out;
}

// out += in · w   (in: T × cin, w: cin × cout)
void dense_accumulate(const MatrixD& in, const double* w, MatrixD& out) {
  simd::active().gemm_nn(in.rows(), out.cols(), in.cols(), in.data(), in.cols(), w, out.cols(),
                         out.data(), out.cols());
}

std::vector<double> transpose(const double* w, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = w[r * cols + c];
  return out;
}

MatrixD to_double(const MatrixF& m) {
  MatrixD out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i];
  return out;
}

BranchTrace run_branch(const ModelParams& params, const BranchSlots& br, const MatrixD& input) {
  const std::size_t t = input.rows();
  const std::size_t w = params.config().channel_width;
  const auto& k = simd::active();
  BranchTrace tr;
  tr.hidden.reserve(br.layers.size() + 1);
  MatrixD h0 = broadcast_bias(t, params.at(br.in_b), w);
  dense_accumulate(input, params.at(br.in_w), h0);
  tr.hidden.push_back(std::move(h0));
  for (const auto& ls : br.layers) {
    const MatrixD& h = tr.hidden.back();
    MatrixD a = broadcast_bias(t, params.at(ls.conv_b), w);
    for (std::size_t tap = 0; tap < ls.kernel; ++tap) {
      const TapRange r = tap_range(t, tap_offset(tap, ls));
      if (r.count == 0) continue;
      k.gemm_nn(r.count, w, w, h.data() + r.in_begin * w, w, params.at(ls.conv_w) + tap * w * w, w,
                a.data() + r.out_begin * w, w);
    }
    MatrixD act(t, w);
    for (std::size_t i = 0; i < a.size(); ++i) act.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    MatrixD next = h;
    MatrixD res = broadcast_bias(t, params.at(ls.res_b), w);
    dense_accumulate(act, params.at(ls.res_w), res);
    k.axpby(next.size(), 1.0, res.data(), 1.0, next.data());
    tr.pre_act.push_back(std::move(a));
    tr.act.push_back(std::move(act));
    tr.hidden.push_back(std::move(next));
  }
  return tr;
}

}  // namespace

ForwardTrace forward(const ModelParams& params, const FeatureSequence& input) {
  const auto& cfg = params.config();
  if (input.feature_dim() != cfg.feature_dim) {
    throw InvalidInput("feature dim " + std::to_string(input.feature_dim()) +
                       " does not match model feature dim " + std::to_string(cfg.feature_dim));
  }
  const std::size_t t = input.num_frames();
  ForwardTrace trace;
  trace.stages.reserve(cfg.num_stages);
  for (std::size_t s = 0; s < cfg.num_stages; ++s) {
    const auto& slots = params.layout().stages()[s];
    StageTrace st;
    st.input = s == 0 ? to_double(input.values()) : trace.stages[s - 1].probs;
    for (const auto& br : slots.branches) st.branches.push_back(run_branch(params, br, st.input));
    st.hidden = st.branches.front().hidden.back();
    for (std::size_t b = 1; b < st.branches.size(); ++b) {
      const auto& hb = st.branches[b].hidden.back();
      simd::active().axpby(st.hidden.size(), 1.0, hb.data(), 1.0, st.hidden.data());
    }
    st.scores = broadcast_bias(t, params.at(slots.out_b), cfg.num_classes);
    dense_accumulate(st.hidden, params.at(slots.out_w), st.scores);
    st.probs = MatrixD(t, cfg.num_classes);
    for (std::size_t i = 0; i < t; ++i) softmax_row(st.scores.row(i), st.probs.row(i));
    trace.stages.push_back(std::move(st));
  }
  return trace;
}

ScoreSequence predict_scores(const ModelParams& params, const FeatureSequence& input) {
  return forward(params, input).final_scores();
}

ParamGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    std::span<const MatrixD> score_grads) {
  const auto& cfg = params.config();
  const auto& layout = params.layout();
  if (trace.stages.size() != cfg.num_stages || score_grads.size() != cfg.num_stages) {
    throw InvalidInput("backward expects one score gradient per stage");
  }
  const std::size_t t = trace.stages.front().scores.rows();
  const std::size_t w = cfg.channel_width;
  const std::size_t nc = cfg.num_classes;
  for (const auto& g : score_grads) {
    if (g.rows() != t || g.cols() != nc) throw InvalidInput("score gradient shape mismatch");
  }
  const auto& k = simd::active();
  ParamGrads grads{std::vector<double>(params.size(), 0.0)};
  double* gv = grads.values.data();

  // Gradient w.r.t. the current stage's scores, including what flows back
  // from the next stage through its softmax input.
  MatrixD d_scores = score_grads.back();
  for (std::size_t s = cfg.num_stages; s-- > 0;) {
    const auto& st = trace.stages[s];
    const auto& slots = layout.stages()[s];

    k.gemm_tn(t, nc, w, st.hidden.data(), w, d_scores.data(), nc, gv + slots.out_w, nc);
    k.colsum(t, nc, d_scores.data(), nc, gv + slots.out_b);
    MatrixD d_hidden(t, w);
    {
      const auto wt = transpose(params.at(slots.out_w), w, nc);
      k.gemm_nn(t, w, nc, d_scores.data(), nc, wt.data(), w, d_hidden.data(), w);
    }

    MatrixD d_input(t, slots.in_dim);
    for (std::size_t b = 0; b < slots.branches.size(); ++b) {
      const auto& br = slots.branches[b];
      const auto& bt = st.branches[b];
      MatrixD dh = d_hidden;
      for (std::size_t l = br.layers.size(); l-- > 0;) {
        const auto& ls = br.layers[l];
        // residual path: h_{l+1} = h_l + act_l · W_res + b_res
        k.gemm_tn(t, w, w, bt.act[l].data(), w, dh.data(), w, gv + ls.res_w, w);
        k.colsum(t, w, dh.data(), w, gv + ls.res_b);
        MatrixD d_pre(t, w);
        {
          const auto wt = transpose(params.at(ls.res_w), w, w);
          k.gemm_nn(t, w, w, dh.data(), w, wt.data(), w, d_pre.data(), w);
        }
        const double* pre = bt.pre_act[l].data();
        for (std::size_t i = 0; i < d_pre.size(); ++i) {
          if (!(pre[i] > 0.0)) d_pre.data()[i] = 0.0;
        }
        k.colsum(t, w, d_pre.data(), w, gv + ls.conv_b);
        const MatrixD& h = bt.hidden[l];
        for (std::size_t tap = 0; tap < ls.kernel; ++tap) {
          const TapRange r = tap_range(t, tap_offset(tap, ls));
          if (r.count == 0) continue;
          k.gemm_tn(r.count, w, w, h.data() + r.in_begin * w, w, d_pre.data() + r.out_begin * w, w,
                    gv + ls.conv_w + tap * w * w, w);
          const auto wt = transpose(params.at(ls.conv_w) + tap * w * w, w, w);
          k.gemm_nn(r.count, w, w, d_pre.data() + r.out_begin * w, w, wt.data(), w,
                    dh.data() + r.in_begin * w, w);
        }
      }
      k.gemm_tn(t, w, slots.in_dim, st.input.data(), slots.in_dim, dh.data(), w, gv + br.in_w, w);
      k.colsum(t, w, dh.data(), w, gv + br.in_b);
      if (s > 0) {
        const auto wt = transpose(params.at(br.in_w), slots.in_dim, w);
        k.gemm_nn(t, slots.in_dim, w, dh.data(), w, wt.data(), slots.in_dim, d_input.data(),
                  slots.in_dim);
      }
    }

    if (s == 0) break;
    // Stage input is softmax(prev scores): d_scores_prev = p ⊙ (d_p - <p, d_p>).
    const MatrixD& p = trace.stages[s - 1].probs;
    d_scores = score_grads[s - 1];
    for (std::size_t i = 0; i < t; ++i) {
      auto pr = p.row(i);
      auto dp = d_input.row(i);
      double dot = 0.0;
      for (std::size_t c = 0; c < nc; ++c) dot += pr[c] * dp[c];
      for (std::size_t c = 0; c < nc; ++c) d_scores(i, c) += pr[c] * (dp[c] - dot);
    }
  }
  return grads;
}

}  // namespace tsseg
