#pragma once

// Multi-stage dilated temporal convolutional network with explicit
// forward/backward passes.
//
// Stage 1 runs one branch per entry of `first_stage_kernels` (default 3 and
// 5) on the input features; the branches' hidden outputs are summed and fed
// to a single classifier. Every later stage consumes the softmax of the
// previous stage's scores. A branch is
//
//   h_0     = X · W_in + b_in                              (1×1 projection)
//   a_l     = conv_k,dil=2^l(h_l) + b_conv                 (zero padded, T kept)
//   h_{l+1} = h_l + relu(a_l) · W_res + b_res
//
// and a stage outputs scores = (Σ_branches h_L) · W_out + b_out.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tsseg/core.hpp"

namespace tsseg {

struct ModelConfig {
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::size_t channel_width = 32;
  std::size_t num_stages = 4;
  std::size_t first_stage_layers = 12;
  std::size_t later_stage_layers = 10;
  std::vector<std::size_t> first_stage_kernels{3, 5};

  /// Throws InvalidInput unless every field is positive, kernels are odd and
  /// there are at least two stages.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Offsets of one dilated residual layer's tensors in the flat parameter vector.
struct LayerSlots {
  std::size_t kernel = 3;
  std::size_t dilation = 1;
  std::size_t conv_w = 0;  // kernel × W × W, tap-major, [tap][in][out]
  std::size_t conv_b = 0;  // W
  std::size_t res_w = 0;   // W × W
  std::size_t res_b = 0;   // W
};

struct BranchSlots {
  std::size_t kernel = 3;
  std::size_t in_w = 0;  // in_dim × W
  std::size_t in_b = 0;  // W
  std::vector<LayerSlots> layers;
};

struct StageSlots {
  std::size_t in_dim = 0;
  std::vector<BranchSlots> branches;
  std::size_t out_w = 0;  // W × N_c
  std::size_t out_b = 0;  // N_c
};

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> dims;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Fixed tensor order shared by parameters, gradients, optimizer moments and
/// checkpoints: stage by stage, branch by branch, in_w, in_b, then per layer
/// conv_w, conv_b, res_w, res_b; finally the stage's out_w, out_b.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelConfig& config);

  std::size_t total_size() const { return total_; }
  const std::vector<StageSlots>& stages() const { return stages_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }

 private:
  std::size_t add(std::string name, std::vector<std::size_t> dims);
  std::vector<StageSlots> stages_;
  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

/// Model weights, stored as one flat f64 vector laid out by ParamLayout.
class ModelParams {
 public:
  /// All-zero parameters for `config`.
  explicit ModelParams(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const ParamLayout& layout() const { return *layout_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const double* at(std::size_t offset) const { return values_.data() + offset; }

  bool operator==(const ModelParams& other) const {
    return config_ == other.config_ && values_ == other.values_;
  }

 private:
  ModelConfig config_;
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<double> values_;
};

/// Gradients mirroring ModelParams::values().
struct ParamGrads {
  std::vector<double> values;
};

/// Deterministic in `seed`: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

struct BranchTrace {
  std::vector<MatrixD> hidden;   // L + 1 entries, hidden[0] is the input projection
  std::vector<MatrixD> pre_act;  // L entries, dilated conv output before ReLU
  std::vector<MatrixD> act;      // L entries, ReLU output
};

struct StageTrace {
  MatrixD input;   // features (stage 1) or previous stage's probabilities
  std::vector<BranchTrace> branches;
  MatrixD hidden;  // sum of branch outputs, classifier input
  ScoreSequence scores;
  MatrixD probs;   // softmax(scores)
};

struct ForwardTrace {
  std::vector<StageTrace> stages;
  const ScoreSequence& final_scores() const { return stages.back().scores; }
  ProbSequence stage_probs(std::size_t s) const { return ProbSequence::from_values(stages[s].probs); }
  std::vector<ProbSequence> all_stage_probs() const;
};

/// Throws InvalidInput if input.feature_dim() differs from config.feature_dim.
ForwardTrace forward(const ModelParams& params, const FeatureSequence& input);

/// Final-stage scores only.
ScoreSequence predict_scores(const ModelParams& params, const FeatureSequence& input);

/// Exact gradient of Σ_s ⟨score_grads[s], scores_s⟩ w.r.t. every parameter,
/// including the flow from later stages through the inter-stage softmax.
ParamGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    std::span<const MatrixD> score_grads);

}  // namespace tsseg
