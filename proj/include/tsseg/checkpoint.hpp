#pragma once

// Binary checkpoints, little-endian:
//
//   magic "TSSM" (student) or "TSST" (teacher), u32 version = 1
//   u32 feature_dim, num_classes, channel_width, num_stages,
//       first_stage_layers, later_stage_layers
//   u32 branch count, then u32 kernel size per branch
//   u32 tensor count, then per tensor in ParamLayout order:
//       u32 rank, u32 dims[rank], f32 payload (row-major)
//   TSST only: u64 iteration, f64 lambda
//
// Parameters are held in f64 and stored as f32, so a write/read round trip
// rounds once; writing what was read reproduces the file byte for byte.

#include <string>

#include "tsseg/tcn.hpp"
#include "tsseg/teacher.hpp"

namespace tsseg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_model_checkpoint(const std::string& path, const ModelParams& params);
ModelParams read_model_checkpoint(const std::string& path);

void write_teacher_checkpoint(const std::string& path, const TeacherState& teacher);
TeacherState read_teacher_checkpoint(const std::string& path);

/// Reads either kind; for a teacher checkpoint returns the teacher's weights.
ModelParams read_any_checkpoint(const std::string& path);

/// Rounds every parameter through f32, i.e. the values a checkpoint stores.
ModelParams round_to_f32(const ModelParams& params);

}  // namespace tsseg
