#include "tsseg/checkpoint.hpp"

#include "binio.hpp"

namespace tsseg {

namespace {

constexpr char kStudentMagic[5] = "TSSM";
constexpr char kTeacherMagic[5] = "TSST";

void write_body(binio::Writer& w, const ModelParams& params) {
  const auto& c = params.config();
  w.u32(kCheckpointVersion);
  for (std::size_t v : {c.feature_dim, c.num_classes, c.channel_width, c.num_stages,
                        c.first_stage_layers, c.later_stage_layers}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(c.first_stage_kernels.size()));
  for (std::size_t k : c.first_stage_kernels) w.u32(static_cast<std::uint32_t>(k));
  const auto& tensors = params.layout().tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  auto values = params.values();
  for (const auto& t : tensors) {
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (std::size_t d : t.dims) w.u32(static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size; ++i) w.f32(static_cast<float>(values[t.offset + i]));
  }
}

ModelParams read_body(binio::Reader& r) {
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw DataError(r.path() + ": unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig c;
  c.feature_dim = r.u32("feature_dim");
  c.num_classes = r.u32("num_classes");
  c.channel_width = r.u32("channel_width");
  c.num_stages = r.u32("num_stages");
  c.first_stage_layers = r.u32("first_stage_layers");
  c.later_stage_layers = r.u32("later_stage_layers");
  const std::uint32_t branches = r.u32("branch count");
  if (branches > 64) throw DataError(r.path() + ": implausible branch count");
  c.first_stage_kernels.clear();
  for (std::uint32_t b = 0; b < branches; ++b) c.first_stage_kernels.push_back(r.u32("kernel size"));
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw DataError(r.path() + ": invalid model config: " + e.what());
  }
  ModelParams params(c);
  const auto& tensors = params.layout().tensors();
  const std::uint32_t count = r.u32("tensor count");
  if (count != tensors.size()) {
    throw DataError(r.path() + ": expected " + std::to_string(tensors.size()) + " tensors, found " +
                    std::to_string(count));
  }
  auto values = params.values();
  for (const auto& t : tensors) {
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank != t.dims.size()) throw DataError(r.path() + ": rank mismatch for " + t.name);
    for (std::size_t d : t.dims) {
      if (r.u32("tensor dim") != d) throw DataError(r.path() + ": shape mismatch for " + t.name);
    }
    r.need(t.size * 4, t.name.c_str());
    for (std::size_t i = 0; i < t.size; ++i) values[t.offset + i] = r.f32("payload");
  }
  return params;
}

}  // namespace

void write_model_checkpoint(const std::string& path, const ModelParams& params) {
  binio::Writer w;
  w.magic(kStudentMagic);
  write_body(w, params);
  w.save(path);
}

ModelParams read_model_checkpoint(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kStudentMagic);
  ModelParams p = read_body(r);
  r.expect_end();
  return p;
}

void write_teacher_checkpoint(const std::string& path, const TeacherState& teacher) {
  binio::Writer w;
  w.magic(kTeacherMagic);
  write_body(w, teacher.params);
  w.u64(teacher.iteration);
  w.f64(teacher.lambda);
  w.save(path);
}

TeacherState read_teacher_checkpoint(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kTeacherMagic);
  ModelParams p = read_body(r);
  const std::uint64_t iteration = r.u64("iteration");
  const double lambda = r.f64("lambda");
  r.expect_end();
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DataError(path + ": lambda outside [0, 1)");
  return TeacherState{std::move(p), iteration, lambda};
}

ModelParams read_any_checkpoint(const std::string& path) {
  const std::string magic = binio::Reader(path).peek_magic();
  if (magic == kTeacherMagic) return read_teacher_checkpoint(path).params;
  if (magic == kStudentMagic) return read_model_checkpoint(path);
  throw DataError(path + ": not a checkpoint (magic \"" + magic + "\")");
}

ModelParams round_to_f32(const ModelParams& params) {
  ModelParams out = params;
  for (double& v : out.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace tsseg
