#include "tsseg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "binio.hpp"

namespace fs = std::filesystem;

namespace tsseg {

namespace {

constexpr char kFeatureMagic[5] = "TSSF";
constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::uint64_t kPrototypeTag = 0x70726f746fULL;
constexpr std::uint64_t kVideoTag = 1;
constexpr std::uint64_t kStampTag = 2;

}  // namespace

void SyntheticConfig::validate() const {
  if (num_classes == 0 || feature_dim == 0) throw InvalidInput("num_classes and feature_dim must be positive");
  if (feature_dim < num_classes) {
    throw InvalidInput("feature_dim must be >= num_classes for equidistant prototypes");
  }
  if (num_videos == 0 || num_test_videos > num_videos) throw InvalidInput("invalid video counts");
  if (min_segments == 0 || min_segments > max_segments) throw InvalidInput("invalid segment count range");
  if (min_segment_length == 0 || min_segment_length > max_segment_length) {
    throw InvalidInput("invalid segment length range");
  }
  if (num_classes == 1 && min_segments >= 2) {
    throw InvalidInput("a single class cannot form two adjacent distinct segments");
  }
  if (!(prototype_separation > 0.0) || !(noise_sigma >= 0.0)) {
    throw InvalidInput("separation must be positive and sigma non-negative");
  }
}

std::mt19937_64 video_rng(std::uint64_t seed, std::size_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

MatrixD class_prototypes(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t nc = cfg.num_classes;
  const std::size_t d = cfg.feature_dim;
  auto rng = video_rng(cfg.seed, 0, kPrototypeTag);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Random orthonormal directions via Gram-Schmidt; orthonormal u_c scaled by
  // r/√2 are pairwise r apart.
  MatrixD basis(nc, d);
  for (std::size_t c = 0; c < nc; ++c) {
    for (;;) {
      auto row = basis.row(c);
      for (double& v : row) v = normal(rng);
      for (std::size_t p = 0; p < c; ++p) {
        auto prev = basis.row(p);
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += row[j] * prev[j];
        for (std::size_t j = 0; j < d; ++j) row[j] -= dot * prev[j];
      }
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-6) continue;
      for (double& v : row) v /= norm;
      break;
    }
  }
  const double unit = cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0;
  const double scale = cfg.prototype_separation * unit / std::sqrt(2.0);
  for (double& v : basis.flat()) v *= scale;
  return basis;
}

SyntheticVideo generate_video(std::mt19937_64& rng, const SyntheticConfig& cfg) {
  cfg.validate();
  const MatrixD protos = class_prototypes(cfg);
  const std::size_t nc = cfg.num_classes;
  const std::size_t d = cfg.feature_dim;

  std::uniform_int_distribution<std::size_t> seg_count(cfg.min_segments, cfg.max_segments);
  std::size_t n_seg = seg_count(rng);
  if (nc == 1) n_seg = 1;
  std::uniform_int_distribution<std::size_t> seg_len(cfg.min_segment_length, cfg.max_segment_length);
  std::uniform_int_distribution<ClassId> first_class(0, static_cast<ClassId>(nc - 1));

  FrameLabeling labels;
  ClassId prev = -1;
  for (std::size_t s = 0; s < n_seg; ++s) {
    ClassId c;
    if (prev < 0) {
      c = first_class(rng);
    } else {
      std::uniform_int_distribution<ClassId> other(0, static_cast<ClassId>(nc - 2));
      c = other(rng);
      if (c >= prev) ++c;
    }
    labels.insert(labels.end(), seg_len(rng), c);
    prev = c;
  }

  const std::size_t t_len = labels.size();
  std::normal_distribution<double> noise(0.0, 1.0);
  MatrixD raw(t_len, d);
  for (std::size_t t = 0; t < t_len; ++t) {
    auto p = protos.row(static_cast<std::size_t>(labels[t]));
    for (std::size_t j = 0; j < d; ++j) raw(t, j) = p[j] + cfg.noise_sigma * noise(rng);
  }
  MatrixF feats(t_len, d);
  const std::size_t r = cfg.smoothing_radius;
  for (std::size_t t = 0; t < t_len; ++t) {
    const std::size_t lo = t >= r ? t - r : 0;
    const std::size_t hi = std::min(t_len - 1, t + r);
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t u = lo; u <= hi; ++u) acc += raw(u, j);
      feats(t, j) = static_cast<float>(acc / static_cast<double>(hi - lo + 1));
    }
  }
  return {FeatureSequence(std::move(feats)), std::move(labels)};
}

TimestampAnnotation sample_timestamps(std::mt19937_64& rng, std::span<const ClassId> gt,
                                      bool center_biased) {
  const auto segs = segments_from_frames(gt);
  std::vector<Timestamp> stamps;
  stamps.reserve(segs.size());
  for (const auto& s : segs) {
    std::size_t lo = s.start;
    std::size_t hi = s.end;
    if (center_biased) {
      const std::size_t quarter = s.length() / 4;
      lo += quarter;
      hi -= quarter;
    }
    std::uniform_int_distribution<std::size_t> pick(lo, hi);
    stamps.push_back({pick(rng), s.label});
  }
  return TimestampAnnotation(std::move(stamps), gt.size());
}

const Video& Dataset::video(const std::string& id) const {
  for (const auto& v : videos) {
    if (v.id == id) return v;
  }
  throw DataError("unknown video id " + id);
}

std::vector<const Video*> Dataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw DataError("dataset has no split named " + name);
  std::vector<const Video*> out;
  for (const auto& id : it->second) out.push_back(&video(id));
  return out;
}

std::size_t Dataset::feature_dim() const {
  return videos.empty() ? 0 : videos.front().features.feature_dim();
}

bool Dataset::operator==(const Dataset& o) const {
  if (class_names != o.class_names || splits != o.splits || videos.size() != o.videos.size()) {
    return false;
  }
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& a = videos[i];
    const auto& b = o.videos[i];
    if (a.id != b.id || !(a.features == b.features) || a.gt != b.gt || !(a.stamps == b.stamps)) {
      return false;
    }
  }
  return true;
}

Dataset generate_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  Dataset ds;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) ds.class_names.push_back("action_" + std::to_string(c));
  auto& train = ds.splits["train"];
  auto& test = ds.splits["test"];
  const std::size_t n_train = cfg.num_videos - cfg.num_test_videos;
  for (std::size_t i = 0; i < cfg.num_videos; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "video_%03zu", i);
    auto rng = video_rng(cfg.seed, i, kVideoTag);
    auto gen = generate_video(rng, cfg);
    auto stamp_rng = video_rng(cfg.seed, i, kStampTag);
    auto stamps = sample_timestamps(stamp_rng, gen.labels, cfg.center_biased_timestamps);
    ds.videos.push_back({id, std::move(gen.features), std::move(gen.labels), std::move(stamps)});
    (i < n_train ? train : test).push_back(id);
  }
  return ds;
}

void write_features(const std::string& path, const FeatureSequence& features) {
  binio::Writer w;
  w.magic(kFeatureMagic);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(features.num_frames()));
  w.u32(static_cast<std::uint32_t>(features.feature_dim()));
  for (float v : features.values().flat()) w.f32(v);
  w.save(path);
}

FeatureSequence read_features(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic(kFeatureMagic);
  const auto version = r.u32("version");
  if (version != kFeatureVersion) {
    throw DataError(path + ": unsupported feature file version " + std::to_string(version));
  }
  const std::size_t t = r.u32("T");
  const std::size_t d = r.u32("D");
  const std::size_t expected = 16 + 4 * t * d;
  if (r.size() != expected) {
    throw DataError(path + ": expected " + std::to_string(expected) + " bytes for T=" +
                    std::to_string(t) + ", D=" + std::to_string(d) + ", found " +
                    std::to_string(r.size()));
  }
  MatrixF m(t, d);
  for (float& v : m.flat()) v = r.f32("payload");
  try {
    return FeatureSequence(std::move(m));
  } catch (const InvalidInput& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw DataError("cannot open " + p.string() + " for writing");
  return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

ClassId lookup(const std::unordered_map<std::string, ClassId>& ids, const std::string& name,
               const fs::path& file) {
  auto it = ids.find(name);
  if (it == ids.end()) throw DataError(file.string() + ": class \"" + name + "\" missing from mapping");
  return it->second;
}

}  // namespace

void write_labels(const std::string& path, std::span<const ClassId> labels,
                  const std::vector<std::string>& class_names) {
  auto out = open_out(path);
  for (ClassId c : labels) out << class_names.at(static_cast<std::size_t>(c)) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

void write_dataset(const std::string& root, const Dataset& ds) {
  const fs::path base(root);
  for (const char* sub : {"groundTruth", "timestamps", "features", "splits"}) {
    fs::create_directories(base / sub);
  }
  {
    auto out = open_out(base / "mapping.txt");
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) out << c << ' ' << ds.class_names[c] << '\n';
  }
  for (const auto& v : ds.videos) {
    write_labels((base / "groundTruth" / (v.id + ".txt")).string(), v.gt, ds.class_names);
    auto out = open_out(base / "timestamps" / (v.id + ".txt"));
    for (const auto& s : v.stamps) out << s.frame << ' ' << ds.class_names.at(static_cast<std::size_t>(s.label)) << '\n';
    write_features((base / "features" / (v.id + ".bin")).string(), v.features);
  }
  for (const auto& [name, ids] : ds.splits) {
    auto out = open_out(base / "splits" / (name + ".txt"));
    for (const auto& id : ids) out << id << '\n';
  }
}

Dataset read_dataset(const std::string& root) {
  const fs::path base(root);
  Dataset ds;
  std::unordered_map<std::string, ClassId> ids;
  const fs::path mapping = base / "mapping.txt";
  for (const auto& line : read_lines(mapping)) {
    std::istringstream ss(line);
    long id = -1;
    std::string name;
    if (!(ss >> id >> name) || id != static_cast<long>(ds.class_names.size())) {
      throw DataError(mapping.string() + ": expected consecutive \"id class_name\" lines, got \"" + line + "\"");
    }
    ids[name] = static_cast<ClassId>(id);
    ds.class_names.push_back(name);
  }
  if (ds.class_names.empty()) throw DataError(mapping.string() + ": no classes");

  const fs::path split_dir = base / "splits";
  if (!fs::is_directory(split_dir)) throw DataError("missing split directory " + split_dir.string());
  std::vector<fs::path> split_files;
  for (const auto& e : fs::directory_iterator(split_dir)) {
    if (e.path().extension() == ".txt") split_files.push_back(e.path());
  }
  std::sort(split_files.begin(), split_files.end());
  std::vector<std::string> order;
  for (const auto& p : split_files) {
    auto members = read_lines(p);
    for (const auto& id : members) {
      if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
    }
    ds.splits[p.stem().string()] = std::move(members);
  }
  std::sort(order.begin(), order.end());

  for (const auto& id : order) {
    const fs::path gt_path = base / "groundTruth" / (id + ".txt");
    const fs::path ts_path = base / "timestamps" / (id + ".txt");
    const fs::path ft_path = base / "features" / (id + ".bin");
    Video v;
    v.id = id;
    v.features = read_features(ft_path.string());
    for (const auto& name : read_lines(gt_path)) v.gt.push_back(lookup(ids, name, gt_path));
    if (v.gt.size() != v.features.num_frames()) {
      throw DataError(gt_path.string() + ": " + std::to_string(v.gt.size()) + " labels for " +
                      std::to_string(v.features.num_frames()) + " feature frames");
    }
    std::vector<Timestamp> stamps;
    for (const auto& line : read_lines(ts_path)) {
      std::istringstream ss(line);
      long frame = -1;
      std::string name;
      if (!(ss >> frame >> name) || frame < 0) {
        throw DataError(ts_path.string() + ": malformed line \"" + line + "\"");
      }
      stamps.push_back({static_cast<std::size_t>(frame), lookup(ids, name, ts_path)});
    }
    try {
      v.stamps = TimestampAnnotation(std::move(stamps), v.gt.size());
    } catch (const InvalidInput& e) {
      throw DataError(ts_path.string() + ": " + e.what());
    }
    ds.videos.push_back(std::move(v));
  }
  return ds;
}

}  // namespace tsseg
