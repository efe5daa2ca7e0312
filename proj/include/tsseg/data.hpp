#pragma once

// Synthetic piecewise-constant feature videos and the on-disk dataset layout:
//
//   <root>/mapping.txt              "id class_name" per line
//   <root>/groundTruth/<video>.txt  one class name per frame
//   <root>/timestamps/<video>.txt   "frame_index class_name" per stamp
//   <root>/features/<video>.bin     "TSSF", u32 version, u32 T, u32 D, T·D f32 (LE, row-major)
//   <root>/splits/<name>.txt        one video id per line

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tsseg/core.hpp"

namespace tsseg {

struct SyntheticConfig {
  std::size_t num_classes = 5;
  std::size_t feature_dim = 16;
  std::size_t num_videos = 60;
  std::size_t num_test_videos = 10;
  std::size_t min_segments = 8;
  std::size_t max_segments = 15;
  std::size_t min_segment_length = 15;
  std::size_t max_segment_length = 60;
  double prototype_separation = 3.0;  // pairwise prototype distance in units of noise_sigma
  double noise_sigma = 1.0;
  std::size_t smoothing_radius = 2;
  bool center_biased_timestamps = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// N_c × D matrix of class prototypes, pairwise distance separation·σ
/// (separation·1 when σ = 0). Pure function of cfg.seed.
MatrixD class_prototypes(const SyntheticConfig& cfg);

struct SyntheticVideo {
  FeatureSequence features;
  FrameLabeling labels;
};

/// Random class sequence (adjacent classes distinct) and segment lengths,
/// features = prototype + N(0, σ²) noise, then a centred moving average.
SyntheticVideo generate_video(std::mt19937_64& rng, const SyntheticConfig& cfg);

/// Uniform frame inside every maximal segment (middle half when `center_biased`).
TimestampAnnotation sample_timestamps(std::mt19937_64& rng, std::span<const ClassId> gt,
                                      bool center_biased = false);

/// Independent stream for one video derived from (seed, index, purpose tag).
std::mt19937_64 video_rng(std::uint64_t seed, std::size_t index, std::uint64_t tag);

struct Video {
  std::string id;
  FeatureSequence features;
  FrameLabeling gt;
  TimestampAnnotation stamps;
};

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<Video> videos;
  std::map<std::string, std::vector<std::string>> splits;

  const Video& video(const std::string& id) const;
  std::vector<const Video*> split(const std::string& name) const;
  std::size_t num_classes() const { return class_names.size(); }
  std::size_t feature_dim() const;
  bool operator==(const Dataset&) const;
};

/// Videos "video_000".., split "train" (first num_videos - num_test_videos)
/// and "test" (the rest).
Dataset generate_dataset(const SyntheticConfig& cfg);

void write_dataset(const std::string& root, const Dataset& ds);
/// Reads every split under <root>/splits. Throws DataError naming the offending file.
Dataset read_dataset(const std::string& root);

void write_features(const std::string& path, const FeatureSequence& features);
FeatureSequence read_features(const std::string& path);

/// One class name per line.
void write_labels(const std::string& path, std::span<const ClassId> labels,
                  const std::vector<std::string>& class_names);

}  // namespace tsseg
