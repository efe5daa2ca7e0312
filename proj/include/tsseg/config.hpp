#pragma once

// Flat "key = value" run configuration. '#' starts a comment; unknown keys,
// duplicate keys and malformed values are errors (InvalidInput with the line
// number). Synthetic-data keys, model keys and training keys share one file;
// the synthetic generator's seed is `data_seed`, the training seed is `seed`.

#include <string>

#include "tsseg/data.hpp"
#include "tsseg/tcn.hpp"
#include "tsseg/trainer.hpp"

namespace tsseg {

struct RunConfig {
  SyntheticConfig data;
  ModelConfig model;
  TrainConfig train;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key with its current value, parseable by parse_config.
std::string format_config(const RunConfig& cfg);

Smoothing parse_smoothing(const std::string& s);
const char* smoothing_name(Smoothing s);

}  // namespace tsseg
