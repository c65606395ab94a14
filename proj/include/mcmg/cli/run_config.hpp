// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mcmg/data/dataset.hpp"
#include "mcmg/train/trainer.hpp"

namespace mcmg::cli {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kConfigEnv = "MCMG_CONFIG";

// Everything a run depends on. Loaded from a JSON document, then overridden
// by command-line flags.
struct RunConfig {
  data::IngestConfig ingest;
  train::TrainConfig train;
  std::size_t num_seeds = 5;
  std::vector<std::size_t> cutoffs = {5, 10};
  // Input and output locations of the run that wrote the file. Recorded for
  // reference; flags always decide the paths of a new run.
  std::map<std::string, std::string> paths;
};

// Unknown keys and a version mismatch are rejected with std::invalid_argument.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

}  // namespace mcmg::cli
