// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace mcmg::data {

// Parameters of a generated check-in corpus. POIs sit in well separated
// clusters on a grid, so k-means with k = num_regions recovers the layout.
struct SynthConfig {
  int num_users = 40;
  int num_regions = 9;
  int pois_per_region = 6;
  int num_categories = 5;
  int days_per_user = 6;
  int min_len = 2;
  int max_len = 6;
  // Random mode: probability that the next check-in stays in the current
  // region. Unused in cycle mode.
  double stay_probability = 0.75;
  // Cycle mode: the POIs of each region form a fixed cycle and users never
  // leave their home region, so the next POI is a function of the current one.
  bool cycle = false;
  std::uint64_t seed = 7;
  double center_latitude = 34.05;
  double center_longitude = -118.25;
  double spacing_degrees = 0.08;
  double jitter_degrees = 0.01;
  std::int64_t start_epoch = 1333238400;  // 2012-04-01T00:00:00Z
};

// Tab-separated check-ins: user, poi, category, latitude, longitude, epoch seconds.
std::string synth_city_tsv(const SynthConfig& config);
void write_synth_city(const SynthConfig& config, const std::filesystem::path& path);

}  // namespace mcmg::data
