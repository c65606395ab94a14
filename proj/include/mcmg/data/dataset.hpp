// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcmg/data/checkin.hpp"
#include "mcmg/data/geo.hpp"

namespace mcmg::data {

enum class Group : std::uint8_t { kSameRegion = 0, kCrossRegion = 1 };
enum class Split : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

const char* to_string(Group g);
const char* to_string(Split s);

// SAME_REGION iff every region id is equal (vacuously true for one element).
Group group_of(std::span<const std::int32_t> regions);

struct IngestConfig {
  int k_regions = 9;
  std::uint64_t seed = 42;
  int max_len = 32;
  int utc_offset_minutes = 0;  // local time zone used for day boundaries and hours
  int distance_buckets = 64;
  double min_distance_km = 0.1;
  double train_ratio = 0.8;
  double validation_ratio = 0.1;
  int min_trajectories = 3;
  double max_malformed_fraction = 0.10;
};

// Maps a distance to an embedding row: bucket 0 for exactly zero, buckets
// 1..count-1 log-spaced over [min_km, max_km]. Larger distances clamp to the
// last bucket.
struct DistanceBuckets {
  double min_km = 0.1;
  double max_km = 1.0;
  int count = 64;

  int bucket(double km, bool* clamped = nullptr) const;
};

// One user-day of check-ins in chronological order, with derived sequences.
struct Trajectory {
  std::int32_t user = 0;
  std::int64_t day = 0;  // local calendar day number since the epoch
  Split split = Split::kTrain;
  Group group = Group::kSameRegion;
  std::vector<std::int32_t> pois;
  std::vector<std::int32_t> categories;
  std::vector<std::int32_t> regions;
  std::vector<std::int32_t> hours;  // local hour of day, 0..23
  std::vector<std::int64_t> timestamps;
  std::vector<double> distance_km;         // to the previous POI, 0 at k = 1
  std::vector<double> region_distance_km;  // between region centers, 0 at k = 1
  std::vector<std::int32_t> distance_bucket;
  std::vector<std::int32_t> region_distance_bucket;

  std::size_t size() const { return pois.size(); }
};

struct LocalTime {
  std::int64_t day;
  std::int32_t hour;
};
LocalTime local_time(std::int64_t timestamp, int utc_offset_minutes);

struct TrajectoryStats {
  std::size_t dropped_short = 0;
  std::size_t truncated = 0;
};

// Per user: sort by time, cut at local day boundaries, drop days with fewer
// than two check-ins, keep at most max_len check-ins per day. Output is
// ordered by user id, then day. Distance buckets are not filled here.
std::vector<Trajectory> build_trajectories(std::span<const CheckIn> checkins,
                                           std::span<const PoiInfo> pois,
                                           std::span<const Region> regions,
                                           const IngestConfig& config,
                                           TrajectoryStats* stats = nullptr);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// Chronological per-user bucket sizes for n trajectories (n >= 3): at least
// one validation and one test trajectory, the rest to train.
SplitCounts split_counts(std::size_t n, double train_ratio, double validation_ratio);

// Removes users with fewer than `min_trajectories` trajectories and tags the
// rest train/validation/test. Input must be grouped by user in chronological
// order; returns the number of users removed.
std::size_t split_dataset(std::vector<Trajectory>& trajectories, const IngestConfig& config);

struct IngestStats {
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  std::size_t dropped_short = 0;
  std::size_t truncated = 0;
  std::size_t users_removed = 0;
  std::size_t distances_clamped = 0;
  int kmeans_iterations = 0;
};

// Everything downstream stages need, persisted as one container.
struct Dataset {
  IngestConfig config;
  Vocabulary users;
  Vocabulary pois;
  Vocabulary categories;
  std::vector<PoiInfo> poi_info;
  std::vector<Region> regions;
  std::vector<Trajectory> trajectories;
  DistanceBuckets poi_distance;
  DistanceBuckets region_distance;
  IngestStats stats;

  std::size_t num_pois() const { return poi_info.size(); }
  std::size_t num_regions() const { return regions.size(); }
  std::size_t num_categories() const { return categories.size(); }
  std::vector<const Trajectory*> select(Split split) const;
};

// Nearest-rank percentile of the values (q in (0, 1]); 0 for empty input.
double percentile(std::vector<double> values, double q);

// Full pipeline: cluster POIs, build trajectories, split, fill distance
// buckets (ranges taken from the train split).
Dataset build_dataset(ParsedCheckins parsed, const IngestConfig& config);
Dataset ingest(const std::filesystem::path& tsv, const IngestConfig& config);

inline constexpr std::uint32_t kDatasetVersion = 1;
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mcmg::data
