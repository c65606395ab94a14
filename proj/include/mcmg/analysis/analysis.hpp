// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcmg/data/dataset.hpp"

namespace mcmg::analysis {

// A histogram over named buckets. An empty table (total 0) is valid.
struct Table {
  std::string key;
  std::vector<std::string> buckets;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  // count / total per bucket; all zeros when the table is empty.
  std::vector<double> fractions() const;
  // "bucket,count,fraction" header plus one row per bucket.
  std::string csv() const;
};

using Trajectories = std::span<const data::Trajectory* const>;

// Check-in counts gathered from the train split.
struct Popularity {
  std::size_t num_regions = 0;
  std::size_t num_categories = 0;
  std::vector<std::uint64_t> poi;                 // [L]
  std::vector<std::uint64_t> category_in_region;  // [K * C]
  std::vector<std::uint8_t> region_has_category;  // [K * C], from the POI catalog
  std::vector<std::int32_t> top_poi;              // [K * C], most visited POI of c in r, -1 if none
  std::vector<std::int32_t> user_top_region;      // [U], -1 for users without check-ins

  std::uint64_t category_count(std::int32_t region, std::int32_t category) const;
  bool has_category(std::int32_t region, std::int32_t category) const;
};

Popularity popularity(const data::Dataset& dataset);

// Personalized region order of one user: regions by descending visit count,
// ties by ascending id. rank[r] is 1-based.
std::vector<std::int32_t> personalized_rank(std::span<const std::uint64_t> region_counts);

// Trajectories per number of distinct regions, users per maximum daily
// regions, and trajectories (with at most two regions) per best personalized
// rank of a region they contain. Ranks use visit counts within `trajectories`.
std::vector<Table> region_visit_stats(Trajectories trajectories, std::size_t num_regions);

enum class ReasonMode { kInfrequentRegion, kCrossRegion };

inline constexpr const char* kReasonNames[] = {"Unsatisfied Needs", "Unpopular Category",
                                               "Unpopular POI", "Other"};

// One visit to explain: the POI that was visited, where, and the region it is
// compared against.
struct Visit {
  std::int32_t poi;
  std::int32_t category;
  std::int32_t region;
  std::int32_t reference_region;
};

// Infrequent-region mode: every check-in outside the user's top region, with
// the top region as reference. Cross-region mode: every successive pair that
// changes region, with the earlier region as reference.
std::vector<Visit> collect_visits(Trajectories trajectories, const Popularity& pop, ReasonMode mode);

// Index into kReasonNames of the first rule that applies.
int classify_reason(const Visit& visit, const Popularity& pop);

Table reason_attribution(std::span<const Visit> visits, const Popularity& pop, std::string key);

// Interval in whole hours (ceil, clamped to 1..24) between the two check-ins
// of each region-changing pair, and the 4-hour slot of the earlier one.
int interval_bucket(std::int64_t from_ts, std::int64_t to_ts);
std::vector<Table> cross_region_timing(Trajectories trajectories);

// Distance rank of the next region among all other regions (closest = 1),
// popularity rank of the next region among regions offering the next category,
// and frequent/infrequent transition types.
std::vector<Table> cross_region_choice(Trajectories trajectories, std::span<const data::Region> regions,
                                       const Popularity& pop);

struct Report {
  std::vector<Table> tables;
};

// Runs every analysis on the train split of `dataset`.
Report analyze(const data::Dataset& dataset);

std::string to_json(const Report& report);
void write_report(const Report& report, const std::filesystem::path& directory);

}  // namespace mcmg::analysis
