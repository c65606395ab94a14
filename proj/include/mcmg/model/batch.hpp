// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcmg/data/dataset.hpp"

namespace mcmg::model {

// Predict check-in `prefix` of `trajectory` from the ones before it.
struct Instance {
  const data::Trajectory* trajectory = nullptr;
  std::size_t prefix = 0;  // number of observed check-ins, >= 1

  data::Group group() const;
};

// Prefixes 1..m-1 of every trajectory.
std::vector<Instance> expand_prefixes(std::span<const data::Trajectory* const> trajectories);
// Only the full prefix (m-1) of every trajectory.
std::vector<Instance> final_prefixes(std::span<const data::Trajectory* const> trajectories);

// Padded batch in [B, T] row-major layout. Padding slots hold id 0 and have
// pad = 1.
struct Batch {
  std::size_t size = 0;    // B
  std::size_t length = 0;  // T
  std::vector<std::size_t> poi, region, category, hour, distance, region_distance, position;
  std::vector<std::uint8_t> pad;
  std::vector<std::size_t> lengths;
  std::vector<data::Group> groups;
  std::vector<std::size_t> target_poi, target_region, target_category;
};

Batch make_batch(std::span<const Instance> instances);

// Builds a trajectory for an arbitrary sequence of POI ids and timestamps,
// with regions, hours and distance buckets derived as at ingest.
data::Trajectory make_trajectory(const data::Dataset& dataset, std::span<const std::int32_t> pois,
                                 std::span<const std::int64_t> timestamps);

}  // namespace mcmg::model
