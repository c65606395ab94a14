// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcmg/common/rng.hpp"

namespace mcmg::data {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
};

// Great-circle distance in kilometres.
double haversine_km(GeoPoint a, GeoPoint b);

struct Region {
  std::int32_t id = 0;
  GeoPoint center;                  // mean of member coordinates
  std::vector<std::int32_t> members;  // POI ids, ascending
};

struct Clustering {
  std::vector<Region> regions;
  std::vector<std::int32_t> assignment;  // region id per input point
  int iterations = 0;
};

inline constexpr int kMaxKMeansIterations = 300;

// Lloyd's k-means on raw (lat, lon) with k-means++ seeding. Stops when
// assignments no longer change or after kMaxKMeansIterations. Ties go to the
// lower centroid index. An empty cluster is re-seeded at the point farthest
// from its nearest centroid.
Clustering cluster_regions(std::span<const GeoPoint> points, int k, std::uint64_t seed);

}  // namespace mcmg::data
