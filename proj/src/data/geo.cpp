// SPDX-License-Identifier: Apache-2.0

#include "mcmg/data/geo.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mcmg/common/error.hpp"

namespace mcmg::data {
namespace {

double squared_distance(GeoPoint a, GeoPoint b) {
  const double dl = a.latitude - b.latitude;
  const double dg = a.longitude - b.longitude;
  return dl * dl + dg * dg;
}

std::size_t nearest(GeoPoint p, const std::vector<GeoPoint>& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

std::vector<GeoPoint> seed_plus_plus(std::span<const GeoPoint> points, std::size_t k, Rng& rng) {
  std::vector<GeoPoint> centroids;
  centroids.push_back(points[rng.below(points.size())]);
  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest(points[i], centroids, &d2[i]);
      total += d2[i];
    }
    if (total <= 0.0) {
      centroids.push_back(points[rng.below(points.size())]);
      continue;
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

}  // namespace

double haversine_km(GeoPoint a, GeoPoint b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.latitude * kRad;
  const double phi2 = b.latitude * kRad;
  const double dphi = (b.latitude - a.latitude) * kRad;
  const double dlambda = (b.longitude - a.longitude) * kRad;
  const double s = std::sin(dphi / 2.0);
  const double t = std::sin(dlambda / 2.0);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Clustering cluster_regions(std::span<const GeoPoint> points, int k, std::uint64_t seed) {
  if (k < 1) throw DataError("k-means: k must be at least 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw DataError("k-means: k=" + std::to_string(k) + " exceeds the " +
                    std::to_string(points.size()) + " available POIs");
  }
  const std::size_t K = static_cast<std::size_t>(k);
  Rng rng(seed);
  std::vector<GeoPoint> centroids = seed_plus_plus(points, K, rng);
  std::vector<std::int32_t> assignment(points.size(), -1);

  Clustering out;
  for (int iter = 1; iter <= kMaxKMeansIterations; ++iter) {
    out.iterations = iter;
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::int32_t>(nearest(points[i], centroids));
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    // Re-seed empty clusters at the worst-served point.
    std::vector<std::size_t> sizes(K, 0);
    for (auto a : assignment) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < K; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[static_cast<std::size_t>(assignment[i])] <= 1) continue;
        const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --sizes[static_cast<std::size_t>(assignment[far])];
      assignment[far] = static_cast<std::int32_t>(c);
      sizes[c] = 1;
      centroids[c] = points[far];
      changed = true;
    }
    if (!changed) break;
    std::vector<GeoPoint> sums(K);
    for (std::size_t i = 0; i < points.size(); ++i) {
      GeoPoint& s = sums[static_cast<std::size_t>(assignment[i])];
      s.latitude += points[i].latitude;
      s.longitude += points[i].longitude;
    }
    for (std::size_t c = 0; c < K; ++c) {
      if (sizes[c] == 0) continue;
      centroids[c] = GeoPoint{sums[c].latitude / static_cast<double>(sizes[c]),
                              sums[c].longitude / static_cast<double>(sizes[c])};
    }
  }

  out.assignment = assignment;
  out.regions.resize(K);
  for (std::size_t c = 0; c < K; ++c) out.regions[c].id = static_cast<std::int32_t>(c);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.regions[static_cast<std::size_t>(assignment[i])].members.push_back(static_cast<std::int32_t>(i));
  }
  for (Region& r : out.regions) {
    double lat = 0.0, lon = 0.0;
    for (auto m : r.members) {
      lat += points[static_cast<std::size_t>(m)].latitude;
      lon += points[static_cast<std::size_t>(m)].longitude;
    }
    if (!r.members.empty()) {
      r.center = GeoPoint{lat / static_cast<double>(r.members.size()), lon / static_cast<double>(r.members.size())};
    } else {
      r.center = centroids[static_cast<std::size_t>(r.id)];
    }
  }
  return out;
}

}  // namespace mcmg::data
