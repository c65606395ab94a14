// SPDX-License-Identifier: Apache-2.0

#include "mcmg/data/dataset.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcmg/common/container.hpp"
#include "mcmg/common/error.hpp"

namespace mcmg::data {

const char* to_string(Group g) { return g == Group::kSameRegion ? "same_region" : "cross_region"; }

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Group group_of(std::span<const std::int32_t> regions) {
  for (auto r : regions) {
    if (r != regions.front()) return Group::kCrossRegion;
  }
  return Group::kSameRegion;
}

LocalTime local_time(std::int64_t timestamp, int utc_offset_minutes) {
  const std::int64_t t = timestamp + std::int64_t{utc_offset_minutes} * 60;
  std::int64_t day = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --day;
  }
  return LocalTime{day, static_cast<std::int32_t>(rem / 3600)};
}

int DistanceBuckets::bucket(double km, bool* clamped) const {
  if (clamped != nullptr) *clamped = false;
  if (km <= 0.0) return 0;
  if (km < min_km) return 1;
  if (km > max_km) {
    if (clamped != nullptr) *clamped = true;
    return count - 1;
  }
  const double span = std::log(max_km / min_km);
  const auto b = static_cast<int>(std::floor((count - 1) * std::log(km / min_km) / span));
  return 1 + std::min(b, count - 2);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::vector<const Trajectory*> Dataset::select(Split split) const {
  std::vector<const Trajectory*> out;
  for (const auto& t : trajectories) {
    if (t.split == split) out.push_back(&t);
  }
  return out;
}

std::vector<Trajectory> build_trajectories(std::span<const CheckIn> checkins,
                                           std::span<const PoiInfo> pois,
                                           std::span<const Region> regions,
                                           const IngestConfig& config, TrajectoryStats* stats) {
  TrajectoryStats local;
  std::vector<std::size_t> order(checkins.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (checkins[a].user != checkins[b].user) return checkins[a].user < checkins[b].user;
    return checkins[a].timestamp < checkins[b].timestamp;
  });

  std::vector<Trajectory> out;
  const auto max_len = static_cast<std::size_t>(config.max_len);
  auto flush = [&](Trajectory& t) {
    if (t.size() >= 2) {
      t.group = group_of(t.regions);
      out.push_back(std::move(t));
    } else if (!t.pois.empty()) {
      ++local.dropped_short;
    }
    t = Trajectory{};
  };

  Trajectory cur;
  bool truncated = false;
  for (std::size_t idx : order) {
    const CheckIn& c = checkins[idx];
    const LocalTime lt = local_time(c.timestamp, config.utc_offset_minutes);
    if (!cur.pois.empty() && (c.user != cur.user || lt.day != cur.day)) {
      flush(cur);
      truncated = false;
    }
    if (cur.pois.empty()) {
      cur.user = c.user;
      cur.day = lt.day;
    }
    if (cur.size() >= max_len) {
      if (!truncated) ++local.truncated;
      truncated = true;
      continue;
    }
    if (c.poi < 0 || static_cast<std::size_t>(c.poi) >= pois.size()) {
      throw DataError("check-in references unknown POI id " + std::to_string(c.poi));
    }
    const PoiInfo& info = pois[static_cast<std::size_t>(c.poi)];
    if (info.region < 0 || static_cast<std::size_t>(info.region) >= regions.size()) {
      throw DataError("POI id " + std::to_string(c.poi) + " has no region");
    }
    const GeoPoint here{info.latitude, info.longitude};
    const GeoPoint center = regions[static_cast<std::size_t>(info.region)].center;
    if (cur.pois.empty()) {
      cur.distance_km.push_back(0.0);
      cur.region_distance_km.push_back(0.0);
    } else {
      const PoiInfo& prev = pois[static_cast<std::size_t>(cur.pois.back())];
      const GeoPoint prev_center = regions[static_cast<std::size_t>(cur.regions.back())].center;
      cur.distance_km.push_back(haversine_km(GeoPoint{prev.latitude, prev.longitude}, here));
      cur.region_distance_km.push_back(haversine_km(prev_center, center));
    }
    cur.pois.push_back(c.poi);
    cur.categories.push_back(info.category);
    cur.regions.push_back(info.region);
    cur.hours.push_back(lt.hour);
    cur.timestamps.push_back(c.timestamp);
  }
  flush(cur);
  if (stats != nullptr) *stats = local;
  return out;
}

SplitCounts split_counts(std::size_t n, double train_ratio, double validation_ratio) {
  if (n < 3) return {};
  const auto floor_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n) + 1e-9));
  SplitCounts c;
  c.train = std::clamp<std::size_t>(floor_train, 1, n - 2);
  const std::size_t rest = n - c.train;
  const auto rounded_val = static_cast<std::size_t>(std::llround(validation_ratio * static_cast<double>(n)));
  c.validation = std::clamp<std::size_t>(rounded_val, 1, rest - 1);
  c.test = rest - c.validation;
  return c;
}

std::size_t split_dataset(std::vector<Trajectory>& trajectories, const IngestConfig& config) {
  std::vector<Trajectory> kept;
  std::size_t removed = 0;
  std::size_t i = 0;
  while (i < trajectories.size()) {
    std::size_t j = i;
    while (j < trajectories.size() && trajectories[j].user == trajectories[i].user) ++j;
    const std::size_t n = j - i;
    if (n < static_cast<std::size_t>(std::max(3, config.min_trajectories))) {
      ++removed;
    } else {
      const SplitCounts c = split_counts(n, config.train_ratio, config.validation_ratio);
      for (std::size_t k = 0; k < n; ++k) {
        Trajectory& t = trajectories[i + k];
        t.split = k < c.train ? Split::kTrain
                  : k < c.train + c.validation ? Split::kValidation
                                               : Split::kTest;
        kept.push_back(std::move(t));
      }
    }
    i = j;
  }
  trajectories = std::move(kept);
  return removed;
}

Dataset build_dataset(ParsedCheckins parsed, const IngestConfig& config) {
  if (config.max_len < 2) throw DataError("max_len must be at least 2");
  if (config.distance_buckets < 3) throw DataError("distance_buckets must be at least 3");
  Dataset ds;
  ds.config = config;
  ds.stats.data_lines = parsed.data_lines;
  ds.stats.malformed = parsed.malformed;
  if (parsed.records.empty()) throw DataError("no usable check-ins");

  std::vector<GeoPoint> points;
  points.reserve(parsed.poi_info.size());
  for (const auto& p : parsed.poi_info) points.push_back(GeoPoint{p.latitude, p.longitude});
  Clustering clusters = cluster_regions(points, config.k_regions, config.seed);
  for (std::size_t i = 0; i < parsed.poi_info.size(); ++i) parsed.poi_info[i].region = clusters.assignment[i];
  ds.stats.kmeans_iterations = clusters.iterations;

  TrajectoryStats tstats;
  ds.trajectories = build_trajectories(parsed.records, parsed.poi_info, clusters.regions, config, &tstats);
  ds.stats.dropped_short = tstats.dropped_short;
  ds.stats.truncated = tstats.truncated;
  ds.stats.users_removed = split_dataset(ds.trajectories, config);

  std::vector<double> poi_d, region_d;
  for (const auto& t : ds.trajectories) {
    if (t.split != Split::kTrain) continue;
    poi_d.insert(poi_d.end(), t.distance_km.begin() + 1, t.distance_km.end());
    region_d.insert(region_d.end(), t.region_distance_km.begin() + 1, t.region_distance_km.end());
  }
  auto make_buckets = [&](std::vector<double> values) {
    DistanceBuckets b;
    b.min_km = config.min_distance_km;
    b.count = config.distance_buckets;
    b.max_km = std::max(percentile(std::move(values), 0.99), 2.0 * config.min_distance_km);
    return b;
  };
  ds.poi_distance = make_buckets(std::move(poi_d));
  ds.region_distance = make_buckets(std::move(region_d));
  for (auto& t : ds.trajectories) {
    t.distance_bucket.resize(t.size());
    t.region_distance_bucket.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      bool c1 = false, c2 = false;
      t.distance_bucket[k] = ds.poi_distance.bucket(t.distance_km[k], &c1);
      t.region_distance_bucket[k] = ds.region_distance.bucket(t.region_distance_km[k], &c2);
      ds.stats.distances_clamped += (c1 ? 1 : 0) + (c2 ? 1 : 0);
    }
  }

  ds.users = std::move(parsed.users);
  ds.pois = std::move(parsed.pois);
  ds.categories = std::move(parsed.categories);
  ds.poi_info = std::move(parsed.poi_info);
  ds.regions = std::move(clusters.regions);
  if (ds.trajectories.empty()) {
    throw DataError("no users with at least " + std::to_string(config.min_trajectories) +
                    " trajectories remain after preprocessing");
  }
  return ds;
}

Dataset ingest(const std::filesystem::path& tsv, const IngestConfig& config) {
  ParseOptions options;
  options.max_malformed_fraction = config.max_malformed_fraction;
  ParsedCheckins parsed = parse_checkins(tsv, options);
  if (parsed.malformed > 0) {
    spdlog::warn("{} of {} lines malformed and skipped", parsed.malformed, parsed.data_lines);
    for (const auto& s : parsed.malformed_samples) spdlog::warn("  {}", s);
  }
  return build_dataset(std::move(parsed), config);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kDatasetMagic = "MCMGDATA";

void put_config(ByteWriter& w, const IngestConfig& c) {
  w.i64(c.k_regions);
  w.u64(c.seed);
  w.i64(c.max_len);
  w.i64(c.utc_offset_minutes);
  w.i64(c.distance_buckets);
  w.f64(c.min_distance_km);
  w.f64(c.train_ratio);
  w.f64(c.validation_ratio);
  w.i64(c.min_trajectories);
  w.f64(c.max_malformed_fraction);
}

IngestConfig get_config(ByteReader& r) {
  IngestConfig c;
  c.k_regions = static_cast<int>(r.i64());
  c.seed = r.u64();
  c.max_len = static_cast<int>(r.i64());
  c.utc_offset_minutes = static_cast<int>(r.i64());
  c.distance_buckets = static_cast<int>(r.i64());
  c.min_distance_km = r.f64();
  c.train_ratio = r.f64();
  c.validation_ratio = r.f64();
  c.min_trajectories = static_cast<int>(r.i64());
  c.max_malformed_fraction = r.f64();
  return c;
}

void put_vocab(ByteWriter& w, const Vocabulary& v) {
  w.u64(v.size());
  for (const auto& n : v.names()) w.str(n);
}

Vocabulary get_vocab(ByteReader& r) {
  const std::uint64_t n = r.count(4);
  std::vector<std::string> names;
  names.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) names.push_back(r.str());
  return Vocabulary::from_names(std::move(names));
}

void put_buckets(ByteWriter& w, const DistanceBuckets& b) {
  w.f64(b.min_km);
  w.f64(b.max_km);
  w.i64(b.count);
}

DistanceBuckets get_buckets(ByteReader& r) {
  DistanceBuckets b;
  b.min_km = r.f64();
  b.max_km = r.f64();
  b.count = static_cast<int>(r.i64());
  return b;
}

void expect_done(ByteReader& r) {
  if (!r.done()) r.fail("unexpected trailing bytes");
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  ContainerWriter out(kDatasetMagic, kDatasetVersion);
  {
    ByteWriter w;
    put_config(w, ds.config);
    out.add("config", w.take());
  }
  {
    ByteWriter w;
    put_vocab(w, ds.users);
    put_vocab(w, ds.pois);
    put_vocab(w, ds.categories);
    out.add("vocab", w.take());
  }
  {
    ByteWriter w;
    w.u64(ds.poi_info.size());
    for (const auto& p : ds.poi_info) {
      w.f64(p.latitude);
      w.f64(p.longitude);
      w.i64(p.category);
      w.i64(p.region);
    }
    out.add("pois", w.take());
  }
  {
    ByteWriter w;
    w.u64(ds.regions.size());
    for (const auto& r : ds.regions) {
      w.i64(r.id);
      w.f64(r.center.latitude);
      w.f64(r.center.longitude);
      w.ints<std::int32_t>(r.members);
    }
    put_buckets(w, ds.poi_distance);
    put_buckets(w, ds.region_distance);
    out.add("regions", w.take());
  }
  {
    ByteWriter w;
    w.u64(ds.trajectories.size());
    for (const auto& t : ds.trajectories) {
      w.i64(t.user);
      w.i64(t.day);
      w.u8(static_cast<std::uint8_t>(t.split));
      w.u8(static_cast<std::uint8_t>(t.group));
      w.ints<std::int32_t>(t.pois);
      w.ints<std::int32_t>(t.categories);
      w.ints<std::int32_t>(t.regions);
      w.ints<std::int32_t>(t.hours);
      w.ints<std::int64_t>(t.timestamps);
      w.f64s(t.distance_km);
      w.f64s(t.region_distance_km);
      w.ints<std::int32_t>(t.distance_bucket);
      w.ints<std::int32_t>(t.region_distance_bucket);
    }
    out.add("trajectories", w.take());
  }
  {
    ByteWriter w;
    const IngestStats& s = ds.stats;
    for (std::size_t v : {s.data_lines, s.malformed, s.dropped_short, s.truncated, s.users_removed,
                          s.distances_clamped}) {
      w.u64(v);
    }
    w.i64(s.kmeans_iterations);
    out.add("stats", w.take());
  }
  out.write(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const ContainerReader in = ContainerReader::open(path, kDatasetMagic, kDatasetVersion);
  Dataset ds;
  {
    ByteReader r = in.section("config");
    ds.config = get_config(r);
    expect_done(r);
  }
  {
    ByteReader r = in.section("vocab");
    ds.users = get_vocab(r);
    ds.pois = get_vocab(r);
    ds.categories = get_vocab(r);
    expect_done(r);
  }
  {
    ByteReader r = in.section("pois");
    const std::uint64_t n = r.count(32);
    if (n != ds.pois.size()) r.fail("POI table size does not match the vocabulary");
    ds.poi_info.resize(n);
    for (auto& p : ds.poi_info) {
      p.latitude = r.f64();
      p.longitude = r.f64();
      p.category = static_cast<std::int32_t>(r.i64());
      p.region = static_cast<std::int32_t>(r.i64());
      if (p.category < 0 || static_cast<std::size_t>(p.category) >= ds.categories.size()) {
        r.fail("POI category id out of range");
      }
    }
    expect_done(r);
  }
  {
    ByteReader r = in.section("regions");
    const std::uint64_t n = r.count(24);
    ds.regions.resize(n);
    for (auto& reg : ds.regions) {
      reg.id = static_cast<std::int32_t>(r.i64());
      reg.center.latitude = r.f64();
      reg.center.longitude = r.f64();
      reg.members = r.ints<std::int32_t>();
    }
    ds.poi_distance = get_buckets(r);
    ds.region_distance = get_buckets(r);
    expect_done(r);
    for (const auto& p : ds.poi_info) {
      if (p.region < 0 || static_cast<std::size_t>(p.region) >= ds.regions.size()) {
        r.fail("POI region id out of range");
      }
    }
  }
  {
    ByteReader r = in.section("trajectories");
    const std::uint64_t n = r.count(16);
    ds.trajectories.resize(n);
    for (auto& t : ds.trajectories) {
      t.user = static_cast<std::int32_t>(r.i64());
      t.day = r.i64();
      t.split = static_cast<Split>(r.u8());
      t.group = static_cast<Group>(r.u8());
      t.pois = r.ints<std::int32_t>();
      t.categories = r.ints<std::int32_t>();
      t.regions = r.ints<std::int32_t>();
      t.hours = r.ints<std::int32_t>();
      t.timestamps = r.ints<std::int64_t>();
      t.distance_km = r.f64s();
      t.region_distance_km = r.f64s();
      t.distance_bucket = r.ints<std::int32_t>();
      t.region_distance_bucket = r.ints<std::int32_t>();
      const std::size_t m = t.pois.size();
      if (t.categories.size() != m || t.regions.size() != m || t.hours.size() != m ||
          t.timestamps.size() != m || t.distance_km.size() != m || t.region_distance_km.size() != m ||
          t.distance_bucket.size() != m || t.region_distance_bucket.size() != m) {
        r.fail("trajectory sequences have inconsistent lengths");
      }
      if (static_cast<std::uint8_t>(t.split) > 2 || static_cast<std::uint8_t>(t.group) > 1) {
        r.fail("invalid split or group tag");
      }
      for (auto p : t.pois) {
        if (p < 0 || static_cast<std::size_t>(p) >= ds.poi_info.size()) r.fail("POI id out of range");
      }
    }
    expect_done(r);
  }
  {
    ByteReader r = in.section("stats");
    IngestStats& s = ds.stats;
    for (std::size_t* v : {&s.data_lines, &s.malformed, &s.dropped_short, &s.truncated, &s.users_removed,
                           &s.distances_clamped}) {
      *v = r.u64();
    }
    s.kmeans_iterations = static_cast<int>(r.i64());
    expect_done(r);
  }
  return ds;
}

}  // namespace mcmg::data
