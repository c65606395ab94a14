// SPDX-License-Identifier: Apache-2.0

#include "mcmg/model/batch.hpp"

#include <algorithm>

#include "mcmg/common/error.hpp"

namespace mcmg::model {

data::Group Instance::group() const {
  return data::group_of(std::span<const std::int32_t>(trajectory->regions).first(prefix));
}

std::vector<Instance> expand_prefixes(std::span<const data::Trajectory* const> trajectories) {
  std::vector<Instance> out;
  for (const data::Trajectory* t : trajectories) {
    for (std::size_t p = 1; p < t->size(); ++p) out.push_back(Instance{t, p});
  }
  return out;
}

std::vector<Instance> final_prefixes(std::span<const data::Trajectory* const> trajectories) {
  std::vector<Instance> out;
  out.reserve(trajectories.size());
  for (const data::Trajectory* t : trajectories) out.push_back(Instance{t, t->size() - 1});
  return out;
}

Batch make_batch(std::span<const Instance> instances) {
  Batch b;
  b.size = instances.size();
  for (const Instance& in : instances) {
    if (in.prefix < 1 || in.prefix > in.trajectory->size()) {
      throw ShapeError("instance prefix outside its trajectory");
    }
    b.length = std::max(b.length, in.prefix);
  }
  const std::size_t n = b.size * b.length;
  for (auto* v : {&b.poi, &b.region, &b.category, &b.hour, &b.distance, &b.region_distance, &b.position}) {
    v->assign(n, 0);
  }
  b.pad.assign(n, 1);
  for (std::size_t i = 0; i < b.size; ++i) {
    const Instance& in = instances[i];
    const data::Trajectory& t = *in.trajectory;
    for (std::size_t k = 0; k < in.prefix; ++k) {
      const std::size_t s = i * b.length + k;
      b.poi[s] = static_cast<std::size_t>(t.pois[k]);
      b.region[s] = static_cast<std::size_t>(t.regions[k]);
      b.category[s] = static_cast<std::size_t>(t.categories[k]);
      b.hour[s] = static_cast<std::size_t>(t.hours[k]);
      b.distance[s] = static_cast<std::size_t>(t.distance_bucket[k]);
      b.region_distance[s] = static_cast<std::size_t>(t.region_distance_bucket[k]);
      b.position[s] = k;
      b.pad[s] = 0;
    }
    b.lengths.push_back(in.prefix);
    b.groups.push_back(in.group());
    // A prefix covering the whole trajectory has no successor; its targets
    // are left at 0 and must not be scored.
    const std::size_t next = std::min(in.prefix, t.size() - 1);
    const bool has_target = in.prefix < t.size();
    b.target_poi.push_back(has_target ? static_cast<std::size_t>(t.pois[next]) : 0);
    b.target_region.push_back(has_target ? static_cast<std::size_t>(t.regions[next]) : 0);
    b.target_category.push_back(has_target ? static_cast<std::size_t>(t.categories[next]) : 0);
  }
  return b;
}

data::Trajectory make_trajectory(const data::Dataset& ds, std::span<const std::int32_t> pois,
                                 std::span<const std::int64_t> timestamps) {
  if (pois.empty() || pois.size() != timestamps.size()) {
    throw DataError("a prefix needs one timestamp per POI and at least one POI");
  }
  if (pois.size() > static_cast<std::size_t>(ds.config.max_len)) {
    throw DataError("prefix is longer than the maximum trajectory length " + std::to_string(ds.config.max_len));
  }
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (pois[i] < 0 || static_cast<std::size_t>(pois[i]) >= ds.num_pois()) throw DataError("unknown POI id");
    if (i > 0 && timestamps[i] < timestamps[i - 1]) throw DataError("prefix timestamps must be non-decreasing");
  }
  data::Trajectory t;
  t.pois.assign(pois.begin(), pois.end());
  t.timestamps.assign(timestamps.begin(), timestamps.end());
  for (std::size_t i = 0; i < pois.size(); ++i) {
    const data::PoiInfo& info = ds.poi_info[static_cast<std::size_t>(pois[i])];
    t.categories.push_back(info.category);
    t.regions.push_back(info.region);
    t.hours.push_back(data::local_time(timestamps[i], ds.config.utc_offset_minutes).hour);
    double d = 0.0, rd = 0.0;
    if (i > 0) {
      const data::PoiInfo& prev = ds.poi_info[static_cast<std::size_t>(pois[i - 1])];
      d = data::haversine_km({prev.latitude, prev.longitude}, {info.latitude, info.longitude});
      rd = data::haversine_km(ds.regions[static_cast<std::size_t>(prev.region)].center,
                              ds.regions[static_cast<std::size_t>(info.region)].center);
    }
    t.distance_km.push_back(d);
    t.region_distance_km.push_back(rd);
    t.distance_bucket.push_back(ds.poi_distance.bucket(d));
    t.region_distance_bucket.push_back(ds.region_distance.bucket(rd));
  }
  t.group = data::group_of(t.regions);
  return t;
}

}  // namespace mcmg::model
