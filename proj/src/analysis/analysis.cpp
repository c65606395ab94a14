// SPDX-License-Identifier: Apache-2.0

#include "mcmg/analysis/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>
#include <numeric>
#include <set>

#include "mcmg/common/error.hpp"

namespace mcmg::analysis {

using data::Trajectory;

std::uint64_t Table::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::vector<double> Table::fractions() const {
  const std::uint64_t t = total();
  std::vector<double> out(counts.size(), 0.0);
  if (t == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(t);
  }
  return out;
}

std::string Table::csv() const {
  std::string out = "bucket,count,fraction\n";
  const auto f = fractions();
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    out += fmt::format("{},{},{}\n", buckets[i], counts[i], f[i]);
  }
  return out;
}

std::uint64_t Popularity::category_count(std::int32_t region, std::int32_t category) const {
  return category_in_region[static_cast<std::size_t>(region) * num_categories + static_cast<std::size_t>(category)];
}

bool Popularity::has_category(std::int32_t region, std::int32_t category) const {
  return region_has_category[static_cast<std::size_t>(region) * num_categories +
                             static_cast<std::size_t>(category)] != 0;
}

Popularity popularity(const data::Dataset& ds) {
  Popularity pop;
  const std::size_t K = ds.num_regions();
  const std::size_t C = ds.num_categories();
  pop.num_regions = K;
  pop.num_categories = C;
  pop.poi.assign(ds.num_pois(), 0);
  pop.category_in_region.assign(K * C, 0);
  pop.region_has_category.assign(K * C, 0);
  pop.top_poi.assign(K * C, -1);

  std::vector<std::vector<std::uint64_t>> user_regions(ds.users.size(), std::vector<std::uint64_t>(K, 0));
  for (const auto& t : ds.trajectories) {
    if (t.split != data::Split::kTrain) continue;
    for (std::size_t k = 0; k < t.size(); ++k) {
      ++pop.poi[static_cast<std::size_t>(t.pois[k])];
      ++user_regions[static_cast<std::size_t>(t.user)][static_cast<std::size_t>(t.regions[k])];
    }
  }
  for (std::size_t l = 0; l < ds.num_pois(); ++l) {
    const auto& info = ds.poi_info[l];
    const std::size_t cell = static_cast<std::size_t>(info.region) * C + static_cast<std::size_t>(info.category);
    pop.region_has_category[cell] = 1;
    pop.category_in_region[cell] += pop.poi[l];
    const std::int32_t best = pop.top_poi[cell];
    if (best < 0 || pop.poi[l] > pop.poi[static_cast<std::size_t>(best)]) {
      pop.top_poi[cell] = static_cast<std::int32_t>(l);
    }
  }
  pop.user_top_region.assign(ds.users.size(), -1);
  for (std::size_t u = 0; u < user_regions.size(); ++u) {
    const auto& counts = user_regions[u];
    const auto it = std::max_element(counts.begin(), counts.end());
    if (it != counts.end() && *it > 0) pop.user_top_region[u] = static_cast<std::int32_t>(it - counts.begin());
  }
  return pop;
}

std::vector<std::int32_t> personalized_rank(std::span<const std::uint64_t> region_counts) {
  std::vector<std::int32_t> order(region_counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return region_counts[static_cast<std::size_t>(a)] > region_counts[static_cast<std::size_t>(b)];
  });
  std::vector<std::int32_t> rank(region_counts.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<std::int32_t>(i + 1);
  return rank;
}

namespace {

Table numbered(std::string key, std::size_t n) {
  Table t;
  t.key = std::move(key);
  for (std::size_t i = 1; i <= n; ++i) t.buckets.push_back(std::to_string(i));
  t.counts.assign(n, 0);
  return t;
}

std::size_t distinct(std::span<const std::int32_t> regions) {
  return std::set<std::int32_t>(regions.begin(), regions.end()).size();
}

template <typename Fn>
void for_each_cross_pair(Trajectories trajectories, Fn&& fn) {
  for (const Trajectory* t : trajectories) {
    for (std::size_t k = 1; k < t->size(); ++k) {
      if (t->regions[k] != t->regions[k - 1]) fn(*t, k);
    }
  }
}

}  // namespace

std::vector<Table> region_visit_stats(Trajectories trajectories, std::size_t num_regions) {
  Table per_traj = numbered("q1_regions_per_trajectory", num_regions);
  Table per_user = numbered("q1_user_max_regions", num_regions);
  Table ranks = numbered("q1_personalized_rank", num_regions);

  std::map<std::int32_t, std::vector<std::uint64_t>> visits;
  std::map<std::int32_t, std::size_t> max_regions;
  for (const Trajectory* t : trajectories) {
    auto& v = visits[t->user];
    v.resize(num_regions, 0);
    for (auto r : t->regions) ++v[static_cast<std::size_t>(r)];
    const std::size_t n = distinct(t->regions);
    ++per_traj.counts[n - 1];
    auto& m = max_regions[t->user];
    m = std::max(m, n);
  }
  for (const auto& [user, m] : max_regions) ++per_user.counts[m - 1];

  std::map<std::int32_t, std::vector<std::int32_t>> rank_of;
  for (const auto& [user, counts] : visits) rank_of[user] = personalized_rank(counts);
  for (const Trajectory* t : trajectories) {
    if (distinct(t->regions) > 2) continue;
    const auto& rank = rank_of.at(t->user);
    std::int32_t best = static_cast<std::int32_t>(num_regions);
    for (auto r : t->regions) best = std::min(best, rank[static_cast<std::size_t>(r)]);
    ++ranks.counts[static_cast<std::size_t>(best - 1)];
  }
  return {per_traj, per_user, ranks};
}

std::vector<Visit> collect_visits(Trajectories trajectories, const Popularity& pop, ReasonMode mode) {
  std::vector<Visit> out;
  if (mode == ReasonMode::kInfrequentRegion) {
    for (const Trajectory* t : trajectories) {
      const std::int32_t top = pop.user_top_region.at(static_cast<std::size_t>(t->user));
      if (top < 0) continue;
      for (std::size_t k = 0; k < t->size(); ++k) {
        if (t->regions[k] != top) out.push_back(Visit{t->pois[k], t->categories[k], t->regions[k], top});
      }
    }
  } else {
    for_each_cross_pair(trajectories, [&](const Trajectory& t, std::size_t k) {
      out.push_back(Visit{t.pois[k], t.categories[k], t.regions[k], t.regions[k - 1]});
    });
  }
  return out;
}

int classify_reason(const Visit& v, const Popularity& pop) {
  if (!pop.has_category(v.reference_region, v.category)) return 0;
  if (pop.category_count(v.reference_region, v.category) < pop.category_count(v.region, v.category)) return 1;
  const std::int32_t top = pop.top_poi[static_cast<std::size_t>(v.reference_region) * pop.num_categories +
                                       static_cast<std::size_t>(v.category)];
  if (pop.poi[static_cast<std::size_t>(top)] < pop.poi[static_cast<std::size_t>(v.poi)]) return 2;
  return 3;
}

Table reason_attribution(std::span<const Visit> visits, const Popularity& pop, std::string key) {
  Table t;
  t.key = std::move(key);
  t.buckets.assign(std::begin(kReasonNames), std::end(kReasonNames));
  t.counts.assign(t.buckets.size(), 0);
  for (const Visit& v : visits) ++t.counts[static_cast<std::size_t>(classify_reason(v, pop))];
  return t;
}

int interval_bucket(std::int64_t from_ts, std::int64_t to_ts) {
  const std::int64_t seconds = std::max<std::int64_t>(0, to_ts - from_ts);
  const std::int64_t hours = (seconds + 3599) / 3600;
  return static_cast<int>(std::clamp<std::int64_t>(hours, 1, 24));
}

std::vector<Table> cross_region_timing(Trajectories trajectories) {
  Table interval = numbered("q4_interval_hours", 24);
  Table slot;
  slot.key = "q4_time_slot";
  for (int s = 0; s < 6; ++s) slot.buckets.push_back(fmt::format("{}-{}", 4 * s, 4 * s + 4));
  slot.counts.assign(6, 0);
  for_each_cross_pair(trajectories, [&](const Trajectory& t, std::size_t k) {
    ++interval.counts[static_cast<std::size_t>(interval_bucket(t.timestamps[k - 1], t.timestamps[k]) - 1)];
    ++slot.counts[static_cast<std::size_t>(t.hours[k - 1] / 4)];
  });
  return {interval, slot};
}

std::vector<Table> cross_region_choice(Trajectories trajectories, std::span<const data::Region> regions,
                                       const Popularity& pop) {
  const std::size_t K = regions.size();
  Table distance = numbered("q5_distance_rank", K > 0 ? K - 1 : 0);
  Table popular = numbered("q5_popularity_rank", K);
  Table transition;
  transition.key = "q5_transition";
  transition.buckets = {"fre->inf", "inf->fre", "inf->inf", "fre->fre"};
  transition.counts.assign(4, 0);

  std::vector<double> dist(K * K);
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) dist[a * K + b] = data::haversine_km(regions[a].center, regions[b].center);
  }

  for_each_cross_pair(trajectories, [&](const Trajectory& t, std::size_t k) {
    const auto from = static_cast<std::size_t>(t.regions[k - 1]);
    const auto to = static_cast<std::size_t>(t.regions[k]);
    std::size_t rank = 1;
    for (std::size_t r = 0; r < K; ++r) {
      if (r == from || r == to) continue;
      const double d = dist[from * K + r];
      const double target = dist[from * K + to];
      if (d < target || (d == target && r < to)) ++rank;
    }
    ++distance.counts[rank - 1];

    const std::int32_t c = t.categories[k];
    const std::uint64_t target_pop = pop.category_count(t.regions[k], c);
    rank = 1;
    for (std::size_t r = 0; r < K; ++r) {
      const auto rr = static_cast<std::int32_t>(r);
      if (r == to || !pop.has_category(rr, c)) continue;
      const std::uint64_t p = pop.category_count(rr, c);
      if (p > target_pop || (p == target_pop && r < to)) ++rank;
    }
    ++popular.counts[rank - 1];

    const std::int32_t top = pop.user_top_region.at(static_cast<std::size_t>(t.user));
    const bool from_fre = t.regions[k - 1] == top;
    const bool to_fre = t.regions[k] == top;
    const std::size_t type = from_fre ? (to_fre ? 3 : 0) : (to_fre ? 1 : 2);
    ++transition.counts[type];
  });
  return {distance, popular, transition};
}

Report analyze(const data::Dataset& ds) {
  const auto train = ds.select(data::Split::kTrain);
  if (train.empty()) throw DataError("analysis needs a non-empty train split");
  const Popularity pop = popularity(ds);
  Report report;
  auto append = [&](std::vector<Table> tables) {
    for (auto& t : tables) report.tables.push_back(std::move(t));
  };
  append(region_visit_stats(train, ds.num_regions()));
  const auto infrequent = collect_visits(train, pop, ReasonMode::kInfrequentRegion);
  const auto crossing = collect_visits(train, pop, ReasonMode::kCrossRegion);
  report.tables.push_back(reason_attribution(infrequent, pop, "q2_infrequent_region_reasons"));
  report.tables.push_back(reason_attribution(crossing, pop, "q3_cross_region_reasons"));
  append(cross_region_timing(train));
  append(cross_region_choice(train, ds.regions, pop));
  return report;
}

std::string to_json(const Report& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const Table& t : report.tables) {
    nlohmann::ordered_json entry;
    entry["buckets"] = t.buckets;
    entry["counts"] = t.counts;
    entry["fractions"] = t.fractions();
    entry["total"] = t.total();
    doc[t.key] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

void write_report(const Report& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write '" + path.string() + "'");
  };
  for (const Table& t : report.tables) write(directory / (t.key + ".csv"), t.csv());
  write(directory / "analysis.json", to_json(report));
}

}  // namespace mcmg::analysis
