// SPDX-License-Identifier: Apache-2.0

#include "mcmg/data/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "mcmg/common/error.hpp"
#include "mcmg/common/rng.hpp"

namespace mcmg::data {
namespace {

struct SynthPoi {
  int region;
  int category;
  double latitude;
  double longitude;
  double weight;
};

int pick_weighted(const std::vector<int>& ids, const std::vector<SynthPoi>& pois, Rng& rng) {
  double total = 0.0;
  for (int id : ids) total += pois[static_cast<std::size_t>(id)].weight;
  double target = rng.uniform() * total;
  for (int id : ids) {
    target -= pois[static_cast<std::size_t>(id)].weight;
    if (target < 0.0) return id;
  }
  return ids.back();
}

}  // namespace

std::string synth_city_tsv(const SynthConfig& cfg) {
  if (cfg.num_users < 1 || cfg.num_regions < 1 || cfg.pois_per_region < 1 || cfg.num_categories < 1 ||
      cfg.days_per_user < 1 || cfg.min_len < 2 || cfg.max_len < cfg.min_len) {
    throw DataError("synthetic city: invalid size parameters");
  }
  Rng rng(cfg.seed);
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.num_regions))));

  std::vector<SynthPoi> pois;
  std::vector<std::vector<int>> by_region(static_cast<std::size_t>(cfg.num_regions));
  for (int r = 0; r < cfg.num_regions; ++r) {
    const double lat = cfg.center_latitude + cfg.spacing_degrees * (r / grid - (grid - 1) / 2.0);
    const double lon = cfg.center_longitude + cfg.spacing_degrees * (r % grid - (grid - 1) / 2.0);
    for (int i = 0; i < cfg.pois_per_region; ++i) {
      SynthPoi p;
      p.region = r;
      p.category = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_categories)));
      p.latitude = lat + rng.uniform(-cfg.jitter_degrees, cfg.jitter_degrees);
      p.longitude = lon + rng.uniform(-cfg.jitter_degrees, cfg.jitter_degrees);
      p.weight = 1.0 / static_cast<double>(i + 1);
      by_region[static_cast<std::size_t>(r)].push_back(static_cast<int>(pois.size()));
      pois.push_back(p);
    }
  }
  std::string out;
  for (int u = 0; u < cfg.num_users; ++u) {
    const int home = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_regions)));
    for (int day = 0; day < cfg.days_per_user; ++day) {
      const int len = cfg.min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_len - cfg.min_len + 1)));
      std::int64_t ts = cfg.start_epoch + std::int64_t{day} * 86400 + 8 * 3600 +
                        static_cast<std::int64_t>(rng.below(3600));
      const std::int64_t day_end = cfg.start_epoch + std::int64_t{day + 1} * 86400 - 60;
      int poi = pick_weighted(by_region[static_cast<std::size_t>(home)], pois, rng);
      for (int k = 0; k < len && ts < day_end; ++k) {
        const SynthPoi& p = pois[static_cast<std::size_t>(poi)];
        out += fmt::format("u{:03d}\tp{:03d}\tc{:02d}\t{:.6f}\t{:.6f}\t{}\n", u, poi, p.category, p.latitude,
                           p.longitude, ts);
        ts += 20 * 60 + static_cast<std::int64_t>(rng.below(160 * 60));
        if (cfg.cycle) {
          const auto& ring = by_region[static_cast<std::size_t>(p.region)];
          const auto at = static_cast<std::size_t>(poi - ring.front());
          poi = ring[(at + 1) % ring.size()];
        } else if (rng.uniform() < cfg.stay_probability || cfg.num_regions == 1) {
          poi = pick_weighted(by_region[static_cast<std::size_t>(p.region)], pois, rng);
        } else {
          int next = home;
          if (p.region == home || rng.uniform() < 0.5) {
            next = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_regions - 1)));
            if (next >= p.region) ++next;
          }
          poi = pick_weighted(by_region[static_cast<std::size_t>(next)], pois, rng);
        }
      }
    }
  }
  return out;
}

void write_synth_city(const SynthConfig& config, const std::filesystem::path& path) {
  const std::string text = synth_city_tsv(config);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

}  // namespace mcmg::data
