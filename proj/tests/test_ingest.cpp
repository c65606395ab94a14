// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>

#include "mcmg/common/container.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/data/dataset.hpp"
#include "mcmg/data/geo.hpp"
#include "mcmg/data/synth.hpp"
#include "mcmg/selftest/selftest.hpp"
#include "test_util.hpp"

using namespace mcmg;
using namespace mcmg::data;

TEST_SUITE("ingest") {
  TEST_CASE("haversine distances") {
    CHECK(haversine_km({34.0, -118.0}, {34.0, -118.0}) == 0.0);
    // One degree of latitude on the mean-radius sphere.
    CHECK(haversine_km({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(kEarthRadiusKm * M_PI / 180.0));
    CHECK(haversine_km({0.0, 179.5}, {0.0, -179.5}) == doctest::Approx(kEarthRadiusKm * M_PI / 180.0));
  }

  TEST_CASE("iso timestamps") {
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601("2012-04-01T00:00:00Z") == 1333238400);
    CHECK(parse_iso8601("2012-04-01T02:00:00+02:00") == 1333238400);
    CHECK_FALSE(parse_iso8601("2012-02-30T00:00:00Z"));
    CHECK_FALSE(parse_iso8601("yesterday"));
  }

  TEST_CASE("local time uses floor division") {
    CHECK(local_time(0, 0).day == 0);
    CHECK(local_time(-1, 0).day == -1);
    CHECK(local_time(-1, 0).hour == 23);
    CHECK(local_time(3600 * 5, -480).day == -1);
    CHECK(local_time(3600 * 5, -480).hour == 21);
    CHECK(local_time(86400 + 3600 * 13 + 59, 60).hour == 14);
  }

  TEST_CASE("parser accepts epoch and iso files and counts malformed lines") {
    const auto p = parse_checkins_text(
        "# comment\n"
        "u1\tp1\tcafe\t34.0\t-118.0\t1333238400\n"
        "u1\tp2\tbar\t34.1\t-118.1\t1333242000\r\n"
        "\n"
        "u2\tp1\tother\t40.0\t-70.0\t1333245600\n");
    CHECK(p.data_lines == 3);
    CHECK(p.malformed == 0);
    CHECK(p.records.size() == 3);
    CHECK(p.format == TimestampFormat::kEpochSeconds);
    // A POI keeps its first category and coordinates.
    CHECK(p.records[2].category == p.records[0].category);
    CHECK(p.records[2].latitude == 34.0);

    const auto iso = parse_checkins_text("u\tp\tc\t1\t2\t2012-04-01T00:00:00Z\n");
    CHECK(iso.format == TimestampFormat::kIso8601);
    CHECK(iso.records[0].timestamp == 1333238400);

    std::string text;
    for (int i = 0; i < 20; ++i) text += fmt::format("u\tp{}\tc\t1\t2\t{}\n", i, 1000 + i);
    text += "u\tp\tc\t1\t2\n";
    text += "u\tp\tc\t100\t2\t5\n";
    const auto lenient = parse_checkins_text(text);
    CHECK(lenient.malformed == 2);
    CHECK(lenient.records.size() == 20);
    CHECK(lenient.malformed_samples.size() == 2);
  }

  TEST_CASE("parser rejects broken files") {
    CHECK_THROWS_AS(parse_checkins_text("a\tb\n c\n"), DataError);
    CHECK_THROWS_AS(parse_checkins_text("u\tp\tc\t\t\t5\n"), DataError);
    CHECK_THROWS_AS(parse_checkins_text("u\tp\tc\t1\t2\t5\nu\tq\tc\t1\t2\t2012-04-01T00:00:00Z\n"), DataError);
    CHECK_THROWS_AS(parse_checkins(std::filesystem::path("/nonexistent/checkins.tsv")), DataError);
  }

  TEST_CASE("k-means separates well spaced blobs") {
    Rng rng(2);
    std::vector<GeoPoint> points;
    const GeoPoint centers[3] = {{10.0, 10.0}, {10.0, 12.0}, {12.0, 11.0}};
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 30; ++i) {
        points.push_back({centers[c].latitude + rng.uniform(-0.05, 0.05),
                          centers[c].longitude + rng.uniform(-0.05, 0.05)});
      }
    }
    const Clustering cl = cluster_regions(points, 3, 5);
    REQUIRE(cl.regions.size() == 3);
    for (int c = 0; c < 3; ++c) {
      const std::int32_t r = cl.assignment[static_cast<std::size_t>(c * 30)];
      for (int i = 0; i < 30; ++i) CHECK(cl.assignment[static_cast<std::size_t>(c * 30 + i)] == r);
      CHECK(haversine_km(cl.regions[static_cast<std::size_t>(r)].center, centers[c]) < 5.0);
      CHECK(cl.regions[static_cast<std::size_t>(r)].members.size() == 30);
    }
    const Clustering again = cluster_regions(points, 3, 5);
    CHECK(again.assignment == cl.assignment);
    CHECK_THROWS_AS(cluster_regions(points, 0, 1), DataError);
    CHECK_THROWS_AS(cluster_regions(std::span(points).first(2), 3, 1), DataError);
  }

  TEST_CASE("k-means on one point per cluster") {
    const std::vector<GeoPoint> points = {{0, 0}, {1, 1}, {2, 2}};
    const Clustering cl = cluster_regions(points, 3, 1);
    std::vector<std::int32_t> seen(cl.assignment);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<std::int32_t>{0, 1, 2});
  }

  TEST_CASE("distance buckets") {
    const DistanceBuckets b{0.1, 10.0, 5};
    bool clamped = false;
    CHECK(b.bucket(0.0) == 0);
    CHECK(b.bucket(0.05) == 1);
    CHECK(b.bucket(0.1) == 1);
    CHECK(b.bucket(0.5) == 2);
    CHECK(b.bucket(1.0) == 3);
    CHECK(b.bucket(9.99) == 4);
    CHECK(b.bucket(10.0, &clamped) == 4);
    CHECK_FALSE(clamped);
    CHECK(b.bucket(500.0, &clamped) == 4);
    CHECK(clamped);
    int last = 0;
    for (double km = 0.0; km < 20.0; km += 0.01) {
      const int k = b.bucket(km);
      CHECK(k >= last);
      CHECK(k < b.count);
      last = k;
    }
  }

  TEST_CASE("split counts") {
    auto check = [](std::size_t n, std::size_t tr, std::size_t va, std::size_t te) {
      const SplitCounts s = split_counts(n, 0.8, 0.1);
      CAPTURE(n);
      CHECK(s.train == tr);
      CHECK(s.validation == va);
      CHECK(s.test == te);
    };
    check(10, 8, 1, 1);
    check(3, 1, 1, 1);
    check(4, 2, 1, 1);
    check(5, 3, 1, 1);
    check(20, 16, 2, 2);
    for (std::size_t n = 3; n < 200; ++n) {
      const SplitCounts s = split_counts(n, 0.8, 0.1);
      CHECK(s.train + s.validation + s.test == n);
      CHECK(s.train >= 1);
      CHECK(s.validation >= 1);
      CHECK(s.test >= 1);
    }
  }

  TEST_CASE("percentile uses nearest rank") {
    CHECK(percentile({5, 1, 3, 2, 4}, 0.5) == 3);
    CHECK(percentile({5, 1, 3, 2, 4}, 0.99) == 5);
    CHECK(percentile({7}, 0.99) == 7);
  }

  TEST_CASE("trajectories are cut at local days and truncated") {
    std::vector<PoiInfo> pois = {{0, 0, 0, 0}, {0, 0.01, 1, 0}, {1, 1, 0, 1}};
    std::vector<Region> regions(2);
    regions[0] = Region{0, {0, 0.005}, {0, 1}};
    regions[1] = Region{1, {1, 1}, {2}};
    const std::int64_t d0 = 1333238400;
    std::vector<CheckIn> c = {
        {0, 0, d0 + 3600, 0, 0, 0},        {0, 1, d0 + 7200, 1, 0, 0.01},     {0, 2, d0 + 10800, 0, 1, 1},
        {0, 1, d0 + 86400 + 60, 1, 0, 0.01}, {1, 0, d0 + 100, 0, 0, 0},       {1, 1, d0 + 86399, 1, 0, 0.01},
        {0, 0, d0 + 2 * 86400, 0, 0, 0},   {0, 1, d0 + 2 * 86400 + 1, 1, 0, 0.01},
    };
    IngestConfig cfg;
    cfg.max_len = 2;
    TrajectoryStats stats;
    auto ts = build_trajectories(c, pois, regions, cfg, &stats);
    REQUIRE(ts.size() == 3);
    CHECK(stats.dropped_short == 1);
    CHECK(stats.truncated == 1);
    CHECK(ts[0].user == 0);
    CHECK(ts[0].pois == std::vector<std::int32_t>{0, 1});
    CHECK(ts[0].group == Group::kSameRegion);
    CHECK(ts[0].hours == std::vector<std::int32_t>{1, 2});
    CHECK(ts[0].distance_km[0] == 0.0);
    CHECK(ts[0].distance_km[1] == doctest::Approx(haversine_km({0, 0}, {0, 0.01})));
    CHECK(ts[2].user == 1);

    cfg.max_len = 8;
    ts = build_trajectories(c, pois, regions, cfg);
    CHECK(ts[0].pois == std::vector<std::int32_t>{0, 1, 2});
    CHECK(ts[0].group == Group::kCrossRegion);
    CHECK(ts[0].region_distance_km[2] == doctest::Approx(haversine_km({0, 0.005}, {1, 1})));

    cfg.utc_offset_minutes = -180;
    ts = build_trajectories(c, pois, regions, cfg);
    // Shifted three hours west, the first two check-ins fall on the previous day.
    CHECK(ts[0].pois == std::vector<std::int32_t>{0, 1});
    CHECK(ts[0].hours[0] == 22);
  }

  TEST_CASE("group assignment") {
    const std::vector<std::int32_t> same = {2, 2, 2};
    const std::vector<std::int32_t> cross = {2, 1, 2};
    CHECK(group_of(same) == Group::kSameRegion);
    CHECK(group_of(cross) == Group::kCrossRegion);
  }

  TEST_CASE("split drops users with too few trajectories and keeps chronology") {
    const Dataset ds = selftest::toy_dataset();
    for (std::size_t u = 0; u < ds.users.size(); ++u) {
      std::vector<const Trajectory*> mine;
      for (const auto& t : ds.trajectories) {
        if (t.user == static_cast<std::int32_t>(u)) mine.push_back(&t);
      }
      if (mine.empty()) continue;
      CHECK(mine.size() >= 3);
      for (std::size_t i = 1; i < mine.size(); ++i) {
        CHECK(mine[i - 1]->day < mine[i]->day);
        CHECK(static_cast<int>(mine[i - 1]->split) <= static_cast<int>(mine[i]->split));
      }
      CHECK(mine.back()->split == Split::kTest);
    }
    for (const auto& t : ds.trajectories) {
      CHECK(t.size() >= 2);
      CHECK(t.size() <= 8);
    }
  }

  TEST_CASE("dataset container round trip and corruption") {
    const Dataset ds = selftest::toy_dataset();
    const auto dir = test::temp_dir("container");
    const auto path = dir / "toy.bin";
    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(back.num_pois() == ds.num_pois());
    CHECK(back.num_regions() == ds.num_regions());
    CHECK(back.trajectories.size() == ds.trajectories.size());
    CHECK(back.trajectories[3].pois == ds.trajectories[3].pois);
    CHECK(back.trajectories[3].distance_bucket == ds.trajectories[3].distance_bucket);
    CHECK(back.poi_distance.max_km == ds.poi_distance.max_km);
    save_dataset(back, dir / "again.bin");
    CHECK(test::read_file(dir / "again.bin") == test::read_file(path));

    std::string bytes = test::read_file(path);
    test::write_file(dir / "truncated.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_dataset(dir / "truncated.bin"), FormatError);
    std::string flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x40;
    test::write_file(dir / "flipped.bin", flipped);
    CHECK_THROWS_AS(load_dataset(dir / "flipped.bin"), FormatError);
    test::write_file(dir / "garbage.bin", "not a dataset");
    CHECK_THROWS_AS(load_dataset(dir / "garbage.bin"), FormatError);
    CHECK_THROWS_AS(load_dataset(dir / "missing.bin"), DataError);
  }

  TEST_CASE("container sections") {
    ContainerWriter w("TESTMAGC", 3);
    ByteWriter b;
    b.u32(7);
    b.str("hello");
    b.f64(-0.25);
    w.add("one", b.take());
    const std::string bytes = w.serialize();
    const auto r = ContainerReader::parse(bytes, "TESTMAGC", 3);
    CHECK(r.has("one"));
    CHECK_FALSE(r.has("two"));
    ByteReader s = r.section("one");
    CHECK(s.u32() == 7);
    CHECK(s.str() == "hello");
    CHECK(s.f64() == -0.25);
    CHECK(s.done());
    CHECK_THROWS_AS(s.u8(), FormatError);
    CHECK_THROWS_AS(r.section("two"), FormatError);
    CHECK_THROWS_AS(ContainerReader::parse(bytes, "TESTMAGC", 4), FormatError);
    CHECK_THROWS_AS(ContainerReader::parse(bytes, "OTHERMAG", 3), FormatError);
  }

  TEST_CASE("synthetic city is deterministic and recoverable") {
    SynthConfig cfg;
    CHECK(synth_city_tsv(cfg) == synth_city_tsv(cfg));
    const auto parsed = parse_checkins_text(synth_city_tsv(cfg));
    CHECK(parsed.malformed == 0);
    CHECK(parsed.pois.size() == 54);
    IngestConfig ic;
    const Dataset ds = build_dataset(parsed, ic);
    CHECK(ds.num_regions() == 9);
    for (const auto& r : ds.regions) CHECK(r.members.size() == 6);

    cfg.cycle = true;
    const auto cyc = parse_checkins_text(synth_city_tsv(cfg));
    ic.k_regions = 9;
    const Dataset cds = build_dataset(cyc, ic);
    for (const auto& t : cds.trajectories) CHECK(t.group == Group::kSameRegion);
  }

  TEST_CASE("ingest configuration errors") {
    IngestConfig cfg;
    cfg.max_len = 1;
    CHECK_THROWS_AS(build_dataset(parse_checkins_text(synth_city_tsv({})), cfg), DataError);
    cfg = IngestConfig{};
    cfg.k_regions = 1000;
    CHECK_THROWS_AS(build_dataset(parse_checkins_text(synth_city_tsv({})), cfg), DataError);
  }
}
