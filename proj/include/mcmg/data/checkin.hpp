// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcmg::data {

// One raw check-in with dense ids. The region is derived later.
struct CheckIn {
  std::int32_t user = 0;
  std::int32_t poi = 0;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  std::int32_t category = 0;
  double latitude = 0.0;
  double longitude = 0.0;
};

// String identifiers mapped to dense ids in order of first appearance.
class Vocabulary {
 public:
  std::int32_t intern(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  static Vocabulary from_names(std::vector<std::string> names);

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::int32_t, std::less<>> index_;
};

enum class TimestampFormat { kUnknown, kEpochSeconds, kIso8601 };

// Parses "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm|+hhmm]" into UTC epoch
// seconds. Fractional seconds are dropped; a missing zone means UTC.
std::optional<std::int64_t> parse_iso8601(std::string_view text);

struct PoiInfo {
  double latitude = 0.0;
  double longitude = 0.0;
  std::int32_t category = 0;
  std::int32_t region = -1;
};

struct ParsedCheckins {
  std::vector<CheckIn> records;
  Vocabulary users;
  Vocabulary pois;
  Vocabulary categories;
  // Indexed by POI id; coordinates and category from the first occurrence.
  std::vector<PoiInfo> poi_info;
  TimestampFormat format = TimestampFormat::kUnknown;
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  std::vector<std::string> malformed_samples;
};

struct ParseOptions {
  double max_malformed_fraction = 0.10;
  std::size_t max_samples = 5;
};

// Reads the check-in TSV: user_id, poi_id, category_name, latitude, longitude,
// timestamp. '#' starts a comment line. Throws DataError when the file is
// unreadable, a POI has no coordinates, timestamp forms are mixed, or too
// many lines are malformed.
ParsedCheckins parse_checkins(const std::filesystem::path& path, const ParseOptions& options = {});
ParsedCheckins parse_checkins_text(std::string_view text, const ParseOptions& options = {});

}  // namespace mcmg::data
