// SPDX-License-Identifier: Apache-2.0

#include "mcmg/data/checkin.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "mcmg/common/error.hpp"

namespace mcmg::data {

std::int32_t Vocabulary::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(std::string(name), id);
  return id;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  return std::nullopt;
}

Vocabulary Vocabulary::from_names(std::vector<std::string> names) {
  Vocabulary v;
  for (auto& n : names) {
    if (v.find(n)) throw FormatError("section 'vocab': duplicate name '" + n + "'");
    v.intern(n);
  }
  return v;
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return parse_number(s.substr(pos, len), out);
}

bool looks_like_epoch(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (!parse_fixed(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !parse_fixed(s, 5, 2, mo) ||
      s[7] != '-' || !parse_fixed(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
      !parse_fixed(s, 11, 2, h) || s[13] != ':' || !parse_fixed(s, 14, 2, mi) || s[16] != ':' ||
      !parse_fixed(s, 17, 2, sec)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t digits = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == digits) return std::nullopt;
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    const char sign = s[pos];
    if (sign == 'Z' && pos + 1 == s.size()) {
      pos = s.size();
    } else if (sign == '+' || sign == '-') {
      int oh, om;
      if (!parse_fixed(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!parse_fixed(s, mpos, 2, om) || mpos + 2 != s.size() || oh > 23 || om > 59) {
        return std::nullopt;
      }
      offset_minutes = (sign == '+' ? 1 : -1) * (oh * 60 + om);
      pos = s.size();
    } else {
      return std::nullopt;
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const std::int64_t days = sys_days(ymd).time_since_epoch().count();
  return days * 86400 + h * 3600 + mi * 60 + sec - std::int64_t{offset_minutes} * 60;
}

ParsedCheckins parse_checkins_text(std::string_view text, const ParseOptions& options) {
  ParsedCheckins out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (trim(raw).empty() || raw.front() == '#') {
      if (nl == text.size()) break;
      continue;
    }
    ++out.data_lines;

    auto reject = [&](const char* why) {
      ++out.malformed;
      if (out.malformed_samples.size() < options.max_samples) {
        out.malformed_samples.push_back("line " + std::to_string(line_no) + " (" + why +
                                        "): " + std::string(raw));
      }
    };

    const auto fields = split_tabs(raw);
    if (fields.size() != 6) {
      reject("expected 6 tab-separated fields");
    } else {
      const std::string_view user = trim(fields[0]);
      const std::string_view poi = trim(fields[1]);
      const std::string_view category = trim(fields[2]);
      const std::string_view lat_s = trim(fields[3]);
      const std::string_view lon_s = trim(fields[4]);
      const std::string_view ts_s = trim(fields[5]);
      double lat = 0.0, lon = 0.0;
      std::int64_t ts = 0;
      if (lat_s.empty() || lon_s.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": POI '" + std::string(poi) +
                        "' has no coordinates");
      }
      const TimestampFormat form =
          looks_like_epoch(ts_s) ? TimestampFormat::kEpochSeconds : TimestampFormat::kIso8601;
      if (out.format == TimestampFormat::kUnknown && !ts_s.empty()) out.format = form;
      if (!ts_s.empty() && form != out.format) {
        throw DataError("line " + std::to_string(line_no) +
                        ": mixed timestamp forms (epoch seconds and ISO-8601) in one file");
      }
      bool ts_ok = false;
      if (form == TimestampFormat::kEpochSeconds) {
        ts_ok = parse_number(ts_s, ts);
      } else if (auto parsed = parse_iso8601(ts_s)) {
        ts = *parsed;
        ts_ok = true;
      }
      if (user.empty() || poi.empty() || category.empty()) {
        reject("empty identifier");
      } else if (!parse_number(lat_s, lat) || !parse_number(lon_s, lon)) {
        reject("coordinates are not numbers");
      } else if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
        reject("coordinates out of range");
      } else if (!ts_ok) {
        reject("unparseable timestamp");
      } else {
        CheckIn c;
        c.user = out.users.intern(user);
        const std::size_t known = out.pois.size();
        c.poi = out.pois.intern(poi);
        if (static_cast<std::size_t>(c.poi) == known) {
          out.poi_info.push_back(PoiInfo{lat, lon, out.categories.intern(category), -1});
        }
        // A POI keeps the coordinates and category of its first occurrence.
        const PoiInfo& info = out.poi_info[static_cast<std::size_t>(c.poi)];
        c.latitude = info.latitude;
        c.longitude = info.longitude;
        c.category = info.category;
        c.timestamp = ts;
        out.records.push_back(c);
      }
    }
    if (nl == text.size()) break;
  }

  if (out.data_lines > 0 &&
      static_cast<double>(out.malformed) > options.max_malformed_fraction * static_cast<double>(out.data_lines)) {
    std::ostringstream msg;
    msg << out.malformed << " of " << out.data_lines << " lines are malformed (limit "
        << options.max_malformed_fraction * 100.0 << "%). Samples:";
    for (const auto& s : out.malformed_samples) msg << "\n  " << s;
    throw DataError(msg.str());
  }
  return out;
}

ParsedCheckins parse_checkins(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read check-in file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkins_text(buf.str(), options);
}

}  // namespace mcmg::data
