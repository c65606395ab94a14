// SPDX-License-Identifier: Apache-2.0

#include "mcmg/common/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mcmg/common/error.hpp"

namespace mcmg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container encoding assumes a little-endian host");

std::uint32_t checksum(std::string_view payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  const auto* data = reinterpret_cast<const Bytef*>(payload.data());
  std::size_t left = payload.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  bytes_.append(buf, 4);
}

void ByteWriter::u64(std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  bytes_.append(buf, 8);
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes_.append(s);
}

void ByteWriter::f64s(std::span<const double> values) {
  u64(values.size());
  const std::size_t at = bytes_.size();
  bytes_.resize(at + values.size() * 8);
  std::memcpy(bytes_.data() + at, values.data(), values.size() * 8);
}

void ByteReader::fail(const std::string& what) const {
  throw FormatError("section '" + section_ + "': " + what);
}

void ByteReader::need(std::size_t n) {
  if (bytes_.size() - pos_ < n) fail("truncated data");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(bytes_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v;
  std::memcpy(&v, bytes_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

std::uint64_t ByteReader::count(std::size_t min_bytes_per_item) {
  const std::uint64_t n = u64();
  if (min_bytes_per_item > 0 && n > (bytes_.size() - pos_) / min_bytes_per_item) {
    fail("element count exceeds remaining data");
  }
  return n;
}

std::vector<double> ByteReader::f64s() {
  const std::uint64_t n = count(8);
  std::vector<double> out(n);
  std::memcpy(out.data(), bytes_.data() + pos_, n * 8);
  pos_ += n * 8;
  return out;
}

ContainerWriter::ContainerWriter(std::string magic, std::uint32_t version)
    : magic_(std::move(magic)), version_(version) {
  magic_.resize(8, '\0');
}

void ContainerWriter::add(std::string name, std::string payload) {
  sections_.emplace_back(std::move(name), std::move(payload));
}

std::string ContainerWriter::serialize() const {
  ByteWriter w;
  std::string out = magic_;
  w.u32(version_);
  w.u32(static_cast<std::uint32_t>(sections_.size()));
  for (const auto& [name, payload] : sections_) {
    w.str(name);
    w.u64(payload.size());
    w.u32(checksum(payload));
    out += w.take();
    out += payload;
  }
  out += w.take();
  return out;
}

void ContainerWriter::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

ContainerReader ContainerReader::open(const std::filesystem::path& path, std::string_view magic,
                                      std::uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(std::move(buf).str(), magic, version);
}

ContainerReader ContainerReader::parse(std::string bytes, std::string_view magic,
                                       std::uint32_t version) {
  ContainerReader reader;
  reader.bytes_ = std::move(bytes);
  std::string expected(magic);
  expected.resize(8, '\0');
  const std::string_view all(reader.bytes_);
  if (all.size() < 8 || all.substr(0, 8) != expected) {
    throw FormatError("section 'header': not a " + std::string(magic) + " container");
  }
  ByteReader header(all.substr(8), "header");
  const std::uint32_t found = header.u32();
  if (found != version) {
    throw FormatError("section 'header': version " + std::to_string(found) +
                      " is not supported (expected " + std::to_string(version) + ")");
  }
  const std::uint32_t n = header.u32();
  std::size_t pos = 16;
  for (std::uint32_t i = 0; i < n; ++i) {
    ByteReader entry(all.substr(pos), "index");
    const std::string name = entry.str();
    ByteReader sized(all.substr(pos + 4 + name.size()), name);
    const std::uint64_t length = sized.u64();
    const std::uint32_t crc = sized.u32();
    const std::size_t start = pos + 4 + name.size() + 12;
    if (start > all.size() || all.size() - start < length) {
      throw FormatError("section '" + name + "': truncated data");
    }
    const std::string_view payload = all.substr(start, length);
    if (checksum(payload) != crc) throw FormatError("section '" + name + "': checksum mismatch");
    reader.sections_.emplace_back(name, payload);
    pos = start + length;
  }
  if (pos != all.size()) throw FormatError("section 'trailer': unexpected trailing bytes");
  return reader;
}

bool ContainerReader::has(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.first == name) return true;
  }
  return false;
}

std::string_view ContainerReader::raw(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.first == name) return s.second;
  }
  throw FormatError("section '" + std::string(name) + "': missing");
}

ByteReader ContainerReader::section(std::string_view name) const {
  return ByteReader(raw(name), std::string(name));
}

std::vector<std::string> ContainerReader::names() const {
  std::vector<std::string> out;
  for (const auto& s : sections_) out.push_back(s.first);
  return out;
}

}  // namespace mcmg
