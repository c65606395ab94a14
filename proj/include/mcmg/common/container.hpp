// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Versioned binary container shared by checkpoints and processed datasets.
//
// Layout (all integers little-endian):
//   magic     8 bytes
//   version   u32
//   sections  u32
//   per section: name (u32 length + bytes), payload length u64,
//                CRC-32 of payload u32, payload bytes
namespace mcmg {

// Appends little-endian primitives to a byte buffer.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void str(std::string_view s);
  void f64s(std::span<const double> values);

  template <typename Int>
  void ints(std::span<const Int> values) {
    u64(values.size());
    for (Int v : values) i64(static_cast<std::int64_t>(v));
  }

  const std::string& bytes() const { return bytes_; }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

// Reads what ByteWriter wrote. Running past the end throws FormatError naming
// the section.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string section)
      : bytes_(bytes), section_(std::move(section)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::string str();
  std::vector<double> f64s();
  // Element count read from the stream, checked against the bytes that remain.
  std::uint64_t count(std::size_t min_bytes_per_item);

  template <typename Int>
  std::vector<Int> ints() {
    const std::uint64_t n = count(8);
    std::vector<Int> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(static_cast<Int>(i64()));
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const;
  const std::string& section() const { return section_; }

 private:
  void need(std::size_t n);

  std::string_view bytes_;
  std::string section_;
  std::size_t pos_ = 0;
};

class ContainerWriter {
 public:
  ContainerWriter(std::string magic, std::uint32_t version);
  void add(std::string name, std::string payload);
  // Writes to a temporary sibling and renames, so readers never observe a
  // partially written file.
  void write(const std::filesystem::path& path) const;
  std::string serialize() const;

 private:
  std::string magic_;
  std::uint32_t version_;
  std::vector<std::pair<std::string, std::string>> sections_;
};

class ContainerReader {
 public:
  // Throws DataError if unreadable, FormatError on bad magic, version
  // mismatch, truncation or checksum failure.
  static ContainerReader open(const std::filesystem::path& path, std::string_view magic,
                              std::uint32_t version);
  static ContainerReader parse(std::string bytes, std::string_view magic, std::uint32_t version);

  bool has(std::string_view name) const;
  ByteReader section(std::string_view name) const;
  std::string_view raw(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::string bytes_;
  std::vector<std::pair<std::string, std::string_view>> sections_;
};

}  // namespace mcmg
