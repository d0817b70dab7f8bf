#pragma once

// Little-endian variable-length integers (LEB128) and the framing shared by
// the on-disk caches: 8 magic bytes, a u32 format version, then payload.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fastecpp/bigint.hpp"

namespace fastecpp::binio {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Writer {
 public:
  void u8(std::uint8_t b) { buf_.push_back(static_cast<char>(b)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }
  void bytes(std::string_view s) { buf_.append(s); }
  /// Length-prefixed magnitude, least significant byte first.
  void magnitude(const Int& n) {
    const std::size_t count = (bit_size(n) + 7) / 8;
    std::string raw(count, '\0');
    if (count) mpz_export(raw.data(), nullptr, -1, 1, -1, 0, n.get_mpz_t());
    varint(count);
    bytes(raw);
  }
  void header(std::string_view magic, std::uint32_t version) {
    if (magic.size() != 8) throw std::logic_error("magic must be 8 bytes");
    bytes(magic);
    u32(version);
  }
  const std::string& data() const { return buf_; }

  void save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp);
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw std::runtime_error("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string data) : buf_(std::move(data)) {}

  static Reader load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Reader(std::move(data));
  }

  std::uint8_t u8() {
    if (pos_ >= buf_.size()) throw FormatError("unexpected end of data");
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (unsigned shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if ((b & 0x80) == 0) return v;
    }
    throw FormatError("varint too long");
  }
  Int magnitude() {
    const std::uint64_t count = varint();
    if (count > buf_.size() - pos_) throw FormatError("magnitude exceeds data");
    Int n;
    if (count) mpz_import(n.get_mpz_t(), count, -1, 1, -1, 0, buf_.data() + pos_);
    pos_ += count;
    return n;
  }
  void expect_header(std::string_view magic, std::uint32_t version) {
    if (buf_.size() - pos_ < magic.size() || std::string_view(buf_).substr(pos_, magic.size()) != magic)
      throw FormatError("bad magic");
    pos_ += magic.size();
    const std::uint32_t v = u32();
    if (v != version) throw FormatError("unsupported format version " + std::to_string(v));
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace fastecpp::binio
