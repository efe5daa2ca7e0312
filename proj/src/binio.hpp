#pragma once

// Little-endian binary helpers shared by the checkpoint and feature formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tsseg/error.hpp"

namespace tsseg::binio {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void magic(const char (&m)[5]) { bytes(m, 4); }
  template <typename T>
  void le(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes(raw, sizeof(T));
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { le(v); }
  void f64(double v) { le(v); }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw DataError("write failed: " + path);
  }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw DataError("cannot open " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  const std::string& path() const { return path_; }
  std::size_t size() const { return buf_.size(); }
  std::size_t remaining() const { return buf_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw DataError(path_ + ": truncated while reading " + what + " (need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_) + ", file has " +
                      std::to_string(buf_.size()) + ")");
    }
  }
  void expect_magic(const char (&m)[5]) {
    need(4, "magic");
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0) {
      throw DataError(path_ + ": bad magic, expected \"" + std::string(m) + "\"");
    }
    pos_ += 4;
  }
  std::string peek_magic() const {
    need(4, "magic");
    return std::string(buf_.data() + pos_, buf_.data() + pos_ + 4);
  }
  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }
  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return le<std::uint64_t>(what); }
  float f32(const char* what) { return le<float>(what); }
  double f64(const char* what) { return le<double>(what); }

  void expect_end() const {
    if (remaining() != 0) {
      throw DataError(path_ + ": " + std::to_string(remaining()) + " trailing bytes");
    }
  }

 private:
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace tsseg::binio
