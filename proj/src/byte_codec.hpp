#ifndef MDOOD_BYTE_CODEC_HPP
#define MDOOD_BYTE_CODEC_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mdood/error.hpp"

// Little-endian encoding helpers shared by the EMB1 and MDL1 codecs.

namespace mdood::codec {

template <typename T>
T to_little(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    std::reverse(raw, raw + sizeof(T));
    std::memcpy(&value, raw, sizeof(T));
  }
  return value;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    value = to_little(value);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  void put_bytes(const char* data, std::size_t size) {
    bytes_.insert(bytes_.end(), data, data + size);
  }

  template <typename T>
  void put_array(const T* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(data);
      bytes_.insert(bytes_.end(), p, p + count * sizeof(T));
    } else {
      for (std::size_t i = 0; i < count; ++i) put(data[i]);
    }
  }

  void reserve(std::size_t n) { bytes_.reserve(n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t count, const char* what) const {
    if (count > remaining()) {
      throw Error(ErrorCode::TruncatedPayload,
                  std::string("file ends inside ") + what);
    }
  }

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }

  void get_bytes(char* out, std::size_t size, const char* what) {
    need(size, what);
    std::memcpy(out, bytes_.data() + pos_, size);
    pos_ += size;
  }

  template <typename T>
  void get_array(T* out, std::size_t count, const char* what) {
    if (count > remaining() / sizeof(T)) {
      throw Error(ErrorCode::TruncatedPayload, std::string("file ends inside ") + what);
    }
    std::memcpy(out, bytes_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < count; ++i) out[i] = to_little(out[i]);
    }
  }

  void expect_end() const {
    if (remaining() != 0) {
      throw Error(ErrorCode::TrailingBytes,
                  std::to_string(remaining()) + " unexpected bytes after payload");
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// `a * b` with overflow reported as a truncated payload (no file can hold it).
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > UINT64_MAX / a) {
    throw Error(ErrorCode::TruncatedPayload, std::string("declared size overflows for ") + what);
  }
  return a * b;
}

}  // namespace mdood::codec

#endif  // MDOOD_BYTE_CODEC_HPP
