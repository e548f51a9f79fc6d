// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_BINIO_HPP
#define OCC_BINIO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace occ {

// Little-endian POD stream helpers for the model and cache containers.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void put(const T& value) {
    raw(&value, sizeof(T));
  }
  template <typename T>
  void put_span(std::span<const T> values) {
    raw(values.data(), values.size_bytes());
  }
  void put_string(std::string_view s);
  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }
  void close();

 private:
  void raw(const void* data, std::size_t n);
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    T value;
    raw(&value, sizeof(T));
    return value;
  }
  template <typename T>
  void get_span(std::span<T> values) {
    raw(values.data(), values.size_bytes());
  }
  std::string get_string();
  // Throws Format unless the next bytes equal tag.
  void expect_magic(std::string_view tag);

 private:
  void raw(void* data, std::size_t n);
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace occ

#endif  // OCC_BINIO_HPP
