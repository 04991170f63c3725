// Copyright 2026 The loca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "loca/error.hpp"

namespace loca::detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits on a (possibly multi-character) delimiter; empty fields are kept.
inline std::vector<std::string_view> split(std::string_view s,
                                           std::string_view delim) {
  std::vector<std::string_view> out;
  if (delim.empty()) {
    out.push_back(s);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + delim.size();
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

// Shortest text form that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// 64-bit FNV-1a; used for input checksums in run manifests.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for checksum");
  Fnv1a h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.digest();
}

// Native-endian binary stream helpers for model containers.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void tag(std::string_view magic) { os_.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

  void string(std::string_view s) {
    pod<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  // Row-major, prefixed with rows and cols.
  void matrix(const Eigen::MatrixXd& m) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) pod(m(r, c));
  }

  void vector(const Eigen::VectorXd& v) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    os_.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
  }

  void doubles(const std::vector<double>& v) {
    pod<std::uint64_t>(v.size());
    os_.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
  }

 private:
  std::ostream& os_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }

  void expect_tag(std::string_view magic) {
    std::string buf(magic.size(), '\0');
    is_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    check();
    if (buf != magic) throw FormatError(what_ + ": bad magic tag");
  }

  std::string string() {
    const auto n = bounded(pod<std::uint64_t>());
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }

  Eigen::MatrixXd matrix() {
    const auto rows = bounded(pod<std::uint64_t>());
    const auto cols = bounded(pod<std::uint64_t>());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = pod<double>();
    return m;
  }

  Eigen::VectorXd vector() {
    const auto n = bounded(pod<std::uint64_t>());
    Eigen::VectorXd v(n);
    is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
    check();
    return v;
  }

  std::vector<double> doubles() {
    const auto n = bounded(pod<std::uint64_t>());
    std::vector<double> v(n);
    is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
    check();
    return v;
  }

 private:
  void check() {
    if (!is_) throw FormatError(what_ + ": truncated data");
  }
  std::size_t bounded(std::uint64_t n) {
    if (n > (std::uint64_t{1} << 34)) throw FormatError(what_ + ": implausible size field");
    return static_cast<std::size_t>(n);
  }

  std::istream& is_;
  std::string what_;
};

}  // namespace loca::detail
