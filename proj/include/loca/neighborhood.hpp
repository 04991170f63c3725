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

// Angular distances between user embeddings and the Epanechnikov weights
// that define each anchor's training and inference neighborhoods.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/error.hpp"

namespace loca {

namespace detail {

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline std::vector<double> unit(std::span<const double> v) {
  const double nv = norm(v);
  if (!(nv > 0.0) || !std::isfinite(nv)) throw DomainError("arccos distance of a zero or non-finite vector");
  std::vector<double> u(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) u[k] = v[k] / nv;
  return u;
}

// Angle between two unit vectors, 2*atan2(|a-b|, |a+b|). Equals
// arccos(a.b) but keeps full precision near 0 and pi, and is exactly
// symmetric in its arguments.
inline double unit_angle(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dm = a[k] - b[k];
    const double dp = a[k] + b[k];
    diff += dm * dm;
    sum += dp * dp;
  }
  const double angle = 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
  return std::clamp(angle, 0.0, std::numbers::pi);
}

}  // namespace detail

// Angle between `a` and `u` in radians, in [0, pi].
inline double arccos_distance(std::span<const double> a, std::span<const double> u) {
  if (a.size() != u.size()) throw DomainError("arccos distance of vectors with different lengths");
  if (a.empty()) throw DomainError("arccos distance of empty vectors");
  const auto ua = detail::unit(a);
  const auto uu = detail::unit(u);
  return detail::unit_angle(ua, uu);
}

// Scaled Epanechnikov kernel (1 - (s/h)^2) * 1[s < h].
inline double kernel_weight(double s, double h) {
  if (!(s >= 0.0)) throw DomainError("kernel distance must be >= 0");
  if (!(h > 0.0)) throw DomainError("kernel bandwidth must be > 0");
  if (s >= h) return 0.0;
  const double r = s / h;
  return 1.0 - r * r;
}

struct KernelConfig {
  double h_T = 1.0;  // training bandwidth
  double h_W = 0.4;  // inference bandwidth
  // Divide angles by pi so distances lie in [0, 1].
  bool scale_distance = false;

  void validate() const {
    if (!(h_W > 0.0)) throw ConfigError("kernel.h_W must be > 0");
    if (!(h_T >= h_W)) throw ConfigError("kernel.h_W must not exceed kernel.h_T");
  }
};

// Dense per-user embeddings. Rows that are entirely zero are replaced by
// the first unit axis so that every angle is defined.
class EmbeddingMatrix {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingMatrix() = default;

  explicit EmbeddingMatrix(Storage vectors, std::string method = "custom", std::uint64_t seed = 0)
      : vectors_(std::move(vectors)), method_(std::move(method)), seed_(seed) {
    if (vectors_.cols() < 1) throw ConfigError("embedding dimension must be >= 1");
    if (!vectors_.allFinite()) throw DomainError("embedding contains non-finite values");
    units_.resize(vectors_.rows(), vectors_.cols());
    for (Eigen::Index u = 0; u < vectors_.rows(); ++u) {
      if (detail::norm(row(static_cast<UserIndex>(u))) == 0.0) {
        vectors_.row(u).setZero();
        vectors_(u, 0) = 1.0;
        ++replaced_;
      }
      const auto unit = detail::unit(row(static_cast<UserIndex>(u)));
      for (Eigen::Index k = 0; k < vectors_.cols(); ++k) units_(u, k) = unit[static_cast<std::size_t>(k)];
    }
    if (replaced_ > 0)
      std::cerr << "warning: " << replaced_ << " zero embedding(s) replaced by the first unit axis\n";
  }

  UserIndex m() const { return static_cast<UserIndex>(vectors_.rows()); }
  int d() const { return static_cast<int>(vectors_.cols()); }
  const std::string& method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  int replaced_zero_rows() const { return replaced_; }
  const Storage& vectors() const { return vectors_; }

  std::span<const double> row(UserIndex u) const {
    return {vectors_.data() + static_cast<std::ptrdiff_t>(u) * vectors_.cols(), static_cast<std::size_t>(vectors_.cols())};
  }
  std::span<const double> unit_row(UserIndex u) const {
    return {units_.data() + static_cast<std::ptrdiff_t>(u) * units_.cols(), static_cast<std::size_t>(units_.cols())};
  }

  // Same value as arccos_distance(row(a), row(b)), using cached unit rows.
  double distance(UserIndex a, UserIndex b) const { return detail::unit_angle(unit_row(a), unit_row(b)); }

 private:
  Storage vectors_;
  Storage units_;
  std::string method_ = "custom";
  std::uint64_t seed_ = 0;
  int replaced_ = 0;
};

// Training weights t (bandwidth h_T) and inference weights w (bandwidth
// h_W) of every user with respect to one anchor.
struct WeightPair {
  UserIndex anchor = 0;
  std::vector<double> t;
  std::vector<double> w;

  friend bool operator==(const WeightPair&, const WeightPair&) = default;
};

inline double scaled_distance(const EmbeddingMatrix& e, UserIndex a, UserIndex u, bool scale) {
  const double s = e.distance(a, u);
  return scale ? s / std::numbers::pi : s;
}

inline WeightPair build_weight_pair(const EmbeddingMatrix& embeddings, UserIndex anchor, const KernelConfig& config) {
  config.validate();
  if (anchor < 0 || anchor >= embeddings.m()) throw ConfigError("anchor index out of range");
  WeightPair p;
  p.anchor = anchor;
  p.t.resize(static_cast<std::size_t>(embeddings.m()));
  p.w.resize(p.t.size());
  for (UserIndex u = 0; u < embeddings.m(); ++u) {
    const double s = scaled_distance(embeddings, anchor, u, config.scale_distance);
    p.t[static_cast<std::size_t>(u)] = kernel_weight(s, config.h_T);
    p.w[static_cast<std::size_t>(u)] = kernel_weight(s, config.h_W);
  }
  return p;
}

inline std::vector<WeightPair> build_weight_pairs(const EmbeddingMatrix& embeddings,
                                                  std::span<const UserIndex> anchors,
                                                  const KernelConfig& config) {
  std::vector<WeightPair> pairs;
  pairs.reserve(anchors.size());
  for (auto a : anchors) pairs.push_back(build_weight_pair(embeddings, a, config));
  return pairs;
}

// Text format: header "m,d,method,seed" then one comma-separated row per user.
inline void save_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << e.m() << ',' << e.d() << ',' << e.method() << ',' << e.seed() << '\n';
  for (UserIndex u = 0; u < e.m(); ++u) {
    const auto r = e.row(u);
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << detail::format_double(r[k]);
    out << '\n';
  }
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const auto h = detail::split(detail::trim(line), ",");
  const auto m = h.size() == 4 ? detail::parse_number<long>(h[0]) : std::nullopt;
  const auto d = h.size() == 4 ? detail::parse_number<long>(h[1]) : std::nullopt;
  const auto seed = h.size() == 4 ? detail::parse_number<std::uint64_t>(h[3]) : std::nullopt;
  if (!m || !d || !seed || *m < 0 || *d < 1) throw FormatError(path.string() + ": bad embedding header");
  std::string method(h[2]);
  EmbeddingMatrix::Storage v(*m, *d);
  for (long u = 0; u < *m; ++u) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated embedding file");
    const auto f = detail::split(detail::trim(line), ",");
    if (static_cast<long>(f.size()) != *d) throw FormatError(path.string() + ": bad row " + std::to_string(u));
    for (long k = 0; k < *d; ++k) {
      const auto x = detail::parse_number<double>(f[static_cast<std::size_t>(k)]);
      if (!x) throw FormatError(path.string() + ": bad value in row " + std::to_string(u));
      v(u, k) = *x;
    }
  }
  return EmbeddingMatrix(std::move(v), std::move(method), *seed);
}

}  // namespace loca
