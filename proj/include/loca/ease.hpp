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

// Closed-form item-item linear autoencoder (EASE) under per-user weights.

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/detail/weights.hpp"
#include "loca/error.hpp"

namespace loca {

class EaseModel {
 public:
  static constexpr std::uint32_t kind_id = 1;
  static constexpr const char* kind_name = "ease";

  EaseModel() = default;
  EaseModel(Eigen::MatrixXd b, double lambda) : b_(std::move(b)), lambda_(lambda) {}

  ItemIndex n() const { return static_cast<ItemIndex>(b_.rows()); }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& weights() const { return b_; }

  // r B for a binary row given by its positive item indices.
  Eigen::VectorXd score(std::span<const ItemIndex> items) const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n());
    for (auto i : items) {
      if (i < 0 || i >= n()) throw DomainError("item index out of range in score");
      s += b_.row(i).transpose();
    }
    return s;
  }

  // r B for a dense row of length n.
  Eigen::VectorXd score(const Eigen::VectorXd& r) const {
    if (r.size() != n()) throw DomainError("score input has length " + std::to_string(r.size()) +
                                           ", expected " + std::to_string(n()));
    return b_.transpose() * r;
  }

  void save(std::ostream& os) const {
    detail::BinaryWriter w(os);
    w.tag("LOCAMDL1");
    w.pod(kind_id);
    w.pod(lambda_);
    w.matrix(b_);
  }

  static EaseModel load(std::istream& is, const std::string& what = "ease model") {
    detail::BinaryReader r(is, what);
    r.expect_tag("LOCAMDL1");
    if (r.pod<std::uint32_t>() != kind_id) throw FormatError(what + ": not an EASE model");
    const double lambda = r.pod<double>();
    auto b = r.matrix();
    if (b.rows() != b.cols()) throw FormatError(what + ": item matrix is not square");
    return EaseModel(std::move(b), lambda);
  }

  friend bool operator==(const EaseModel& a, const EaseModel& b) {
    return a.lambda_ == b.lambda_ && a.b_.rows() == b.b_.rows() && a.b_ == b.b_;
  }

 private:
  Eigen::MatrixXd b_;
  double lambda_ = 0.0;
};

// Minimizes sum_u w_u |r_u - r_u B|^2 + lambda |B|^2 subject to diag(B) = 0:
// with G = X^T D X + lambda I and P = G^-1, B_ij = -P_ij / P_jj.
inline EaseModel train_ease(const RatingMatrix& train, std::span<const double> row_weights, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("EASE lambda must be > 0");
  detail::check_row_weights(train, row_weights);
  const auto n = train.n();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (UserIndex u = 0; u < train.m(); ++u) {
    const double w = row_weights[static_cast<std::size_t>(u)];
    if (w == 0.0) continue;
    const auto row = train.row(u);
    for (auto i : row)
      for (auto j : row) g(i, j) += w;
  }
  g.diagonal().array() += lambda;

  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw TrainingError("EASE Gram matrix is not positive definite");
  Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(n, n));
  if (!p.allFinite()) throw TrainingError("EASE inverse is not finite");

  Eigen::MatrixXd b(n, n);
  for (ItemIndex j = 0; j < n; ++j) {
    const double pjj = p(j, j);
    for (ItemIndex i = 0; i < n; ++i) b(i, j) = i == j ? 0.0 : -p(i, j) / pjj;
  }
  return EaseModel(std::move(b), lambda);
}

}  // namespace loca
