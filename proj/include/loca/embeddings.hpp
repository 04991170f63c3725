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

// User embeddings for neighborhood distances: a rank-d factorization of the
// train matrix, or the hidden layer of a trained autoencoder.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "loca/dae.hpp"
#include "loca/dataset.hpp"
#include "loca/error.hpp"
#include "loca/neighborhood.hpp"

namespace loca {

enum class EmbeddingMethod { truncated_svd, dae_hidden };

inline std::string_view to_string(EmbeddingMethod m) {
  return m == EmbeddingMethod::truncated_svd ? "truncated-svd" : "dae-hidden";
}

inline EmbeddingMethod parse_embedding_method(std::string_view s) {
  if (s == "truncated-svd") return EmbeddingMethod::truncated_svd;
  if (s == "dae-hidden") return EmbeddingMethod::dae_hidden;
  throw ConfigError("unknown embedding method '" + std::string(s) + "'");
}

// Rows of U_d S_d from the thin SVD X = U S V^T, obtained from the
// eigendecomposition of the smaller Gram matrix. Fails when d exceeds the
// numerical rank of X.
inline EmbeddingMatrix truncated_svd_embeddings(const RatingMatrix& train, int d, std::uint64_t seed = 0) {
  if (d < 1) throw ConfigError("embedding dimension must be >= 1");
  const auto m = train.m();
  const auto n = train.n();
  if (d > std::min<int>(m, n))
    throw ConfigError("embedding dimension " + std::to_string(d) + " exceeds min(m, n)");
  const bool item_side = n <= m;
  const Eigen::Index k = item_side ? n : m;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  if (item_side) {
    for (UserIndex u = 0; u < m; ++u)
      for (auto i : train.row(u))
        for (auto j : train.row(u)) gram(i, j) += 1.0;
  } else {
    const auto x = train.dense();
    gram = x * x.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw TrainingError("eigendecomposition failed");
  const auto& values = eig.eigenvalues();  // ascending
  const double top = values[k - 1];
  int rank = 0;
  for (Eigen::Index c = 0; c < k; ++c)
    if (values[c] > 1e-12 * top && values[c] > 0.0) ++rank;
  if (d > rank)
    throw ConfigError("embedding dimension " + std::to_string(d) + " exceeds the train matrix rank " +
                      std::to_string(rank));

  EmbeddingMatrix::Storage e(m, d);
  for (int c = 0; c < d; ++c) {
    const Eigen::Index col = k - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    if (item_side) {
      // U s = X v
      for (UserIndex u = 0; u < m; ++u) {
        double s = 0.0;
        for (auto i : train.row(u)) s += v[i];
        e(u, c) = s;
      }
    } else {
      const double s = std::sqrt(values[col]);
      for (UserIndex u = 0; u < m; ++u) e(u, c) = v[u] * s;
    }
  }
  return EmbeddingMatrix(std::move(e), std::string(to_string(EmbeddingMethod::truncated_svd)), seed);
}

// Leading d hidden activations of `model` on each user's train row.
inline EmbeddingMatrix dae_hidden_embeddings(const RatingMatrix& train, const DaeModel& model, int d,
                                             std::uint64_t seed = 0) {
  if (d < 1) throw ConfigError("embedding dimension must be >= 1");
  if (d > model.d())
    throw ConfigError("embedding dimension " + std::to_string(d) + " exceeds DAE hidden width " +
                      std::to_string(model.d()));
  if (model.n() != train.n()) throw ConfigError("DAE item count does not match the train matrix");
  EmbeddingMatrix::Storage e(train.m(), d);
  for (UserIndex u = 0; u < train.m(); ++u) e.row(u) = model.hidden(train.row(u)).head(d).transpose();
  return EmbeddingMatrix(std::move(e), std::string(to_string(EmbeddingMethod::dae_hidden)), seed);
}

// `dae` is required for the dae-hidden method and ignored otherwise.
inline EmbeddingMatrix compute_user_embeddings(const RatingMatrix& train, EmbeddingMethod method, int d,
                                               std::uint64_t seed, const DaeModel* dae = nullptr) {
  if (method == EmbeddingMethod::truncated_svd) return truncated_svd_embeddings(train, d, seed);
  if (dae == nullptr) throw ConfigError("dae-hidden embeddings need a trained DAE");
  return dae_hidden_embeddings(train, *dae, d, seed);
}

}  // namespace loca
