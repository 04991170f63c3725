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

// Generators and independent reference implementations shared by the unit
// and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "loca.hpp"

namespace loca::testing {

using Rng = loca::Rng;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(detail::uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * detail::uniform01(rng); }

inline std::vector<double> random_vector(Rng& rng, std::size_t d, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(d);
  for (auto& x : v) x = uniform_real(rng, lo, hi);
  return v;
}

// Binary matrix with every row and column holding at least one positive.
inline Eigen::MatrixXd random_binary(Rng& rng, int m, int n, double p) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  for (int u = 0; u < m; ++u)
    for (int i = 0; i < n; ++i) x(u, i) = detail::uniform01(rng) < p ? 1.0 : 0.0;
  for (int u = 0; u < m; ++u)
    if (x.row(u).sum() == 0.0) x(u, uniform_int(rng, 0, n - 1)) = 1.0;
  for (int i = 0; i < n; ++i)
    if (x.col(i).sum() == 0.0) x(uniform_int(rng, 0, m - 1), i) = 1.0;
  return x;
}

inline std::vector<std::vector<int>> random_graph(Rng& rng, int m, double p) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (detail::uniform01(rng) < p) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
      }
  return adj;
}

inline CoverageGraph to_graph(const std::vector<std::vector<int>>& adj) {
  CoverageGraph g;
  g.m = static_cast<UserIndex>(adj.size());
  g.h_W = 1.0;
  for (const auto& a : adj) {
    std::vector<UserIndex> row(a.begin(), a.end());
    std::sort(row.begin(), row.end());
    g.adjacency.push_back(std::move(row));
  }
  return g;
}

inline EmbeddingMatrix constant_embeddings(int m, int d = 2) {
  return EmbeddingMatrix(EmbeddingMatrix::Storage::Ones(m, d));
}

// Per column j, the zero-diagonal ridge problem
//   min_b |D^(1/2) (x_j - X_{-j} b)|^2 + lambda |b|^2
// solved as an augmented least-squares system by Householder QR.
inline Eigen::MatrixXd oracle_ease(const Eigen::MatrixXd& x, const std::vector<double>& weights, double lambda) {
  const auto m = x.rows();
  const auto n = x.cols();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + n - 1, n - 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n - 1);
    for (Eigen::Index u = 0; u < m; ++u) {
      const double s = std::sqrt(weights[static_cast<std::size_t>(u)]);
      Eigen::Index c = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) a(u, c++) = s * x(u, i);
      rhs(u) = s * x(u, j);
    }
    for (Eigen::Index c = 0; c < n - 1; ++c) a(m + c, c) = std::sqrt(lambda);
    const Eigen::VectorXd sol = a.householderQr().solve(rhs);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) b(i, j) = sol(c++);
  }
  return b;
}

// Greedy coverage recomputed from scratch with std::set at every step.
inline std::vector<int> oracle_greedy(const std::vector<std::vector<int>>& adj, int q) {
  const int m = static_cast<int>(adj.size());
  std::set<int> covered, chosen;
  std::vector<int> out;
  auto ball = [&](int v) {
    std::set<int> s(adj[static_cast<std::size_t>(v)].begin(), adj[static_cast<std::size_t>(v)].end());
    s.insert(v);
    return s;
  };
  while (static_cast<int>(out.size()) < q) {
    int best = -1, best_v = -1;
    for (int v = 0; v < m; ++v) {
      if (chosen.count(v)) continue;
      int gain = 0;
      for (int y : ball(v)) gain += covered.count(y) == 0;
      if (gain > best) best = gain, best_v = v;
    }
    if (best == 0) {
      covered.clear();
      continue;
    }
    chosen.insert(best_v);
    out.push_back(best_v);
    for (int y : ball(best_v)) covered.insert(y);
  }
  return out;
}

// Metrics by scoring every prefix position against a linear membership scan.
inline double oracle_dcg(const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& heldout, int N) {
  double dcg = 0.0;
  for (int pos = 0; pos < N && pos < static_cast<int>(ranked.size()); ++pos) {
    bool rel = false;
    for (auto h : heldout) rel = rel || h == ranked[static_cast<std::size_t>(pos)];
    if (rel) dcg += 1.0 / std::log2(pos + 2.0);
  }
  return dcg;
}

inline double oracle_ndcg(const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& heldout, int N) {
  return oracle_dcg(ranked, heldout, N) / oracle_dcg(heldout, heldout, N);
}

inline double oracle_recall(const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& heldout, int N) {
  int hits = 0;
  for (int pos = 0; pos < N && pos < static_cast<int>(ranked.size()); ++pos)
    for (auto h : heldout) hits += h == ranked[static_cast<std::size_t>(pos)];
  return static_cast<double>(hits) / static_cast<double>(heldout.size());
}

// Visits every parameter entry in the order W_enc, b_enc, W_dec, b_dec.
inline void for_each_parameter(DaeParameters& p, const std::function<void(double&)>& f) {
  for (Eigen::Index k = 0; k < p.w_enc.size(); ++k) f(p.w_enc.data()[k]);
  for (Eigen::Index k = 0; k < p.b_enc.size(); ++k) f(p.b_enc.data()[k]);
  for (Eigen::Index k = 0; k < p.w_dec.size(); ++k) f(p.w_dec.data()[k]);
  for (Eigen::Index k = 0; k < p.b_dec.size(); ++k) f(p.b_dec.data()[k]);
}

inline std::vector<double> flatten(const DaeGradients& g) {
  std::vector<double> v;
  for (Eigen::Index k = 0; k < g.w_enc.size(); ++k) v.push_back(g.w_enc.data()[k]);
  for (Eigen::Index k = 0; k < g.b_enc.size(); ++k) v.push_back(g.b_enc.data()[k]);
  for (Eigen::Index k = 0; k < g.w_dec.size(); ++k) v.push_back(g.w_dec.data()[k]);
  for (Eigen::Index k = 0; k < g.b_dec.size(); ++k) v.push_back(g.b_dec.data()[k]);
  return v;
}

// Central differences of dae_objective, same order as flatten().
inline std::vector<double> numeric_gradient(DaeParameters p, const Eigen::MatrixXd& input,
                                            const Eigen::MatrixXd& target, const Eigen::VectorXd& weights,
                                            double l2, double step = 1e-4) {
  std::vector<double> out;
  for_each_parameter(p, [&](double& x) {
    const double keep = x;
    x = keep + step;
    const double up = dae_objective(p, input, target, weights, l2);
    x = keep - step;
    const double down = dae_objective(p, input, target, weights, l2);
    x = keep;
    out.push_back((up - down) / (2.0 * step));
  });
  return out;
}

// Largest |a - n| / max(|a|, |n|, 1e-8) over all entries.
inline double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric[k]), 1e-8});
    worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / scale);
  }
  return worst;
}

// Element-wise product of weights and stacked local predictions divided by
// the element-wise weight sums, over the whole user x item grid at once.
inline Eigen::MatrixXd oracle_weighted_average(const std::vector<Eigen::MatrixXd>& local_scores,
                                               const std::vector<std::vector<double>>& weights,
                                               const Eigen::MatrixXd& global_scores) {
  const auto m = global_scores.rows();
  const auto n = global_scores.cols();
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd den = Eigen::MatrixXd::Zero(m, n);
  for (std::size_t j = 0; j < local_scores.size(); ++j) {
    Eigen::MatrixXd k(m, n);
    for (Eigen::Index u = 0; u < m; ++u) k.row(u).setConstant(weights[j][static_cast<std::size_t>(u)]);
    num += k.cwiseProduct(local_scores[j]);
    den += k;
  }
  Eigen::MatrixXd out(m, n);
  for (Eigen::Index u = 0; u < m; ++u)
    for (Eigen::Index i = 0; i < n; ++i)
      out(u, i) = den(u, i) > 0.0 ? num(u, i) / den(u, i) : global_scores(u, i);
  return out;
}

inline SplitDataset make_split(std::vector<std::vector<ItemIndex>> train, std::vector<std::vector<ItemIndex>> heldout,
                               ItemIndex n) {
  SplitDataset s;
  s.train = RatingMatrix::from_rows(std::move(train), n);
  for (auto& h : heldout) std::sort(h.begin(), h.end());
  s.heldout = std::move(heldout);
  s.k = s.heldout.empty() ? 0 : static_cast<int>(s.heldout.front().size());
  return s;
}

inline SplitDataset synthetic_split(std::uint64_t seed, int k = 5) {
  BlockLogSpec spec;
  spec.seed = seed;
  const auto log = make_block_log(spec);
  const auto matrix = preprocess(log, 10);
  return leave_k_out_split(log, matrix, k);
}

}  // namespace loca::testing
