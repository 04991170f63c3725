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

// Recall@N and NDCG@N over leave-k-out held-out items.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loca/base_model.hpp"
#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/detail/parallel.hpp"
#include "loca/error.hpp"
#include "loca/loca.hpp"
#include "loca/ranking.hpp"

namespace loca {

namespace detail {

inline std::vector<ItemIndex> sorted_copy(std::span<const ItemIndex> v) {
  std::vector<ItemIndex> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

inline void check_metric_args(std::span<const ItemIndex> heldout, int N) {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (heldout.empty()) throw DomainError("metric undefined for an empty held-out set");
}

}  // namespace detail

// Held-out items found in the first N ranked items, divided by |heldout|.
inline double recall_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> heldout, int N) {
  detail::check_metric_args(heldout, N);
  const auto rel = detail::sorted_copy(heldout);
  const auto depth = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(N));
  int hits = 0;
  for (std::size_t p = 0; p < depth; ++p) hits += std::binary_search(rel.begin(), rel.end(), ranked[p]);
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

// DCG of the first N ranked items over the DCG of min(k, N) hits at the top.
inline double ndcg_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> heldout, int N) {
  detail::check_metric_args(heldout, N);
  const auto rel = detail::sorted_copy(heldout);
  const auto depth = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(N));
  double dcg = 0.0;
  for (std::size_t p = 0; p < depth; ++p)
    if (std::binary_search(rel.begin(), rel.end(), ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  double idcg = 0.0;
  const auto ideal = std::min<std::size_t>(rel.size(), static_cast<std::size_t>(N));
  for (std::size_t p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

struct UserMetrics {
  UserIndex user = 0;
  std::vector<double> recall;  // one value per evaluated N
  std::vector<double> ndcg;
};

struct EvalReport {
  std::vector<int> n_values;
  int k = 0;
  std::vector<UserMetrics> per_user;  // users with a non-empty held-out set
  std::vector<double> mean_recall;
  std::vector<double> mean_ndcg;
  std::optional<double> coverage;  // only for LOCA models

  friend bool operator==(const EvalReport& a, const EvalReport& b) {
    auto same_users = [&] {
      for (std::size_t i = 0; i < a.per_user.size(); ++i) {
        const auto& x = a.per_user[i];
        const auto& y = b.per_user[i];
        if (x.user != y.user || x.recall != y.recall || x.ndcg != y.ndcg) return false;
      }
      return true;
    };
    return a.n_values == b.n_values && a.k == b.k && a.per_user.size() == b.per_user.size() && same_users() &&
           a.mean_recall == b.mean_recall && a.mean_ndcg == b.mean_ndcg && a.coverage == b.coverage;
  }
};

// Ranks every item outside each user's train row with `score(u, row)` and
// computes both metrics at every N. Users are scored concurrently on up to
// `jobs` threads; the report does not depend on jobs.
template <class Scorer>
EvalReport evaluate_scores(Scorer&& score, const SplitDataset& split, std::vector<int> n_values, int jobs = 1) {
  if (n_values.empty()) throw ConfigError("at least one N value is required");
  for (int N : n_values)
    if (N < 1) throw ConfigError("N values must be >= 1");
  const auto& train = split.train;
  if (split.heldout.size() != static_cast<std::size_t>(train.m()))
    throw ConfigError("held-out sets do not match the train matrix");
  const int max_n = *std::max_element(n_values.begin(), n_values.end());

  EvalReport report;
  report.n_values = n_values;
  report.k = split.k;
  std::vector<UserIndex> users;
  for (UserIndex u = 0; u < train.m(); ++u)
    if (!split.heldout[static_cast<std::size_t>(u)].empty()) users.push_back(u);
  report.per_user.resize(users.size());

  detail::parallel_for(users.size(), jobs, [&](std::size_t idx) {
    const auto u = users[idx];
    const auto row = train.row(u);
    const Eigen::VectorXd s = score(u, row);
    if (s.size() != train.n()) throw ConfigError("model and split disagree on item count");
    const auto ranked = top_n(s, max_n, row);
    const auto& held = split.heldout[static_cast<std::size_t>(u)];
    UserMetrics um;
    um.user = u;
    for (int N : n_values) {
      um.recall.push_back(recall_at_n(ranked, held, N));
      um.ndcg.push_back(ndcg_at_n(ranked, held, N));
    }
    report.per_user[idx] = std::move(um);
  });

  report.mean_recall.assign(n_values.size(), 0.0);
  report.mean_ndcg.assign(n_values.size(), 0.0);
  for (const auto& um : report.per_user)
    for (std::size_t c = 0; c < n_values.size(); ++c) {
      report.mean_recall[c] += um.recall[c];
      report.mean_ndcg[c] += um.ndcg[c];
    }
  if (!report.per_user.empty())
    for (std::size_t c = 0; c < n_values.size(); ++c) {
      report.mean_recall[c] /= static_cast<double>(report.per_user.size());
      report.mean_ndcg[c] /= static_cast<double>(report.per_user.size());
    }
  return report;
}

template <BaseModel Model>
EvalReport evaluate_model(const Model& model, const SplitDataset& split, std::vector<int> n_values = {50, 100},
                          int jobs = 1) {
  return evaluate_scores([&](UserIndex, std::span<const ItemIndex> row) { return model.score(row); }, split,
                         std::move(n_values), jobs);
}

template <BaseModel Model>
EvalReport evaluate_model(const LocaModel<Model>& model, const SplitDataset& split,
                          std::vector<int> n_values = {50, 100}, int jobs = 1) {
  auto r = evaluate_scores([&](UserIndex u, std::span<const ItemIndex> row) { return model.predict_user(u, row); },
                           split, std::move(n_values), jobs);
  r.coverage = model.coverage();
  return r;
}

inline EvalReport evaluate_model(const AnyLocaModel& model, const SplitDataset& split,
                                 std::vector<int> n_values = {50, 100}, int jobs = 1) {
  return model.visit([&](const auto& m) { return evaluate_model(m, split, n_values, jobs); });
}

struct ActivityBucket {
  int lo = 0;              // inclusive train-row size
  std::optional<int> hi;   // exclusive; unset for the last bucket
  int users = 0;
  std::vector<double> mean_recall;  // empty when the bucket has no users
  std::vector<double> mean_ndcg;

  bool empty() const { return users == 0; }
};

// Buckets [0, e1), [e1, e2), ..., [e_last, inf) of train-row sizes.
inline std::vector<ActivityBucket> breakdown_by_activity(const EvalReport& report, const RatingMatrix& train,
                                                         const std::vector<int>& bucket_edges) {
  for (std::size_t i = 1; i < bucket_edges.size(); ++i)
    if (bucket_edges[i] <= bucket_edges[i - 1]) throw ConfigError("bucket edges must be strictly increasing");
  std::vector<ActivityBucket> buckets(bucket_edges.size() + 1);
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    buckets[b].lo = b == 0 ? 0 : bucket_edges[b - 1];
    if (b < bucket_edges.size()) buckets[b].hi = bucket_edges[b];
    buckets[b].mean_recall.assign(report.n_values.size(), 0.0);
    buckets[b].mean_ndcg.assign(report.n_values.size(), 0.0);
  }
  for (const auto& um : report.per_user) {
    const auto size = static_cast<int>(train.row(um.user).size());
    const auto b = static_cast<std::size_t>(std::upper_bound(bucket_edges.begin(), bucket_edges.end(), size) -
                                            bucket_edges.begin());
    auto& bk = buckets[b];
    ++bk.users;
    for (std::size_t c = 0; c < report.n_values.size(); ++c) {
      bk.mean_recall[c] += um.recall[c];
      bk.mean_ndcg[c] += um.ndcg[c];
    }
  }
  for (auto& bk : buckets) {
    if (bk.users == 0) {
      bk.mean_recall.clear();
      bk.mean_ndcg.clear();
      continue;
    }
    for (auto& v : bk.mean_recall) v /= bk.users;
    for (auto& v : bk.mean_ndcg) v /= bk.users;
  }
  return buckets;
}

// Rows of "user,metric,N,value".
inline void write_report_table(const EvalReport& r, std::ostream& os) {
  os << "user,metric,N,value\n";
  for (const auto& um : r.per_user)
    for (std::size_t c = 0; c < r.n_values.size(); ++c) {
      os << um.user << ",recall," << r.n_values[c] << ',' << detail::format_double(um.recall[c]) << '\n';
      os << um.user << ",ndcg," << r.n_values[c] << ',' << detail::format_double(um.ndcg[c]) << '\n';
    }
}

inline void write_report_summary(const EvalReport& r, std::ostream& os) {
  os << "users=" << r.per_user.size() << "\nk=" << r.k << '\n';
  for (std::size_t c = 0; c < r.n_values.size(); ++c) {
    os << "recall@" << r.n_values[c] << '=' << detail::format_double(r.mean_recall[c]) << '\n';
    os << "ndcg@" << r.n_values[c] << '=' << detail::format_double(r.mean_ndcg[c]) << '\n';
  }
  if (r.coverage) os << "coverage=" << detail::format_double(*r.coverage) << '\n';
}

inline void write_activity_table(const std::vector<ActivityBucket>& buckets, const std::vector<int>& n_values,
                                 std::ostream& os) {
  os << "lo,hi,users,metric,N,value\n";
  for (const auto& b : buckets) {
    const std::string hi = b.hi ? std::to_string(*b.hi) : "inf";
    if (b.empty()) {
      os << b.lo << ',' << hi << ",0,empty,,\n";
      continue;
    }
    for (std::size_t c = 0; c < n_values.size(); ++c) {
      os << b.lo << ',' << hi << ',' << b.users << ",recall," << n_values[c] << ','
         << detail::format_double(b.mean_recall[c]) << '\n';
      os << b.lo << ',' << hi << ',' << b.users << ",ndcg," << n_values[c] << ','
         << detail::format_double(b.mean_ndcg[c]) << '\n';
    }
  }
}

}  // namespace loca
