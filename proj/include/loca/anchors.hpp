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

// Anchor-user selection: greedy coverage over the inference-bandwidth user
// graph, plus random, farthest-point and k-means alternatives.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/detail/random.hpp"
#include "loca/error.hpp"
#include "loca/neighborhood.hpp"

namespace loca {

// Unweighted user graph; i and j are adjacent iff the inference kernel
// gives them a positive weight.
struct CoverageGraph {
  UserIndex m = 0;
  double h_W = 0.0;
  std::vector<std::vector<UserIndex>> adjacency;  // sorted, no self loops

  std::size_t edge_count() const {
    std::size_t s = 0;
    for (const auto& a : adjacency) s += a.size();
    return s / 2;
  }
};

inline CoverageGraph build_coverage_graph(const EmbeddingMatrix& embeddings, double h_W,
                                          bool scale_distance = false) {
  if (!(h_W > 0.0)) throw ConfigError("kernel.h_W must be > 0");
  CoverageGraph g;
  g.m = embeddings.m();
  g.h_W = h_W;
  g.adjacency.resize(static_cast<std::size_t>(g.m));
  for (UserIndex i = 0; i < g.m; ++i) {
    for (UserIndex j = i + 1; j < g.m; ++j) {
      if (kernel_weight(scaled_distance(embeddings, i, j, scale_distance), h_W) > 0.0) {
        g.adjacency[static_cast<std::size_t>(i)].push_back(j);
        g.adjacency[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
  return g;
}

enum class AnchorStrategy { coverage, random, farthest, kmeans };

inline std::string_view to_string(AnchorStrategy s) {
  switch (s) {
    case AnchorStrategy::coverage: return "coverage";
    case AnchorStrategy::random: return "random";
    case AnchorStrategy::farthest: return "farthest";
    case AnchorStrategy::kmeans: return "kmeans";
  }
  return "?";
}

inline AnchorStrategy parse_anchor_strategy(std::string_view s) {
  if (s == "coverage") return AnchorStrategy::coverage;
  if (s == "random") return AnchorStrategy::random;
  if (s == "farthest") return AnchorStrategy::farthest;
  if (s == "kmeans") return AnchorStrategy::kmeans;
  throw ConfigError("unknown anchor strategy '" + std::string(s) + "'");
}

struct AnchorSet {
  std::vector<UserIndex> anchors;
  AnchorStrategy strategy = AnchorStrategy::coverage;
  std::uint64_t seed = 0;

  friend bool operator==(const AnchorSet&, const AnchorSet&) = default;
};

namespace detail {

// Greedy coverage. A node covers itself and its neighbours. When no
// remaining candidate can cover an uncovered node (in particular once every
// node is covered) the covered set is cleared and selection continues.
// Ties go to the lowest index.
inline std::vector<UserIndex> greedy_coverage(const CoverageGraph& g, int q) {
  const auto m = static_cast<std::size_t>(g.m);
  std::vector<char> covered(m, 0), is_anchor(m, 0);
  std::vector<int> gain(m);
  auto reset_gains = [&] {
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t v = 0; v < m; ++v) gain[v] = 1 + static_cast<int>(g.adjacency[v].size());
  };
  auto cover = [&](UserIndex x) {
    const auto xs = static_cast<std::size_t>(x);
    if (covered[xs]) return;
    covered[xs] = 1;
    --gain[xs];
    for (auto y : g.adjacency[xs]) --gain[static_cast<std::size_t>(y)];
  };
  reset_gains();

  std::vector<UserIndex> anchors;
  anchors.reserve(static_cast<std::size_t>(q));
  while (static_cast<int>(anchors.size()) < q) {
    int best = -1;
    std::size_t best_v = m;
    for (std::size_t v = 0; v < m; ++v)
      if (!is_anchor[v] && gain[v] > best) {
        best = gain[v];
        best_v = v;
      }
    if (best == 0) {
      reset_gains();
      continue;
    }
    const auto a = static_cast<UserIndex>(best_v);
    is_anchor[best_v] = 1;
    anchors.push_back(a);
    cover(a);
    for (auto y : g.adjacency[best_v]) cover(y);
  }
  return anchors;
}

inline std::vector<UserIndex> random_anchors(UserIndex m, int q, std::uint64_t seed) {
  std::vector<UserIndex> all(static_cast<std::size_t>(m));
  for (UserIndex u = 0; u < m; ++u) all[static_cast<std::size_t>(u)] = u;
  Rng rng(seed);
  // Partial Fisher-Yates: the first q slots are a uniform sample.
  for (int k = 0; k < q; ++k) {
    const auto j = static_cast<std::size_t>(k) + static_cast<std::size_t>(uniform_index(rng, static_cast<std::uint64_t>(m - k)));
    std::swap(all[static_cast<std::size_t>(k)], all[j]);
  }
  all.resize(static_cast<std::size_t>(q));
  return all;
}

// Max-min distance seeding, starting from the first coverage pick.
inline std::vector<UserIndex> farthest_anchors(const CoverageGraph& g, const EmbeddingMatrix& e, int q) {
  std::vector<UserIndex> anchors = greedy_coverage(g, 1);
  const auto m = static_cast<std::size_t>(e.m());
  std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
  std::vector<char> is_anchor(m, 0);
  auto add = [&](UserIndex a) {
    is_anchor[static_cast<std::size_t>(a)] = 1;
    for (std::size_t v = 0; v < m; ++v)
      min_dist[v] = std::min(min_dist[v], e.distance(a, static_cast<UserIndex>(v)));
  };
  add(anchors.front());
  while (static_cast<int>(anchors.size()) < q) {
    double best = -1.0;
    std::size_t best_v = m;
    for (std::size_t v = 0; v < m; ++v)
      if (!is_anchor[v] && min_dist[v] > best) {
        best = min_dist[v];
        best_v = v;
      }
    anchors.push_back(static_cast<UserIndex>(best_v));
    add(anchors.back());
  }
  return anchors;
}

// Lloyd's algorithm on unit-normalized embeddings. Initial centroids are a
// seeded random sample of users; anchors are the users nearest to each
// final centroid, with duplicates resolved by the next-nearest free user.
inline std::vector<UserIndex> kmeans_anchors(const EmbeddingMatrix& e, int q, std::uint64_t seed,
                                             int max_iterations = 100, double tolerance = 1e-6) {
  const auto m = e.m();
  const auto d = static_cast<std::size_t>(e.d());
  auto sqdist = [d](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
  };
  std::vector<std::vector<double>> centroids;
  for (auto u : random_anchors(m, q, seed)) {
    const auto r = e.unit_row(u);
    centroids.emplace_back(r.begin(), r.end());
  }
  std::vector<int> assign(static_cast<std::size_t>(m), 0);
  for (int it = 0; it < max_iterations; ++it) {
    for (UserIndex u = 0; u < m; ++u) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < q; ++c) {
        const double dd = sqdist(e.unit_row(u), centroids[static_cast<std::size_t>(c)]);
        if (dd < best) {
          best = dd;
          assign[static_cast<std::size_t>(u)] = c;
        }
      }
    }
    std::vector<std::vector<double>> next(static_cast<std::size_t>(q), std::vector<double>(d, 0.0));
    std::vector<int> count(static_cast<std::size_t>(q), 0);
    for (UserIndex u = 0; u < m; ++u) {
      const auto c = static_cast<std::size_t>(assign[static_cast<std::size_t>(u)]);
      const auto r = e.unit_row(u);
      for (std::size_t k = 0; k < d; ++k) next[c][k] += r[k];
      ++count[c];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < next.size(); ++c) {
      if (count[c] == 0) {
        next[c] = centroids[c];  // empty cluster keeps its centroid
        continue;
      }
      for (auto& x : next[c]) x /= count[c];
      moved = std::max(moved, std::sqrt(sqdist(next[c], centroids[c])));
    }
    centroids = std::move(next);
    if (moved < tolerance) break;
  }

  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  std::vector<UserIndex> anchors;
  for (const auto& c : centroids) {
    double best = std::numeric_limits<double>::infinity();
    UserIndex best_u = -1;
    for (UserIndex u = 0; u < m; ++u) {
      if (taken[static_cast<std::size_t>(u)]) continue;
      const double dd = sqdist(e.unit_row(u), c);
      if (dd < best) {
        best = dd;
        best_u = u;
      }
    }
    taken[static_cast<std::size_t>(best_u)] = 1;
    anchors.push_back(best_u);
  }
  return anchors;
}

}  // namespace detail

inline AnchorSet select_anchors(const CoverageGraph& graph, const EmbeddingMatrix& embeddings, int q,
                                AnchorStrategy strategy, std::uint64_t seed = 0) {
  if (graph.m != embeddings.m()) throw ConfigError("coverage graph and embeddings disagree on user count");
  if (q < 0 || q > graph.m)
    throw ConfigError("q=" + std::to_string(q) + " must lie in [0, m=" + std::to_string(graph.m) + "]");
  AnchorSet out;
  out.strategy = strategy;
  out.seed = seed;
  if (q == 0) return out;
  switch (strategy) {
    case AnchorStrategy::coverage: out.anchors = detail::greedy_coverage(graph, q); break;
    case AnchorStrategy::random: out.anchors = detail::random_anchors(graph.m, q, seed); break;
    case AnchorStrategy::farthest: out.anchors = detail::farthest_anchors(graph, embeddings, q); break;
    case AnchorStrategy::kmeans: out.anchors = detail::kmeans_anchors(embeddings, q, seed); break;
  }
  return out;
}

// Fraction of users with a positive inference weight under some anchor.
inline double coverage_ratio(const AnchorSet& anchors, std::span<const WeightPair> pairs) {
  if (anchors.anchors.size() != pairs.size()) throw ConfigError("one weight pair per anchor is required");
  if (pairs.empty()) return 0.0;
  const auto m = pairs.front().w.size();
  if (m == 0) return 0.0;
  std::vector<char> hit(m, 0);
  for (const auto& p : pairs) {
    if (p.w.size() != m) throw ConfigError("weight pairs disagree on user count");
    for (std::size_t u = 0; u < m; ++u)
      if (p.w[u] > 0.0) hit[u] = 1;
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(m);
}

inline void save_anchor_set(const AnchorSet& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "# strategy=" << to_string(a.strategy) << " seed=" << a.seed << " q=" << a.anchors.size() << '\n';
  for (auto u : a.anchors) out << u << '\n';
}

inline AnchorSet load_anchor_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  AnchorSet a;
  std::size_t q = 0;
  bool have_q = false;
  for (auto tok : detail::split(detail::trim(line), " ")) {
    const auto kv = detail::split(tok, "=");
    if (kv.size() != 2) continue;
    if (kv[0] == "strategy") a.strategy = parse_anchor_strategy(kv[1]);
    else if (kv[0] == "seed") a.seed = detail::parse_number<std::uint64_t>(kv[1]).value_or(0);
    else if (kv[0] == "q") {
      q = detail::parse_number<std::size_t>(kv[1]).value_or(0);
      have_q = true;
    }
  }
  if (!have_q) throw FormatError(path.string() + ": missing anchor header");
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto v = detail::parse_number<UserIndex>(line);
    if (!v) throw FormatError(path.string() + ": bad anchor line '" + line + "'");
    a.anchors.push_back(*v);
  }
  if (a.anchors.size() != q) throw FormatError(path.string() + ": anchor count does not match header");
  return a;
}

}  // namespace loca
