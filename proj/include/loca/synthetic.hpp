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

// Planted-community interaction logs for experiments and tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loca/dataset.hpp"
#include "loca/detail/random.hpp"
#include "loca/error.hpp"

namespace loca {

struct BlockLogSpec {
  int users = 200;
  int items = 100;
  int blocks = 2;
  double noise = 0.05;       // chance that an interaction falls outside the user's block
  int min_length = 15;       // interactions per user, drawn uniformly in [min_length, max_length]
  int max_length = 25;
  double popularity_skew = 0.7;  // in-block item weights (rank + 1)^-skew, ranks shuffled per block
  std::uint64_t seed = 0;
};

// Users are split evenly into blocks, each preferring a disjoint item range.
// Timestamps follow draw order, so held-out items are a random subset of a
// user's history. Tokens are "u<index>" and "i<index>".
inline InteractionLog make_block_log(const BlockLogSpec& spec) {
  if (spec.users < 1 || spec.items < spec.blocks || spec.blocks < 1) throw ConfigError("invalid block log shape");
  if (spec.min_length < 1 || spec.max_length < spec.min_length) throw ConfigError("invalid interaction lengths");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) throw ConfigError("noise must lie in [0, 1]");
  const int block_items = spec.items / spec.blocks;
  if (spec.max_length > block_items) throw ConfigError("max_length exceeds the items per block");

  Rng rng(spec.seed);
  // Per-block cumulative popularity over the block's items.
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(spec.blocks));
  for (int b = 0; b < spec.blocks; ++b) {
    std::vector<int> rank(static_cast<std::size_t>(block_items));
    for (int i = 0; i < block_items; ++i) rank[static_cast<std::size_t>(i)] = i;
    detail::shuffle(std::span<int>(rank), rng);
    double total = 0.0;
    for (int i = 0; i < block_items; ++i) {
      total += std::pow(rank[static_cast<std::size_t>(i)] + 1.0, -spec.popularity_skew);
      cdf[static_cast<std::size_t>(b)].push_back(total);
    }
    for (auto& c : cdf[static_cast<std::size_t>(b)]) c /= total;
  }

  InteractionLog log;
  log.has_timestamps = true;
  for (int u = 0; u < spec.users; ++u) {
    const int block = static_cast<int>(static_cast<long long>(u) * spec.blocks / spec.users);
    const int lo = block * block_items;
    const int length =
        spec.min_length + static_cast<int>(detail::uniform_index(rng, static_cast<std::uint64_t>(spec.max_length - spec.min_length + 1)));
    std::vector<int> seen;
    std::int64_t ts = 0;
    while (static_cast<int>(seen.size()) < length) {
      int item;
      if (detail::uniform01(rng) < spec.noise && spec.items > block_items) {
        do {
          item = static_cast<int>(detail::uniform_index(rng, static_cast<std::uint64_t>(spec.items)));
        } while (item >= lo && item < lo + block_items);
      } else {
        const auto& c = cdf[static_cast<std::size_t>(block)];
        const double x = detail::uniform01(rng);
        item = lo + static_cast<int>(std::upper_bound(c.begin(), c.end(), x) - c.begin());
        item = std::min(item, lo + block_items - 1);
      }
      if (std::find(seen.begin(), seen.end(), item) != seen.end()) continue;
      seen.push_back(item);
      log.records.push_back({"u" + std::to_string(u), "i" + std::to_string(item), 1.0, ++ts});
    }
  }
  return log;
}

}  // namespace loca
