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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "loca/dataset.hpp"

namespace loca {

// Indices of the N highest scores, best first. Items in `exclude` (sorted
// ascending) are never returned; equal scores rank the lower index first.
inline std::vector<ItemIndex> top_n(const Eigen::VectorXd& scores, int N, std::span<const ItemIndex> exclude = {}) {
  std::vector<ItemIndex> candidates;
  candidates.reserve(static_cast<std::size_t>(scores.size()));
  for (ItemIndex i = 0; i < static_cast<ItemIndex>(scores.size()); ++i)
    if (!std::binary_search(exclude.begin(), exclude.end(), i)) candidates.push_back(i);
  const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(std::max(N, 0)));
  // NaN ranks last.
  auto key = [&](ItemIndex i) {
    const double s = scores[i];
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
  };
  auto better = [&](ItemIndex a, ItemIndex b) {
    const double sa = key(a), sb = key(b);
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(), better);
  candidates.resize(keep);
  return candidates;
}

}  // namespace loca
