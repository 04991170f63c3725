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

#include <cmath>
#include <span>
#include <string>

#include "loca/dataset.hpp"
#include "loca/error.hpp"

namespace loca::detail {

inline void check_row_weights(const RatingMatrix& train, std::span<const double> weights) {
  if (weights.size() != static_cast<std::size_t>(train.m()))
    throw ConfigError("row weight count " + std::to_string(weights.size()) + " does not match m=" +
                      std::to_string(train.m()));
  bool any = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("row weights must be finite and nonnegative");
    any = any || w > 0.0;
  }
  if (!any) throw ConfigError("all row weights are zero");
}

}  // namespace loca::detail
