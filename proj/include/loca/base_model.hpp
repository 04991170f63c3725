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

#include <concepts>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "loca/dae.hpp"
#include "loca/dataset.hpp"
#include "loca/ease.hpp"

namespace loca {

// A recommender that scores a binary user row and persists itself.
template <class M>
concept BaseModel = std::semiregular<M> && requires(const M& m, std::span<const ItemIndex> items,
                                                    std::ostream& os, std::istream& is) {
  { m.score(items) } -> std::same_as<Eigen::VectorXd>;
  { m.n() } -> std::convertible_to<ItemIndex>;
  m.save(os);
  { M::load(is, std::string{}) } -> std::same_as<M>;
  { M::kind_name } -> std::convertible_to<const char*>;
};

// Fits one base model under per-user weights with an explicit seed.
template <class T>
concept ModelTrainer = requires(const T& t, const RatingMatrix& x, std::span<const double> w, std::uint64_t seed) {
  typename T::model_type;
  requires BaseModel<typename T::model_type>;
  { t(x, w, seed) } -> std::same_as<typename T::model_type>;
};

struct EaseTrainer {
  using model_type = EaseModel;
  double lambda = 100.0;

  EaseModel operator()(const RatingMatrix& x, std::span<const double> w, std::uint64_t /*seed*/) const {
    return train_ease(x, w, lambda);
  }
};

struct DaeTrainer {
  using model_type = DaeModel;
  int hidden = 200;
  TrainConfig config;

  DaeModel operator()(const RatingMatrix& x, std::span<const double> w, std::uint64_t seed) const {
    auto c = config;
    c.seed = seed;
    return train_dae(x, w, hidden, c);
  }
};

static_assert(BaseModel<EaseModel> && BaseModel<DaeModel>);
static_assert(ModelTrainer<EaseTrainer> && ModelTrainer<DaeTrainer>);

}  // namespace loca
