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

// Shallow denoising autoencoder: tanh hidden layer, sigmoid output,
// cross-entropy reconstruction loss weighted per user, trained with Adam.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/detail/random.hpp"
#include "loca/detail/weights.hpp"
#include "loca/error.hpp"

namespace loca {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 512;
  int max_epochs = 200;
  int patience = 50;
  double l2 = 0.01;
  double init_std = 0.01;
  double dropout = 0.5;  // input corruption rate
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("dae.learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("dae.batch_size must be >= 1");
    if (max_epochs < 0) throw ConfigError("dae.max_epochs must be >= 0");
    if (patience < 0) throw ConfigError("dae.patience must be >= 0");
    if (!(l2 >= 0.0)) throw ConfigError("dae.l2 must be >= 0");
    if (!(init_std >= 0.0)) throw ConfigError("dae.init_std must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dae.dropout must lie in [0, 1)");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("dae.adam_eps must be > 0");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct DaeParameters {
  Eigen::MatrixXd w_enc;  // n x d
  Eigen::VectorXd b_enc;  // d
  Eigen::MatrixXd w_dec;  // d x n
  Eigen::VectorXd b_dec;  // n

  static DaeParameters zeros(ItemIndex n, int d) {
    return {Eigen::MatrixXd::Zero(n, d), Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, n),
            Eigen::VectorXd::Zero(n)};
  }

  bool all_finite() const {
    return w_enc.allFinite() && b_enc.allFinite() && w_dec.allFinite() && b_dec.allFinite();
  }

  friend bool operator==(const DaeParameters& a, const DaeParameters& b) {
    auto same = [](const auto& x, const auto& y) {
      return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return same(a.w_enc, b.w_enc) && same(a.b_enc, b.b_enc) && same(a.w_dec, b.w_dec) && same(a.b_dec, b.b_dec);
  }
};

class DaeModel {
 public:
  static constexpr std::uint32_t kind_id = 2;
  static constexpr const char* kind_name = "dae";

  DaeModel() = default;
  DaeModel(DaeParameters p, TrainConfig trained_with = {}) : p_(std::move(p)), config_(trained_with) {
    if (p_.w_enc.cols() < 1) throw ConfigError("DAE hidden width must be >= 1");
    const auto n = p_.w_enc.rows();
    const auto d = p_.w_enc.cols();
    if (p_.b_enc.size() != d || p_.w_dec.rows() != d || p_.w_dec.cols() != n || p_.b_dec.size() != n)
      throw ConfigError("inconsistent DAE parameter shapes");
  }

  ItemIndex n() const { return static_cast<ItemIndex>(p_.w_enc.rows()); }
  int d() const { return static_cast<int>(p_.w_enc.cols()); }
  const DaeParameters& parameters() const { return p_; }
  DaeParameters& parameters() { return p_; }
  const TrainConfig& trained_with() const { return config_; }
  double dropout() const { return config_.dropout; }

  // Hidden activation for a binary row given by its positive items.
  Eigen::VectorXd hidden(std::span<const ItemIndex> items) const {
    Eigen::VectorXd a = p_.b_enc;
    for (auto i : items) {
      if (i < 0 || i >= n()) throw DomainError("item index out of range in score");
      a += p_.w_enc.row(i).transpose();
    }
    return a.array().tanh().matrix();
  }

  Eigen::VectorXd hidden(const Eigen::VectorXd& r) const {
    check_length(r);
    return (p_.w_enc.transpose() * r + p_.b_enc).array().tanh().matrix();
  }

  // Forward pass without corruption.
  Eigen::VectorXd score(std::span<const ItemIndex> items) const { return decode(hidden(items)); }
  Eigen::VectorXd score(const Eigen::VectorXd& r) const { return decode(hidden(r)); }

  void save(std::ostream& os) const {
    detail::BinaryWriter w(os);
    w.tag("LOCAMDL1");
    w.pod(kind_id);
    w.string("tanh");
    w.string("sigmoid");
    w.pod(config_.learning_rate);
    w.pod(static_cast<std::int64_t>(config_.batch_size));
    w.pod(static_cast<std::int64_t>(config_.max_epochs));
    w.pod(static_cast<std::int64_t>(config_.patience));
    w.pod(config_.l2);
    w.pod(config_.init_std);
    w.pod(config_.dropout);
    w.pod(config_.seed);
    w.pod(config_.adam_beta1);
    w.pod(config_.adam_beta2);
    w.pod(config_.adam_eps);
    w.matrix(p_.w_enc);
    w.vector(p_.b_enc);
    w.matrix(p_.w_dec);
    w.vector(p_.b_dec);
  }

  static DaeModel load(std::istream& is, const std::string& what = "dae model") {
    detail::BinaryReader r(is, what);
    r.expect_tag("LOCAMDL1");
    if (r.pod<std::uint32_t>() != kind_id) throw FormatError(what + ": not a DAE model");
    if (r.string() != "tanh" || r.string() != "sigmoid") throw FormatError(what + ": unsupported activation");
    TrainConfig c;
    c.learning_rate = r.pod<double>();
    c.batch_size = static_cast<int>(r.pod<std::int64_t>());
    c.max_epochs = static_cast<int>(r.pod<std::int64_t>());
    c.patience = static_cast<int>(r.pod<std::int64_t>());
    c.l2 = r.pod<double>();
    c.init_std = r.pod<double>();
    c.dropout = r.pod<double>();
    c.seed = r.pod<std::uint64_t>();
    c.adam_beta1 = r.pod<double>();
    c.adam_beta2 = r.pod<double>();
    c.adam_eps = r.pod<double>();
    DaeParameters p;
    p.w_enc = r.matrix();
    p.b_enc = r.vector();
    p.w_dec = r.matrix();
    p.b_dec = r.vector();
    return DaeModel(std::move(p), c);
  }

  friend bool operator==(const DaeModel& a, const DaeModel& b) { return a.p_ == b.p_ && a.config_ == b.config_; }

 private:
  void check_length(const Eigen::VectorXd& r) const {
    if (r.size() != n())
      throw DomainError("score input has length " + std::to_string(r.size()) + ", expected " + std::to_string(n()));
  }
  Eigen::VectorXd decode(const Eigen::VectorXd& h) const {
    Eigen::VectorXd z = p_.w_dec.transpose() * h + p_.b_dec;
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }

  DaeParameters p_;
  TrainConfig config_;
};

// Gradient of dae_objective with respect to every parameter block.
struct DaeGradients {
  Eigen::MatrixXd w_enc;
  Eigen::VectorXd b_enc;
  Eigen::MatrixXd w_dec;
  Eigen::VectorXd b_dec;
  double objective = 0.0;
};

namespace detail {

constexpr double kLogEps = 1e-10;

struct DaeForward {
  Eigen::MatrixXd hidden;  // b x d
  Eigen::MatrixXd output;  // b x n
};

inline DaeForward dae_forward(const DaeParameters& p, const Eigen::MatrixXd& input) {
  DaeForward f;
  f.hidden = ((input * p.w_enc).rowwise() + p.b_enc.transpose()).array().tanh().matrix();
  Eigen::MatrixXd z = (f.hidden * p.w_dec).rowwise() + p.b_dec.transpose();
  f.output = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  return f;
}

inline double weighted_cross_entropy(const Eigen::MatrixXd& output, const Eigen::MatrixXd& target,
                                     const Eigen::VectorXd& weights) {
  double total = 0.0;
  for (Eigen::Index u = 0; u < output.rows(); ++u) {
    double ce = 0.0;
    for (Eigen::Index i = 0; i < output.cols(); ++i) {
      const double y = output(u, i);
      const double r = target(u, i);
      ce -= r * std::log(std::clamp(y, kLogEps, 1.0)) + (1.0 - r) * std::log(std::clamp(1.0 - y, kLogEps, 1.0));
    }
    total += weights[u] * ce;
  }
  return total;
}

}  // namespace detail

// sum_u weights_u * CE(target_u, f(input_u)) + l2 * (|W_enc|^2 + |W_dec|^2)
inline double dae_objective(const DaeParameters& p, const Eigen::MatrixXd& input, const Eigen::MatrixXd& target,
                            const Eigen::VectorXd& weights, double l2) {
  const auto f = detail::dae_forward(p, input);
  return detail::weighted_cross_entropy(f.output, target, weights) +
         l2 * (p.w_enc.squaredNorm() + p.w_dec.squaredNorm());
}

inline DaeGradients dae_gradients(const DaeParameters& p, const Eigen::MatrixXd& input, const Eigen::MatrixXd& target,
                                  const Eigen::VectorXd& weights, double l2) {
  const auto f = detail::dae_forward(p, input);
  DaeGradients g;
  g.objective = detail::weighted_cross_entropy(f.output, target, weights) +
                l2 * (p.w_enc.squaredNorm() + p.w_dec.squaredNorm());
  // Sigmoid output with cross-entropy: dL/dz = w_u (y_hat - r).
  const Eigen::MatrixXd dz = weights.asDiagonal() * (f.output - target);
  g.w_dec = f.hidden.transpose() * dz + 2.0 * l2 * p.w_dec;
  g.b_dec = dz.colwise().sum().transpose();
  const Eigen::MatrixXd da = ((dz * p.w_dec.transpose()).array() * (1.0 - f.hidden.array().square())).matrix();
  g.w_enc = input.transpose() * da + 2.0 * l2 * p.w_enc;
  g.b_enc = da.colwise().sum().transpose();
  return g;
}

inline DaeParameters init_dae_parameters(ItemIndex n, int d, double init_std, Rng& rng) {
  auto p = DaeParameters::zeros(n, d);
  if (init_std == 0.0) return p;
  std::normal_distribution<double> normal(0.0, init_std);
  for (Eigen::Index r = 0; r < p.w_enc.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w_enc.cols(); ++c) p.w_enc(r, c) = normal(rng);
  for (Eigen::Index k = 0; k < p.b_enc.size(); ++k) p.b_enc[k] = normal(rng);
  for (Eigen::Index r = 0; r < p.w_dec.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w_dec.cols(); ++c) p.w_dec(r, c) = normal(rng);
  for (Eigen::Index k = 0; k < p.b_dec.size(); ++k) p.b_dec[k] = normal(rng);
  return p;
}

struct DaeFit {
  DaeModel model;
  std::vector<double> epoch_loss;  // weighted objective summed over each epoch's batches
  int best_epoch = -1;             // -1 when no epoch ran
};

namespace detail {

class Adam {
 public:
  Adam(const DaeParameters& shape, const TrainConfig& c)
      : m_(DaeParameters::zeros(static_cast<ItemIndex>(shape.w_enc.rows()), static_cast<int>(shape.w_enc.cols()))),
        v_(m_),
        c_(c) {}

  void step(DaeParameters& p, const DaeGradients& g) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c_.adam_beta1, t_);
    const double bc2 = 1.0 - std::pow(c_.adam_beta2, t_);
    update(p.w_enc, m_.w_enc, v_.w_enc, g.w_enc, bc1, bc2);
    update(p.b_enc, m_.b_enc, v_.b_enc, g.b_enc, bc1, bc2);
    update(p.w_dec, m_.w_dec, v_.w_dec, g.w_dec, bc1, bc2);
    update(p.b_dec, m_.b_dec, v_.b_dec, g.b_dec, bc1, bc2);
  }

 private:
  template <class T>
  void update(T& param, T& m, T& v, const T& grad, double bc1, double bc2) {
    m = c_.adam_beta1 * m + (1.0 - c_.adam_beta1) * grad;
    v = c_.adam_beta2 * v + (1.0 - c_.adam_beta2) * grad.cwiseProduct(grad);
    param.array() -= c_.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c_.adam_eps);
  }

  DaeParameters m_, v_;
  TrainConfig c_;
  int t_ = 0;
};

}  // namespace detail

// Minimizes sum_u t_u CE(r_u, f(corrupt(r_u))) + l2 * Omega over users with
// t_u > 0. Each mini-batch carries |batch| / |active| of the regularizer so
// an epoch sums to the full objective. Training stops after max_epochs or
// `patience` consecutive epochs without a lower epoch loss; the parameters
// from the best epoch are returned.
inline DaeFit fit_dae(const RatingMatrix& train, std::span<const double> row_weights, int d,
                      const TrainConfig& config) {
  if (d < 1) throw ConfigError("DAE hidden width must be >= 1");
  config.validate();
  detail::check_row_weights(train, row_weights);

  Rng rng(config.seed);
  const auto n = train.n();
  DaeParameters params = init_dae_parameters(n, d, config.init_std, rng);
  DaeFit fit;
  if (config.max_epochs == 0) {
    fit.model = DaeModel(std::move(params), config);
    return fit;
  }

  std::vector<UserIndex> active;
  for (UserIndex u = 0; u < train.m(); ++u)
    if (row_weights[static_cast<std::size_t>(u)] > 0.0) active.push_back(u);
  const double keep_scale = 1.0 / (1.0 - config.dropout);
  detail::Adam adam(params, config);
  DaeParameters best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    detail::shuffle(std::span<UserIndex>(active), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < active.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto stop = std::min(active.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd target = Eigen::MatrixXd::Zero(b, n);
      Eigen::MatrixXd input = Eigen::MatrixXd::Zero(b, n);
      Eigen::VectorXd w(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const auto u = active[start + static_cast<std::size_t>(k)];
        w[k] = row_weights[static_cast<std::size_t>(u)];
        for (auto i : train.row(u)) {
          target(k, i) = 1.0;
          if (config.dropout == 0.0) input(k, i) = 1.0;
          else if (detail::uniform01(rng) >= config.dropout) input(k, i) = keep_scale;
        }
      }
      const double reg = config.l2 * static_cast<double>(b) / static_cast<double>(active.size());
      const auto g = dae_gradients(params, input, target, w, reg);
      if (!std::isfinite(g.objective))
        throw TrainingError("DAE loss diverged at epoch " + std::to_string(epoch));
      epoch_loss += g.objective;
      adam.step(params, g);
    }
    if (!params.all_finite()) throw TrainingError("DAE parameters diverged at epoch " + std::to_string(epoch));
    fit.epoch_loss.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best = params;
      fit.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  fit.model = DaeModel(std::move(best), config);
  return fit;
}

inline DaeModel train_dae(const RatingMatrix& train, std::span<const double> row_weights, int d,
                          const TrainConfig& config) {
  return fit_dae(train, row_weights, d, config).model;
}

}  // namespace loca
