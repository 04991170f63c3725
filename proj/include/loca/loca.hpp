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

// The LOCA ensemble: anchors, kernel-weighted local models, a global model,
// and kernel-weighted aggregation with a global fallback for users that no
// local model covers.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "loca/anchors.hpp"
#include "loca/base_model.hpp"
#include "loca/dae.hpp"
#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/detail/parallel.hpp"
#include "loca/detail/random.hpp"
#include "loca/ease.hpp"
#include "loca/embeddings.hpp"
#include "loca/error.hpp"
#include "loca/neighborhood.hpp"
#include "loca/ranking.hpp"

namespace loca {

enum class BaseKind { ease, dae };

inline std::string_view to_string(BaseKind k) { return k == BaseKind::ease ? "ease" : "dae"; }

inline BaseKind parse_base_kind(std::string_view s) {
  if (s == "ease") return BaseKind::ease;
  if (s == "dae") return BaseKind::dae;
  throw ConfigError("unknown base model '" + std::string(s) + "'");
}

struct LocaConfig {
  int q = 50;
  KernelConfig kernel;
  double alpha = 0.0;  // global-model share for covered users
  BaseKind base_model = BaseKind::ease;
  AnchorStrategy anchor_strategy = AnchorStrategy::coverage;
  std::optional<EmbeddingMethod> embedding_method;  // unset: follows base_model
  int embedding_dim = 64;
  int jobs = 1;
  std::uint64_t seed = 0;

  double ease_lambda = 100.0;
  int dae_hidden = 200;
  TrainConfig dae;

  // Global-model overrides; unset values are shared with the local models.
  std::optional<double> global_lambda;
  std::optional<double> global_learning_rate;
  std::optional<int> global_max_epochs;
  std::optional<double> global_dropout;

  EmbeddingMethod resolved_embedding_method() const {
    if (embedding_method) return *embedding_method;
    return base_model == BaseKind::dae ? EmbeddingMethod::dae_hidden : EmbeddingMethod::truncated_svd;
  }

  EaseTrainer local_ease() const { return {ease_lambda}; }
  EaseTrainer global_ease() const { return {global_lambda.value_or(ease_lambda)}; }
  DaeTrainer local_dae() const { return {dae_hidden, dae}; }
  DaeTrainer global_dae() const {
    DaeTrainer t{dae_hidden, dae};
    if (global_learning_rate) t.config.learning_rate = *global_learning_rate;
    if (global_max_epochs) t.config.max_epochs = *global_max_epochs;
    if (global_dropout) t.config.dropout = *global_dropout;
    return t;
  }

  void validate() const {
    if (q < 0) throw ConfigError("q must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(kernel.h_W > 0.0)) throw ConfigError("kernel.h_W must be > 0");
    if (!(kernel.h_T >= kernel.h_W))
      throw ConfigError("kernel.h_W=" + detail::format_double(kernel.h_W) + " must not exceed kernel.h_T=" +
                        detail::format_double(kernel.h_T));
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (!(ease_lambda > 0.0)) throw ConfigError("ease.lambda must be > 0");
    if (global_lambda && !(*global_lambda > 0.0)) throw ConfigError("global.lambda must be > 0");
    if (dae_hidden < 1) throw ConfigError("dae.hidden must be >= 1");
    dae.validate();
    global_dae().config.validate();
  }
};

namespace detail {

inline ConfigError bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  return ConfigError("key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
                     std::string(value) + "'");
}

inline double parse_real(std::string_view key, std::string_view value) {
  auto v = parse_number<double>(value);
  if (!v) throw bad_value(key, value, "a number");
  return *v;
}

inline int parse_int(std::string_view key, std::string_view value) {
  auto v = parse_number<int>(value);
  if (!v) throw bad_value(key, value, "an integer");
  return *v;
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  auto v = parse_number<std::uint64_t>(value);
  if (!v) throw bad_value(key, value, "a nonnegative integer");
  return *v;
}

inline bool parse_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw bad_value(key, value, "a boolean");
}

template <class T, class Parse>
std::optional<T> parse_optional(std::string_view key, std::string_view value, Parse parse) {
  if (trim(value) == "inherit") return std::nullopt;
  return parse(key, value);
}

template <class T>
std::string optional_text(const std::optional<T>& v) {
  if (!v) return "inherit";
  if constexpr (std::is_floating_point_v<T>) return format_double(*v);
  else return std::to_string(*v);
}

}  // namespace detail

// Applies one setting by its canonical key. Returns false for keys that do
// not belong to LocaConfig.
inline bool apply_loca_setting(LocaConfig& c, std::string_view key, std::string_view raw) {
  using namespace detail;
  const auto value = trim(raw);
  try {
    if (key == "q") c.q = parse_int(key, value);
    else if (key == "alpha") c.alpha = parse_real(key, value);
    else if (key == "base_model") c.base_model = parse_base_kind(value);
    else if (key == "anchor_strategy") c.anchor_strategy = parse_anchor_strategy(value);
    else if (key == "embedding_method")
      c.embedding_method = value == "auto" ? std::nullopt : std::optional(parse_embedding_method(value));
    else if (key == "embedding_dim") c.embedding_dim = parse_int(key, value);
    else if (key == "jobs") c.jobs = parse_int(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "kernel.h_T") c.kernel.h_T = parse_real(key, value);
    else if (key == "kernel.h_W") c.kernel.h_W = parse_real(key, value);
    else if (key == "kernel.scale_distance") c.kernel.scale_distance = parse_bool(key, value);
    else if (key == "ease.lambda") c.ease_lambda = parse_real(key, value);
    else if (key == "dae.hidden") c.dae_hidden = parse_int(key, value);
    else if (key == "dae.learning_rate") c.dae.learning_rate = parse_real(key, value);
    else if (key == "dae.batch_size") c.dae.batch_size = parse_int(key, value);
    else if (key == "dae.max_epochs") c.dae.max_epochs = parse_int(key, value);
    else if (key == "dae.patience") c.dae.patience = parse_int(key, value);
    else if (key == "dae.l2") c.dae.l2 = parse_real(key, value);
    else if (key == "dae.init_std") c.dae.init_std = parse_real(key, value);
    else if (key == "dae.dropout") c.dae.dropout = parse_real(key, value);
    else if (key == "dae.adam_beta1") c.dae.adam_beta1 = parse_real(key, value);
    else if (key == "dae.adam_beta2") c.dae.adam_beta2 = parse_real(key, value);
    else if (key == "dae.adam_eps") c.dae.adam_eps = parse_real(key, value);
    else if (key == "global.lambda") c.global_lambda = parse_optional<double>(key, value, parse_real);
    else if (key == "global.learning_rate") c.global_learning_rate = parse_optional<double>(key, value, parse_real);
    else if (key == "global.max_epochs") c.global_max_epochs = parse_optional<int>(key, value, parse_int);
    else if (key == "global.dropout") c.global_dropout = parse_optional<double>(key, value, parse_real);
    else return false;
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find(std::string(key)) != std::string::npos) throw;
    throw ConfigError("key '" + std::string(key) + "': " + what);
  }
  return true;
}

// Canonical key/value echo. `jobs` is omitted: it never changes results.
inline std::vector<std::pair<std::string, std::string>> describe(const LocaConfig& c) {
  using detail::format_double;
  return {
      {"q", std::to_string(c.q)},
      {"alpha", format_double(c.alpha)},
      {"base_model", std::string(to_string(c.base_model))},
      {"anchor_strategy", std::string(to_string(c.anchor_strategy))},
      {"embedding_method", c.embedding_method ? std::string(to_string(*c.embedding_method)) : "auto"},
      {"embedding_dim", std::to_string(c.embedding_dim)},
      {"seed", std::to_string(c.seed)},
      {"kernel.h_T", format_double(c.kernel.h_T)},
      {"kernel.h_W", format_double(c.kernel.h_W)},
      {"kernel.scale_distance", c.kernel.scale_distance ? "true" : "false"},
      {"ease.lambda", format_double(c.ease_lambda)},
      {"dae.hidden", std::to_string(c.dae_hidden)},
      {"dae.learning_rate", format_double(c.dae.learning_rate)},
      {"dae.batch_size", std::to_string(c.dae.batch_size)},
      {"dae.max_epochs", std::to_string(c.dae.max_epochs)},
      {"dae.patience", std::to_string(c.dae.patience)},
      {"dae.l2", format_double(c.dae.l2)},
      {"dae.init_std", format_double(c.dae.init_std)},
      {"dae.dropout", format_double(c.dae.dropout)},
      {"dae.adam_beta1", format_double(c.dae.adam_beta1)},
      {"dae.adam_beta2", format_double(c.dae.adam_beta2)},
      {"dae.adam_eps", format_double(c.dae.adam_eps)},
      {"global.lambda", detail::optional_text(c.global_lambda)},
      {"global.learning_rate", detail::optional_text(c.global_learning_rate)},
      {"global.max_epochs", detail::optional_text(c.global_max_epochs)},
      {"global.dropout", detail::optional_text(c.global_dropout)},
  };
}

template <BaseModel Model>
struct LocalModelEntry {
  UserIndex anchor = 0;
  WeightPair weights;
  Model model;
};

template <BaseModel Model>
class LocaModel {
 public:
  using model_type = Model;

  LocaModel() = default;
  LocaModel(Model global, std::vector<LocalModelEntry<Model>> locals, LocaConfig config, UserIndex m)
      : global_(std::move(global)), locals_(std::move(locals)), config_(std::move(config)), m_(m) {
    for (const auto& l : locals_) {
      if (l.model.n() != global_.n()) throw ConfigError("local and global models disagree on item count");
      if (l.weights.t.size() != static_cast<std::size_t>(m_) || l.weights.w.size() != static_cast<std::size_t>(m_))
        throw ConfigError("local weight vectors disagree on user count");
    }
  }

  const Model& global() const { return global_; }
  const std::vector<LocalModelEntry<Model>>& locals() const { return locals_; }
  const LocaConfig& config() const { return config_; }
  UserIndex m() const { return m_; }
  ItemIndex n() const { return global_.n(); }

  // Total inference weight of user u over all local models.
  double inference_mass(UserIndex u) const {
    check_user(u);
    double s = 0.0;
    for (const auto& l : locals_) s += l.weights.w[static_cast<std::size_t>(u)];
    return s;
  }

  double coverage() const {
    if (m_ == 0) return 0.0;
    UserIndex hit = 0;
    for (UserIndex u = 0; u < m_; ++u) hit += inference_mass(u) > 0.0;
    return static_cast<double>(hit) / static_cast<double>(m_);
  }

  // alpha * global + (1 - alpha) * sum_j w_j local_j / sum_j w_j for covered
  // users; the global scores alone otherwise.
  Eigen::VectorXd predict_user(UserIndex u, std::span<const ItemIndex> row) const {
    const double mass = inference_mass(u);
    Eigen::VectorXd global_scores = global_.score(row);
    if (!(mass > 0.0)) return global_scores;
    Eigen::VectorXd local = Eigen::VectorXd::Zero(n());
    for (const auto& l : locals_) {
      const double w = l.weights.w[static_cast<std::size_t>(u)];
      if (w > 0.0) local += w * l.model.score(row);
    }
    const double a = config_.alpha;
    return a * global_scores + (1.0 - a) * (local / mass);
  }

 private:
  void check_user(UserIndex u) const {
    if (u < 0 || u >= m_) throw DomainError("user index " + std::to_string(u) + " out of range");
  }

  Model global_;
  std::vector<LocalModelEntry<Model>> locals_;
  LocaConfig config_;
  UserIndex m_ = 0;
};

template <BaseModel Model>
Eigen::VectorXd predict_user(const LocaModel<Model>& loca, UserIndex u, std::span<const ItemIndex> row) {
  return loca.predict_user(u, row);
}

template <BaseModel Model>
std::vector<ItemIndex> recommend_top_n(const LocaModel<Model>& loca, UserIndex u, std::span<const ItemIndex> row,
                                       int N, bool exclude_train = true) {
  if (N < 1) throw ConfigError("N must be >= 1");
  return top_n(loca.predict_user(u, row), N, exclude_train ? row : std::span<const ItemIndex>{});
}

// Trains one local model per weight pair with its training weights t. Local
// model j is seeded with local_seed(seed, j); results do not depend on jobs.
template <ModelTrainer Trainer>
std::vector<LocalModelEntry<typename Trainer::model_type>> train_local_models(const RatingMatrix& train,
                                                                             std::vector<WeightPair> pairs,
                                                                             const Trainer& trainer, int jobs,
                                                                             std::uint64_t seed) {
  using Model = typename Trainer::model_type;
  std::vector<std::optional<Model>> slots(pairs.size());
  detail::parallel_for(
      pairs.size(), jobs,
      [&](std::size_t j) { slots[j] = trainer(train, pairs[j].t, local_seed(seed, j)); },
      [&](std::size_t j, const std::exception_ptr& e) {
        try {
          std::rethrow_exception(e);
        } catch (const std::exception& ex) {
          throw TrainingError("local model " + std::to_string(j) + " (anchor user " +
                              std::to_string(pairs[j].anchor) + ") failed: " + ex.what());
        }
      });
  std::vector<LocalModelEntry<Model>> locals;
  locals.reserve(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j)
    locals.push_back({pairs[j].anchor, std::move(pairs[j]), std::move(*slots[j])});
  return locals;
}

// Embeddings for anchor distances. dae-hidden reuses the global model when
// it is a DAE and otherwise fits a DAE on all users.
template <BaseModel Model>
EmbeddingMatrix loca_embeddings(const RatingMatrix& train, const LocaConfig& config, const Model& global) {
  const auto method = config.resolved_embedding_method();
  if (method == EmbeddingMethod::truncated_svd)
    return truncated_svd_embeddings(train, config.embedding_dim, config.seed);
  if constexpr (std::is_same_v<Model, DaeModel>) {
    return dae_hidden_embeddings(train, global, config.embedding_dim, config.seed);
  } else {
    const std::vector<double> ones(static_cast<std::size_t>(train.m()), 1.0);
    const auto dae = config.global_dae()(train, ones, config.seed);
    return dae_hidden_embeddings(train, dae, config.embedding_dim, config.seed);
  }
}

template <ModelTrainer Trainer>
LocaModel<typename Trainer::model_type> train_loca(const SplitDataset& split, const LocaConfig& config,
                                                   const Trainer& local_trainer, const Trainer& global_trainer) {
  config.validate();
  const auto& train = split.train;
  if (train.m() == 0 || train.n() == 0) throw DataError("empty training split");
  if (config.q > train.m())
    throw ConfigError("q=" + std::to_string(config.q) + " exceeds the number of users " + std::to_string(train.m()));

  const std::vector<double> ones(static_cast<std::size_t>(train.m()), 1.0);
  auto global = global_trainer(train, ones, config.seed);
  std::vector<WeightPair> pairs;
  if (config.q > 0) {
    const auto embeddings = loca_embeddings(train, config, global);
    CoverageGraph graph;
    if (config.anchor_strategy == AnchorStrategy::coverage || config.anchor_strategy == AnchorStrategy::farthest) {
      graph = build_coverage_graph(embeddings, config.kernel.h_W, config.kernel.scale_distance);
    } else {
      graph.m = embeddings.m();
      graph.h_W = config.kernel.h_W;
      graph.adjacency.resize(static_cast<std::size_t>(graph.m));
    }
    const auto anchors = select_anchors(graph, embeddings, config.q, config.anchor_strategy, config.seed);
    pairs = build_weight_pairs(embeddings, anchors.anchors, config.kernel);
  }
  auto locals = train_local_models(train, std::move(pairs), local_trainer, config.jobs, config.seed);
  return LocaModel<typename Trainer::model_type>(std::move(global), std::move(locals), config, train.m());
}

// Either instantiation, chosen by config.base_model.
class AnyLocaModel {
 public:
  using Variant = std::variant<LocaModel<EaseModel>, LocaModel<DaeModel>>;

  AnyLocaModel() = default;
  template <BaseModel Model>
  AnyLocaModel(LocaModel<Model> m) : v_(std::move(m)) {}

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), v_);
  }

  const LocaConfig& config() const {
    return visit([](const auto& m) -> const LocaConfig& { return m.config(); });
  }
  UserIndex m() const {
    return visit([](const auto& m) { return m.m(); });
  }
  ItemIndex n() const {
    return visit([](const auto& m) { return m.n(); });
  }
  double coverage() const {
    return visit([](const auto& m) { return m.coverage(); });
  }
  double inference_mass(UserIndex u) const {
    return visit([u](const auto& m) { return m.inference_mass(u); });
  }
  std::size_t local_count() const {
    return visit([](const auto& m) { return m.locals().size(); });
  }
  Eigen::VectorXd predict_user(UserIndex u, std::span<const ItemIndex> row) const {
    return visit([&](const auto& m) { return m.predict_user(u, row); });
  }
  Eigen::VectorXd global_scores(std::span<const ItemIndex> row) const {
    return visit([&](const auto& m) { return m.global().score(row); });
  }
  std::vector<UserIndex> anchors() const {
    return visit([](const auto& m) {
      std::vector<UserIndex> a;
      for (const auto& l : m.locals()) a.push_back(l.anchor);
      return a;
    });
  }
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

inline AnyLocaModel train_loca(const SplitDataset& split, const LocaConfig& config) {
  if (config.base_model == BaseKind::ease) return train_loca(split, config, config.local_ease(), config.global_ease());
  return train_loca(split, config, config.local_dae(), config.global_dae());
}

// Model directory contents as (file name, bytes): manifest.txt, global.bin,
// local_NNNN.bin and weights_NNNN.bin per local model.
template <BaseModel Model>
std::map<std::string, std::string> serialize_loca_model(const LocaModel<Model>& loca) {
  std::map<std::string, std::string> files;
  std::ostringstream manifest;
  manifest << "format=loca-model/1\n";
  manifest << "m=" << loca.m() << "\nn=" << loca.n() << '\n';
  for (const auto& [k, v] : describe(loca.config())) manifest << k << '=' << v << '\n';
  manifest << "local_count=" << loca.locals().size() << '\n';
  manifest << "anchors=";
  for (std::size_t j = 0; j < loca.locals().size(); ++j) manifest << (j ? "," : "") << loca.locals()[j].anchor;
  manifest << "\nlocal_seeds=";
  for (std::size_t j = 0; j < loca.locals().size(); ++j) manifest << (j ? "," : "") << local_seed(loca.config().seed, j);
  manifest << '\n';
  files["manifest.txt"] = manifest.str();

  auto bytes = [](const auto& model) {
    std::ostringstream os(std::ios::binary);
    model.save(os);
    return os.str();
  };
  files["global.bin"] = bytes(loca.global());
  for (std::size_t j = 0; j < loca.locals().size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu", j);
    const auto& l = loca.locals()[j];
    files[std::string("local_") + name + ".bin"] = bytes(l.model);
    std::ostringstream ws(std::ios::binary);
    detail::BinaryWriter w(ws);
    w.tag("LOCAWGT1");
    w.pod(static_cast<std::int64_t>(l.anchor));
    w.doubles(l.weights.t);
    w.doubles(l.weights.w);
    files[std::string("weights_") + name + ".bin"] = ws.str();
  }
  return files;
}

inline std::map<std::string, std::string> serialize_loca_model(const AnyLocaModel& model) {
  return model.visit([](const auto& m) { return serialize_loca_model(m); });
}

inline void save_loca_model(const AnyLocaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : serialize_loca_model(model)) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + (dir / name).string());
  }
}

namespace detail {

template <BaseModel Model>
LocaModel<Model> load_typed(const std::filesystem::path& dir, const LocaConfig& config, UserIndex m,
                            std::size_t count) {
  auto open = [&](const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw FormatError("missing model file " + (dir / name).string());
    return in;
  };
  auto gin = open("global.bin");
  auto global = Model::load(gin, (dir / "global.bin").string());
  std::vector<LocalModelEntry<Model>> locals;
  for (std::size_t j = 0; j < count; ++j) {
    char idx[32];
    std::snprintf(idx, sizeof(idx), "%04zu", j);
    const auto mname = std::string("local_") + idx + ".bin";
    const auto wname = std::string("weights_") + idx + ".bin";
    auto min = open(mname);
    LocalModelEntry<Model> e;
    e.model = Model::load(min, (dir / mname).string());
    auto win = open(wname);
    BinaryReader r(win, (dir / wname).string());
    r.expect_tag("LOCAWGT1");
    e.anchor = static_cast<UserIndex>(r.pod<std::int64_t>());
    e.weights.anchor = e.anchor;
    e.weights.t = r.doubles();
    e.weights.w = r.doubles();
    locals.push_back(std::move(e));
  }
  return LocaModel<Model>(std::move(global), std::move(locals), config, m);
}

}  // namespace detail

inline AnyLocaModel load_loca_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw FormatError("missing model manifest in " + dir.string());
  LocaConfig config;
  std::optional<long long> m, count;
  bool format_ok = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "format") format_ok = value == "loca-model/1";
    else if (key == "m") m = detail::parse_number<long long>(value);
    else if (key == "local_count") count = detail::parse_number<long long>(value);
    else if (key == "n" || key == "anchors" || key == "local_seeds") continue;
    else if (!apply_loca_setting(config, key, value)) throw FormatError("unknown manifest key '" + key + "'");
  }
  if (!format_ok || !m || !count || *m < 0 || *count < 0) throw FormatError("incomplete model manifest in " + dir.string());
  const auto mm = static_cast<UserIndex>(*m);
  const auto cc = static_cast<std::size_t>(*count);
  if (config.base_model == BaseKind::ease) return detail::load_typed<EaseModel>(dir, config, mm, cc);
  return detail::load_typed<DaeModel>(dir, config, mm, cc);
}

}  // namespace loca
