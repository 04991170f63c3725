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

// Command-line driver: prepare, train, evaluate, recommend, ablate-anchors
// and sweep over one output directory.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loca/config.hpp"
#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/error.hpp"
#include "loca/eval.hpp"
#include "loca/loca.hpp"

namespace loca::cli {

namespace fs = std::filesystem;

struct Paths {
  fs::path out;
  fs::path split() const { return out / "split"; }
  fs::path model() const { return out / "model"; }
  fs::path eval() const { return out / "eval"; }
};

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw FormatError("failed writing " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::uint64_t checksum_text(std::string_view s) {
  detail::Fnv1a h;
  h.update(s);
  return h.digest();
}

// Checksum over every file of a split or model directory, in name order.
inline std::uint64_t checksum_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  detail::Fnv1a h;
  for (const auto& f : files) {
    h.update(f.filename().string());
    h.update(read_text(f));
  }
  return h.digest();
}

// Config echo plus a per-command manifest naming the seed and input checksums.
inline void write_manifest(const Paths& p, const RunConfig& config, const std::string& command,
                           const std::vector<std::pair<std::string, std::uint64_t>>& inputs) {
  const auto echo = echo_config(config);
  write_text(p.out / "config.resolved.ini", echo);
  std::ostringstream m;
  m << "command=" << command << "\nconfig=config.resolved.ini\nconfig_checksum=" << detail::hex64(checksum_text(echo))
    << "\nseed=" << config.loca.seed << "\nlocal_seed_rule=seed*1000003+j\n";
  for (const auto& [name, sum] : inputs) m << "input." << name << '=' << detail::hex64(sum) << '\n';
  write_text(p.out / ("manifest_" + command + ".txt"), m.str());
}

inline SplitDataset require_split(const Paths& p) {
  if (!fs::exists(p.split() / "meta.txt"))
    throw FormatError("missing split in " + p.split().string() + "; run 'prepare' first");
  return load_split(p.split());
}

inline AnyLocaModel require_model(const Paths& p) {
  if (!fs::exists(p.model() / "manifest.txt"))
    throw FormatError("missing model in " + p.model().string() + "; run 'train' first");
  return load_loca_model(p.model());
}

inline void cmd_prepare(const RunConfig& c, const Paths& p, std::ostream& out) {
  if (c.data_path.empty()) throw ConfigError("key 'data.path' is required for prepare");
  const auto log = load_interactions(c.data_path, c.schema());
  const auto matrix = preprocess(log, c.min_user_interactions, c.positive_threshold);
  const auto split = leave_k_out_split(log, matrix, c.k);
  save_split(split, p.split());
  const auto back = load_split(p.split());
  if (!(back.train == split.train) || back.heldout != split.heldout || back.k != split.k)
    throw FormatError("split round-trip check failed");
  write_manifest(p, c, "prepare", {{"data", detail::file_checksum(c.data_path)}});
  out << "prepared " << matrix.m() << " users, " << matrix.n() << " items, " << matrix.nnz()
      << " interactions (k=" << c.k << ") in " << p.split().string() << '\n';
}

inline void cmd_train(const RunConfig& c, const Paths& p, std::ostream& out) {
  const auto split = require_split(p);
  const auto start = std::chrono::steady_clock::now();
  const auto model = train_loca(split, c.loca);
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_loca_model(model, p.model());
  if (serialize_loca_model(load_loca_model(p.model())) != serialize_loca_model(model))
    throw FormatError("model round-trip check failed");
  write_manifest(p, c, "train", {{"split", checksum_dir(p.split())}});
  out << "trained " << model.local_count() << " local " << to_string(c.loca.base_model) << " models (coverage "
      << model.coverage() << ") in " << secs << " s; saved to " << p.model().string() << '\n';
}

inline void cmd_evaluate(const RunConfig& c, const Paths& p, bool global_only, std::ostream& out) {
  const auto split = require_split(p);
  const auto model = require_model(p);
  if (model.m() != split.train.m() || model.n() != split.train.n())
    throw ConfigError("model and split dimensions disagree");
  EvalReport report;
  if (global_only) {
    report = evaluate_scores([&](UserIndex, std::span<const ItemIndex> row) { return model.global_scores(row); },
                             split, c.n_values, c.loca.jobs);
  } else {
    report = evaluate_model(model, split, c.n_values, c.loca.jobs);
  }
  std::ostringstream table, summary, activity;
  write_report_table(report, table);
  write_report_summary(report, summary);
  write_activity_table(breakdown_by_activity(report, split.train, c.bucket_edges), c.n_values, activity);
  const auto prefix = std::string(global_only ? "global_" : "");
  write_text(p.eval() / (prefix + "report.csv"), table.str());
  write_text(p.eval() / (prefix + "summary.txt"), summary.str());
  write_text(p.eval() / (prefix + "activity.csv"), activity.str());
  write_manifest(p, c, "evaluate", {{"split", checksum_dir(p.split())}, {"model", checksum_dir(p.model())}});
  out << summary.str();
}

inline void cmd_recommend(const RunConfig& c, const Paths& p, const std::vector<std::string>& users, int n,
                          bool include_train, std::ostream& out) {
  const auto split = require_split(p);
  const auto model = require_model(p);
  if (n < 1) throw ConfigError("--n must be >= 1");
  std::ostringstream table;
  table << "user,rank,item,score\n";
  for (const auto& token : users) {
    const auto u = split.train.find_user(token);
    if (!u) throw ConfigError("unknown user token '" + token + "'");
    const auto row = split.train.row(*u);
    const auto scores = model.predict_user(*u, row);
    const auto items = top_n(scores, n, include_train ? std::span<const ItemIndex>{} : row);
    for (std::size_t r = 0; r < items.size(); ++r)
      table << token << ',' << r + 1 << ',' << split.train.item_token(items[r]) << ','
            << detail::format_double(scores[items[r]]) << '\n';
  }
  write_text(p.out / "recommend.csv", table.str());
  write_manifest(p, c, "recommend", {{"split", checksum_dir(p.split())}, {"model", checksum_dir(p.model())}});
  out << table.str();
}

inline std::string metric_header(const std::vector<int>& ns) {
  std::string h;
  for (int n : ns) h += ",recall@" + std::to_string(n);
  for (int n : ns) h += ",ndcg@" + std::to_string(n);
  return h;
}

inline std::string metric_row(const EvalReport& r) {
  std::string s;
  for (double v : r.mean_recall) s += "," + detail::format_double(v);
  for (double v : r.mean_ndcg) s += "," + detail::format_double(v);
  return s;
}

inline void cmd_ablate(const RunConfig& c, const Paths& p, const std::vector<std::string>& strategies,
                       std::vector<int> qs, std::ostream& out) {
  const auto split = require_split(p);
  if (qs.empty()) qs.push_back(c.loca.q);
  std::ostringstream table;
  table << "strategy,q,coverage" << metric_header(c.n_values) << '\n';
  for (const auto& name : strategies) {
    const auto strategy = parse_anchor_strategy(name);
    for (int q : qs) {
      auto cfg = c.loca;
      cfg.anchor_strategy = strategy;
      cfg.q = q;
      const auto model = train_loca(split, cfg);
      const auto report = evaluate_model(model, split, c.n_values, cfg.jobs);
      table << name << ',' << q << ',' << detail::format_double(model.coverage()) << metric_row(report) << '\n';
    }
  }
  write_text(p.out / "ablation.csv", table.str());
  write_manifest(p, c, "ablate-anchors", {{"split", checksum_dir(p.split())}});
  out << table.str();
}

inline void cmd_sweep(const RunConfig& c, const Paths& p, const std::string& param,
                      const std::vector<std::string>& values, std::ostream& out) {
  const auto split = require_split(p);
  std::string key;
  if (param == "q") key = "q";
  else if (param == "h_T" || param == "kernel.h_T") key = "kernel.h_T";
  else if (param == "h_W" || param == "kernel.h_W") key = "kernel.h_W";
  else throw ConfigError("unknown sweep parameter '" + param + "' (expected q, h_T or h_W)");
  if (values.empty()) throw ConfigError("--values must list at least one value");
  std::ostringstream table;
  table << param << ",coverage" << metric_header(c.n_values) << '\n';
  for (const auto& v : values) {
    auto cfg = c.loca;
    apply_loca_setting(cfg, key, v);
    cfg.validate();
    const auto model = train_loca(split, cfg);
    const auto report = evaluate_model(model, split, c.n_values, cfg.jobs);
    table << detail::trim(v) << ',' << detail::format_double(model.coverage()) << metric_row(report) << '\n';
  }
  const auto name = "sweep_" + std::string(key == "q" ? "q" : key.substr(7)) + ".csv";
  write_text(p.out / name, table.str());
  write_manifest(p, c, "sweep", {{"split", checksum_dir(p.split())}});
  out << table.str();
}

// Returns the process exit status: 0 on success, 1 on runtime errors, 2 on
// usage errors.
inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Local collaborative autoencoder ensembles for top-N recommendation", "loca"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--set", sets, "Override a configuration key (key=value); repeatable")->take_all();
  app.add_option("--jobs", jobs, "Worker threads for local training and evaluation");
  app.add_option("--seed", seed, "Top-level random seed");
  app.add_option("--out", out_dir, "Output directory");

  auto* prepare = app.add_subcommand("prepare", "Load, filter and split an interaction file");
  auto* train = app.add_subcommand("train", "Train a LOCA model on the prepared split");
  auto* evaluate = app.add_subcommand("evaluate", "Compute Recall@N and NDCG@N of the trained model");
  bool global_only = false;
  evaluate->add_flag("--global-only", global_only, "Evaluate the global model alone");
  auto* recommend = app.add_subcommand("recommend", "Top-N items for listed users");
  std::vector<std::string> users;
  int top = 10;
  bool include_train = false;
  recommend->add_option("--users", users, "User tokens")->required()->delimiter(',');
  recommend->add_option("--n", top, "List length");
  recommend->add_flag("--include-train", include_train, "Do not remove the user's train items");
  auto* ablate = app.add_subcommand("ablate-anchors", "Compare anchor selection strategies");
  std::vector<std::string> strategies{"coverage", "random", "farthest", "kmeans"};
  std::vector<int> qs;
  ablate->add_option("--strategies", strategies, "Strategies to compare")->delimiter(',');
  ablate->add_option("--q", qs, "Local model counts")->delimiter(',');
  auto* sweep = app.add_subcommand("sweep", "Metric curve over q, h_T or h_W");
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "q, h_T or h_W")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::vector<std::string> overrides = sets;
    if (jobs) overrides.push_back("jobs=" + std::to_string(*jobs));
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (out_dir) overrides.push_back("out=" + *out_dir);
    const auto config =
        parse_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, overrides);
    const Paths paths{config.out};
    fs::create_directories(paths.out);
    if (*prepare) cmd_prepare(config, paths, out);
    else if (*train) cmd_train(config, paths, out);
    else if (*evaluate) cmd_evaluate(config, paths, global_only, out);
    else if (*recommend) cmd_recommend(config, paths, users, top, include_train, out);
    else if (*ablate) cmd_ablate(config, paths, strategies, qs, out);
    else if (*sweep) cmd_sweep(config, paths, param, values, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace loca::cli
