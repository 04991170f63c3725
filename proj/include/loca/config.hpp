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

// Run configuration: an INI-style file of key = value lines grouped in
// [sections], plus key=value overrides applied afterwards.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "loca/dataset.hpp"
#include "loca/detail/io.hpp"
#include "loca/error.hpp"
#include "loca/loca.hpp"

namespace loca {

struct RunConfig {
  std::string data_path;
  std::string delimiter = ",";
  std::string columns = "user,item,rating,timestamp";
  bool header = false;
  int min_user_interactions = 10;
  std::optional<double> positive_threshold;  // unset: every interaction is positive
  int k = 5;
  LocaConfig loca;
  std::vector<int> n_values{50, 100};
  std::vector<int> bucket_edges;
  std::string out = "run";

  Schema schema() const { return Schema::parse(columns, delimiter, header); }
};

namespace detail {

inline std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  value = trim(value);
  if (value.empty()) return out;
  for (auto tok : split(value, ",")) out.push_back(parse_int(key, tok));
  return out;
}

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string decode_delimiter(std::string_view v) {
  if (v == "tab" || v == "\\t") return "\t";
  if (v == "space") return " ";
  return std::string(v);
}

inline std::string encode_delimiter(const std::string& d) {
  if (d == "\t") return "tab";
  if (d == " ") return "space";
  return d;
}

}  // namespace detail

// Applies one canonical key. Unknown keys are rejected.
inline void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  using namespace detail;
  const auto value = trim(raw);
  if (key == "data.path") c.data_path = std::string(value);
  else if (key == "data.delimiter") c.delimiter = decode_delimiter(value);
  else if (key == "data.columns") c.columns = std::string(value);
  else if (key == "data.header") c.header = parse_bool(key, value);
  else if (key == "preprocess.min_user_interactions") c.min_user_interactions = parse_int(key, value);
  else if (key == "preprocess.positive_threshold")
    c.positive_threshold = value == "all" ? std::nullopt : std::optional(parse_real(key, value));
  else if (key == "split.k") c.k = parse_int(key, value);
  else if (key == "eval.n_values") c.n_values = parse_int_list(key, value);
  else if (key == "eval.bucket_edges") c.bucket_edges = parse_int_list(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (!apply_loca_setting(c.loca, key, value)) throw ConfigError("unknown key '" + std::string(key) + "'");
}

inline void validate(const RunConfig& c) {
  if (c.min_user_interactions < 1) throw ConfigError("key 'preprocess.min_user_interactions' must be >= 1");
  if (c.k < 0) throw ConfigError("key 'split.k' must be >= 0");
  if (c.n_values.empty()) throw ConfigError("key 'eval.n_values' must list at least one cutoff");
  for (int n : c.n_values)
    if (n < 1) throw ConfigError("key 'eval.n_values' entries must be >= 1");
  for (std::size_t i = 1; i < c.bucket_edges.size(); ++i)
    if (c.bucket_edges[i] <= c.bucket_edges[i - 1])
      throw ConfigError("key 'eval.bucket_edges' must be strictly increasing");
  if (c.out.empty()) throw ConfigError("key 'out' must not be empty");
  try {
    (void)c.schema();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("key 'data.columns': ") + e.what());
  }
  c.loca.validate();
}

// Every key with its resolved value, in a form parse_config accepts.
inline std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  using namespace detail;
  std::vector<std::pair<std::string, std::string>> kv{
      {"out", c.out},
      {"jobs", std::to_string(c.loca.jobs)},
      {"data.path", c.data_path},
      {"data.delimiter", encode_delimiter(c.delimiter)},
      {"data.columns", c.columns},
      {"data.header", c.header ? "true" : "false"},
      {"preprocess.min_user_interactions", std::to_string(c.min_user_interactions)},
      {"preprocess.positive_threshold", c.positive_threshold ? format_double(*c.positive_threshold) : "all"},
      {"split.k", std::to_string(c.k)},
      {"eval.n_values", join_ints(c.n_values)},
      {"eval.bucket_edges", join_ints(c.bucket_edges)},
  };
  for (auto& p : describe(c.loca)) kv.push_back(std::move(p));
  return kv;
}

// INI text grouped by section prefix.
inline std::string echo_config(const RunConfig& c) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (auto& [k, v] : describe(c)) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) sections[""].emplace_back(k, v);
    else sections[k.substr(0, dot)].emplace_back(k.substr(dot + 1), v);
  }
  std::ostringstream os;
  for (const auto& [k, v] : sections[""]) os << k << " = " << v << '\n';
  for (const auto& [name, entries] : sections) {
    if (name.empty()) continue;
    os << "\n[" << name << "]\n";
    for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
  }
  return os.str();
}

// Parses INI text. Lines starting with '#' or ';' are comments; keys before
// the first section header (or inside [loca] / [run]) are top-level.
inline void apply_config_text(RunConfig& c, std::string_view text, const std::string& source = "<config>") {
  std::string section;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#' || view.front() == ';') continue;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    if (view.front() == '[') {
      if (view.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(detail::trim(view.substr(1, view.size() - 2)));
      if (section == "loca" || section == "run") section.clear();
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected key = value");
    const auto key = std::string(detail::trim(view.substr(0, eq)));
    const auto full = section.empty() ? key : section + "." + key;
    try {
      apply_setting(c, full, view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
}

inline RunConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::string>& overrides = {}) {
  RunConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file '" + path->string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(c, buf.str(), path->string());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    apply_setting(c, detail::trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
  }
  validate(c);
  return c;
}

}  // namespace loca
