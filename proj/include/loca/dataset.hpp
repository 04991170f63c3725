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

// Interaction logs, binary rating matrices and leave-k-out splits.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "loca/detail/io.hpp"
#include "loca/error.hpp"

namespace loca {

using UserIndex = std::int32_t;
using ItemIndex = std::int32_t;

enum class Column { user, item, rating, timestamp, skip };

// Column layout of a delimited interaction file.
struct Schema {
  std::string delimiter = ",";
  std::vector<Column> columns{Column::user, Column::item, Column::rating, Column::timestamp};
  bool header = false;

  // Parses a descriptor such as "user,item,rating,timestamp". Recognized
  // names: user, item, rating, timestamp (or ts), and "_" / "skip" for
  // ignored columns.
  static Schema parse(std::string_view descriptor, std::string delimiter = ",",
                      bool header = false) {
    Schema s;
    s.delimiter = std::move(delimiter);
    s.header = header;
    s.columns.clear();
    for (auto tok : detail::split(descriptor, ",")) {
      tok = detail::trim(tok);
      if (tok == "user") s.columns.push_back(Column::user);
      else if (tok == "item") s.columns.push_back(Column::item);
      else if (tok == "rating") s.columns.push_back(Column::rating);
      else if (tok == "timestamp" || tok == "ts") s.columns.push_back(Column::timestamp);
      else if (tok == "_" || tok == "skip") s.columns.push_back(Column::skip);
      else throw ConfigError("unknown column name '" + std::string(tok) + "' in schema");
    }
    for (auto c : {Column::user, Column::item, Column::rating, Column::timestamp}) {
      const auto count = std::count(s.columns.begin(), s.columns.end(), c);
      if (count > 1) throw ConfigError("duplicate column role in schema '" + std::string(descriptor) + "'");
    }
    if (!s.has(Column::user) || !s.has(Column::item))
      throw ConfigError("schema must contain user and item columns");
    if (s.delimiter.empty()) throw ConfigError("empty delimiter");
    return s;
  }

  bool has(Column c) const { return std::find(columns.begin(), columns.end(), c) != columns.end(); }
};

struct Interaction {
  std::string user;
  std::string item;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;
};

struct InteractionLog {
  std::vector<Interaction> records;
  bool has_timestamps = false;
};

// Parses delimited rows; `source` names the input in error messages.
inline InteractionLog parse_interactions(std::istream& in, const Schema& schema,
                                         const std::string& source = "<stream>") {
  InteractionLog log;
  log.has_timestamps = schema.has(Column::timestamp);
  std::string line;
  std::size_t lineno = 0;
  bool skipped_header = !schema.header;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = detail::split(view, schema.delimiter);
    auto fail = [&](const std::string& why) -> DataError {
      return DataError(source + ": malformed row at line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != schema.columns.size())
      throw fail("expected " + std::to_string(schema.columns.size()) + " fields, got " +
                 std::to_string(fields.size()));
    Interaction rec;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = detail::trim(fields[c]);
      switch (schema.columns[c]) {
        case Column::user:
          if (f.empty()) throw fail("empty user field");
          rec.user = std::string(f);
          break;
        case Column::item:
          if (f.empty()) throw fail("empty item field");
          rec.item = std::string(f);
          break;
        case Column::rating:
          if (!f.empty()) {
            rec.rating = detail::parse_number<double>(f);
            if (!rec.rating) throw fail("rating '" + std::string(f) + "' is not a number");
          }
          break;
        case Column::timestamp:
          rec.timestamp = detail::parse_number<std::int64_t>(f);
          if (!rec.timestamp) throw fail("timestamp '" + std::string(f) + "' is not an integer");
          break;
        case Column::skip:
          break;
      }
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

inline InteractionLog load_interactions(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read interaction file '" + path + "'");
  return parse_interactions(in, schema, path);
}

// Sparse binary user-item matrix. Rows hold strictly increasing item
// indices; every user has at least one positive.
class RatingMatrix {
 public:
  RatingMatrix() = default;

  RatingMatrix(std::vector<std::vector<ItemIndex>> rows, std::vector<std::string> user_tokens,
               std::vector<std::string> item_tokens)
      : rows_(std::move(rows)), user_tokens_(std::move(user_tokens)), item_tokens_(std::move(item_tokens)) {
    if (user_tokens_.size() != rows_.size())
      throw DataError("user token count does not match row count");
    const auto n = static_cast<ItemIndex>(item_tokens_.size());
    for (std::size_t u = 0; u < rows_.size(); ++u) {
      const auto& r = rows_[u];
      if (r.empty()) throw DataError("user '" + user_tokens_[u] + "' has no positive items");
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (r[k] < 0 || r[k] >= n) throw DataError("item index out of range in row " + std::to_string(u));
        if (k > 0 && r[k] <= r[k - 1]) throw DataError("row " + std::to_string(u) + " is not strictly increasing");
      }
      nnz_ += r.size();
    }
    for (std::size_t u = 0; u < user_tokens_.size(); ++u)
      if (!user_index_.emplace(user_tokens_[u], static_cast<UserIndex>(u)).second)
        throw DataError("duplicate user token '" + user_tokens_[u] + "'");
    for (std::size_t i = 0; i < item_tokens_.size(); ++i)
      if (!item_index_.emplace(item_tokens_[i], static_cast<ItemIndex>(i)).second)
        throw DataError("duplicate item token '" + item_tokens_[i] + "'");
  }

  // Rows with tokens equal to the decimal indices. Rows are sorted and
  // deduplicated first.
  static RatingMatrix from_rows(std::vector<std::vector<ItemIndex>> rows, ItemIndex n) {
    std::vector<std::string> users, items;
    for (std::size_t u = 0; u < rows.size(); ++u) {
      auto& r = rows[u];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      users.push_back(std::to_string(u));
    }
    for (ItemIndex i = 0; i < n; ++i) items.push_back(std::to_string(i));
    return RatingMatrix(std::move(rows), std::move(users), std::move(items));
  }

  static RatingMatrix from_dense(const Eigen::MatrixXd& x) {
    std::vector<std::vector<ItemIndex>> rows(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index u = 0; u < x.rows(); ++u)
      for (Eigen::Index i = 0; i < x.cols(); ++i)
        if (x(u, i) != 0.0) rows[static_cast<std::size_t>(u)].push_back(static_cast<ItemIndex>(i));
    return from_rows(std::move(rows), static_cast<ItemIndex>(x.cols()));
  }

  UserIndex m() const { return static_cast<UserIndex>(rows_.size()); }
  ItemIndex n() const { return static_cast<ItemIndex>(item_tokens_.size()); }
  std::size_t nnz() const { return nnz_; }

  std::span<const ItemIndex> row(UserIndex u) const { return rows_.at(static_cast<std::size_t>(u)); }
  const std::vector<std::vector<ItemIndex>>& rows() const { return rows_; }

  bool contains(UserIndex u, ItemIndex i) const {
    const auto r = row(u);
    return std::binary_search(r.begin(), r.end(), i);
  }

  const std::string& user_token(UserIndex u) const { return user_tokens_.at(static_cast<std::size_t>(u)); }
  const std::string& item_token(ItemIndex i) const { return item_tokens_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& user_tokens() const { return user_tokens_; }
  const std::vector<std::string>& item_tokens() const { return item_tokens_; }

  std::optional<UserIndex> find_user(const std::string& token) const {
    auto it = user_index_.find(token);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<ItemIndex> find_item(const std::string& token) const {
    auto it = item_index_.find(token);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
  }

  Eigen::VectorXd dense_row(UserIndex u) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n());
    for (auto i : row(u)) v[i] = 1.0;
    return v;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m(), n());
    for (UserIndex u = 0; u < m(); ++u)
      for (auto i : row(u)) x(u, i) = 1.0;
    return x;
  }

  friend bool operator==(const RatingMatrix& a, const RatingMatrix& b) {
    return a.rows_ == b.rows_ && a.user_tokens_ == b.user_tokens_ && a.item_tokens_ == b.item_tokens_;
  }

 private:
  std::vector<std::vector<ItemIndex>> rows_;
  std::vector<std::string> user_tokens_;
  std::vector<std::string> item_tokens_;
  std::unordered_map<std::string, UserIndex> user_index_;
  std::unordered_map<std::string, ItemIndex> item_index_;
  std::size_t nnz_ = 0;
};

// Binarizes and filters a log. Records whose rating is below
// `positive_threshold` are dropped (records without a rating count as
// positives); duplicate (user, item) pairs collapse; users with fewer than
// `min_user_interactions` distinct positives are removed. Dense indices
// follow first appearance among surviving records.
inline RatingMatrix preprocess(const InteractionLog& log, int min_user_interactions = 10,
                               std::optional<double> positive_threshold = std::nullopt) {
  if (min_user_interactions < 1) throw ConfigError("min_user_interactions must be >= 1");

  auto positive = [&](const Interaction& r) {
    return !positive_threshold || !r.rating || *r.rating >= *positive_threshold;
  };

  std::unordered_map<std::string, std::vector<std::string_view>> items_of;
  for (const auto& r : log.records)
    if (positive(r)) items_of[r.user].push_back(r.item);
  std::unordered_map<std::string_view, bool> keep_user;
  for (auto& [user, items] : items_of) {
    std::sort(items.begin(), items.end());
    const auto distinct = std::unique(items.begin(), items.end()) - items.begin();
    keep_user[user] = distinct >= min_user_interactions;
  }

  std::unordered_map<std::string, UserIndex> user_idx;
  std::unordered_map<std::string, ItemIndex> item_idx;
  std::vector<std::string> users, items;
  std::vector<std::vector<ItemIndex>> rows;
  for (const auto& r : log.records) {
    if (!positive(r) || !keep_user.at(r.user)) continue;
    auto [uit, unew] = user_idx.emplace(r.user, static_cast<UserIndex>(users.size()));
    if (unew) {
      users.push_back(r.user);
      rows.emplace_back();
    }
    auto [iit, inew] = item_idx.emplace(r.item, static_cast<ItemIndex>(items.size()));
    if (inew) items.push_back(r.item);
    rows[static_cast<std::size_t>(uit->second)].push_back(iit->second);
  }
  if (users.empty()) throw DataError("no users left after filtering (min_user_interactions=" +
                                     std::to_string(min_user_interactions) + ")");
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return RatingMatrix(std::move(rows), std::move(users), std::move(items));
}

// Train matrix plus the k most recent positives of every user.
struct SplitDataset {
  RatingMatrix train;
  std::vector<std::vector<ItemIndex>> heldout;  // per user, sorted by item index
  int k = 0;
};

// Holds out each user's k latest positives. Timestamp ties are ordered by
// item index, so the larger index is held out first.
inline SplitDataset leave_k_out_split(const InteractionLog& log, const RatingMatrix& matrix, int k = 5) {
  if (k < 0) throw ConfigError("k must be >= 0");
  SplitDataset split;
  split.k = k;
  if (k == 0) {
    split.train = matrix;
    split.heldout.assign(static_cast<std::size_t>(matrix.m()), {});
    return split;
  }
  if (!log.has_timestamps) throw ConfigError("leave-k-out split requires a timestamp column");

  // Latest timestamp per (user, item) present in the matrix.
  std::vector<std::unordered_map<ItemIndex, std::int64_t>> latest(static_cast<std::size_t>(matrix.m()));
  for (const auto& r : log.records) {
    const auto u = matrix.find_user(r.user);
    if (!u) continue;
    const auto i = matrix.find_item(r.item);
    if (!i || !matrix.contains(*u, *i)) continue;
    const auto ts = r.timestamp.value_or(0);
    auto [it, fresh] = latest[static_cast<std::size_t>(*u)].emplace(*i, ts);
    if (!fresh) it->second = std::max(it->second, ts);
  }

  std::vector<std::vector<ItemIndex>> train_rows(static_cast<std::size_t>(matrix.m()));
  split.heldout.resize(static_cast<std::size_t>(matrix.m()));
  for (UserIndex u = 0; u < matrix.m(); ++u) {
    const auto row = matrix.row(u);
    if (static_cast<int>(row.size()) <= k)
      throw ConfigError("user '" + matrix.user_token(u) + "' has " + std::to_string(row.size()) +
                        " interactions; leave-" + std::to_string(k) + "-out needs more than " + std::to_string(k));
    std::vector<std::pair<std::int64_t, ItemIndex>> order;
    order.reserve(row.size());
    const auto& ts = latest[static_cast<std::size_t>(u)];
    for (auto i : row) {
      auto it = ts.find(i);
      if (it == ts.end())
        throw DataError("item '" + matrix.item_token(i) + "' of user '" + matrix.user_token(u) +
                        "' does not appear in the log");
      order.emplace_back(it->second, i);
    }
    std::sort(order.begin(), order.end());
    const auto cut = order.size() - static_cast<std::size_t>(k);
    auto& train = train_rows[static_cast<std::size_t>(u)];
    auto& held = split.heldout[static_cast<std::size_t>(u)];
    for (std::size_t p = 0; p < order.size(); ++p) (p < cut ? train : held).push_back(order[p].second);
    std::sort(train.begin(), train.end());
    std::sort(held.begin(), held.end());
  }
  split.train = RatingMatrix(std::move(train_rows), matrix.user_tokens(), matrix.item_tokens());
  return split;
}

namespace detail {

inline void check_token(const std::string& t) {
  if (t.find_first_of("\t\n\r") != std::string::npos)
    throw FormatError("token '" + t + "' contains a tab or newline and cannot be persisted");
}

inline std::vector<std::vector<ItemIndex>> read_pairs(const std::filesystem::path& path, UserIndex m, ItemIndex n) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing split file " + path.string());
  std::vector<std::vector<ItemIndex>> rows(static_cast<std::size_t>(m));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || trim(line).empty()) continue;
    const auto f = split(trim(line), ",");
    const auto u = f.size() == 2 ? parse_number<UserIndex>(f[0]) : std::nullopt;
    const auto i = f.size() == 2 ? parse_number<ItemIndex>(f[1]) : std::nullopt;
    if (!u || !i || *u < 0 || *u >= m || *i < 0 || *i >= n)
      throw FormatError(path.string() + ": bad row at line " + std::to_string(lineno));
    rows[static_cast<std::size_t>(*u)].push_back(*i);
  }
  for (auto& r : rows) std::sort(r.begin(), r.end());
  return rows;
}

}  // namespace detail

// Writes train.csv, heldout.csv (dense indices), index_map.tsv and meta.txt.
inline void save_split(const SplitDataset& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& x = split.train;
  {
    std::ofstream out(dir / "train.csv");
    out << "user,item\n";
    for (UserIndex u = 0; u < x.m(); ++u)
      for (auto i : x.row(u)) out << u << ',' << i << '\n';
  }
  {
    std::ofstream out(dir / "heldout.csv");
    out << "user,item\n";
    for (std::size_t u = 0; u < split.heldout.size(); ++u)
      for (auto i : split.heldout[u]) out << u << ',' << i << '\n';
  }
  {
    std::ofstream out(dir / "index_map.tsv");
    for (UserIndex u = 0; u < x.m(); ++u) {
      detail::check_token(x.user_token(u));
      out << "user\t" << x.user_token(u) << '\t' << u << '\n';
    }
    for (ItemIndex i = 0; i < x.n(); ++i) {
      detail::check_token(x.item_token(i));
      out << "item\t" << x.item_token(i) << '\t' << i << '\n';
    }
  }
  std::ofstream meta(dir / "meta.txt");
  meta << "m=" << x.m() << "\nn=" << x.n() << "\nk=" << split.k << '\n';
  if (!meta) throw FormatError("failed writing split to " + dir.string());
}

inline SplitDataset load_split(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "meta.txt");
  if (!meta) throw FormatError("missing split metadata " + (dir / "meta.txt").string());
  std::unordered_map<std::string, long long> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto f = detail::split(detail::trim(line), "=");
    if (f.size() != 2) continue;
    if (auto v = detail::parse_number<long long>(f[1])) kv[std::string(f[0])] = *v;
  }
  if (!kv.count("m") || !kv.count("n") || !kv.count("k")) throw FormatError("incomplete split metadata");
  const auto m = static_cast<UserIndex>(kv["m"]);
  const auto n = static_cast<ItemIndex>(kv["n"]);

  std::vector<std::string> users(static_cast<std::size_t>(m)), items(static_cast<std::size_t>(n));
  std::ifstream map(dir / "index_map.tsv");
  if (!map) throw FormatError("missing index map");
  while (std::getline(map, line)) {
    if (detail::trim(line).empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = detail::split(line, "\t");
    const auto idx = f.size() == 3 ? detail::parse_number<long long>(f[2]) : std::nullopt;
    if (!idx) throw FormatError("bad index map line '" + line + "'");
    if (f[0] == "user" && *idx >= 0 && *idx < m) users[static_cast<std::size_t>(*idx)] = std::string(f[1]);
    else if (f[0] == "item" && *idx >= 0 && *idx < n) items[static_cast<std::size_t>(*idx)] = std::string(f[1]);
    else throw FormatError("bad index map line '" + line + "'");
  }

  SplitDataset split;
  split.k = static_cast<int>(kv["k"]);
  split.train = RatingMatrix(detail::read_pairs(dir / "train.csv", m, n), std::move(users), std::move(items));
  split.heldout = detail::read_pairs(dir / "heldout.csv", m, n);
  return split;
}

}  // namespace loca
