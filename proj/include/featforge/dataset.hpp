#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "featforge/matrix.hpp"
#include "featforge/rng.hpp"

namespace featforge {

enum class Task : std::uint8_t { Classification, Regression };

inline const char* task_name(Task t) { return t == Task::Classification ? "classification" : "regression"; }

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FoldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::string name;
  Matrix X;
  std::vector<double> y;  // class labels 0..C-1 for classification
  Task task = Task::Regression;
  int n_classes = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> warnings;

  std::size_t n_rows() const { return X.n_rows(); }
  std::size_t n_cols() const { return X.n_cols(); }
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // per-row fold index in 0..k-1
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> complement_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }
};

namespace detail {

// RFC-4180-flavored reader: quoted fields, "" escapes, CR/LF tolerant.
inline std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any && (!field.empty() || !record.empty())) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  // drop fully blank trailing lines
  while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) records.pop_back();
  return records;
}

inline bool is_missing_cell(const std::string& s) {
  if (s.empty()) return true;
  std::string low;
  low.reserve(s.size());
  for (char ch : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return low == "na" || low == "nan" || low == "null" || low == "?";
}

inline std::optional<double> parse_number(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) return std::nullopt;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

struct LoadOptions {
  std::optional<Task> task_override;
  int class_value_limit = 20;  // integer targets with <= this many distinct values classify
  std::size_t min_rows = 10;
};

// Loads a CSV into a fully numeric, finite dataset:
//  - numeric columns keep their values; missing cells take the column median
//  - string columns are label-encoded by first appearance; missing is its own code
//  - fully empty columns are dropped with a warning
//  - rows with a missing target are dropped with a warning
inline Dataset load_csv(const std::string& path, const std::string& target,
                        const LoadOptions& opts = {}, std::string dataset_name = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  auto records = detail::read_csv_records(in);
  if (records.size() < 2) throw LoadError("unparseable file (need header plus rows): " + path);

  const auto header = records.front();
  const std::size_t n_cols_raw = header.size();

  // target by name, falling back to a numeric index
  std::size_t target_col = n_cols_raw;
  for (std::size_t j = 0; j < n_cols_raw; ++j)
    if (header[j] == target) target_col = j;
  if (target_col == n_cols_raw) {
    if (const auto idx = detail::parse_number(target);
        idx && *idx >= 0 && *idx == std::floor(*idx) && *idx < static_cast<double>(n_cols_raw))
      target_col = static_cast<std::size_t>(*idx);
    else
      throw LoadError("missing target column: " + target);
  }

  std::vector<std::vector<std::string>> rows(records.begin() + 1, records.end());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != n_cols_raw)
      throw LoadError("unparseable file: row " + std::to_string(i + 2) + " has " +
                      std::to_string(rows[i].size()) + " fields, expected " + std::to_string(n_cols_raw));

  Dataset ds;
  ds.name = dataset_name.empty() ? path : std::move(dataset_name);

  // drop rows with missing target
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!detail::is_missing_cell(rows[i][target_col])) keep.push_back(i);
  if (keep.size() != rows.size())
    ds.warnings.push_back("dropped " + std::to_string(rows.size() - keep.size()) + " rows with missing target");

  const std::size_t m = keep.size();
  if (m < opts.min_rows) throw LoadError("too few rows: " + std::to_string(m));

  // feature columns
  for (std::size_t j = 0; j < n_cols_raw; ++j) {
    if (j == target_col) continue;
    std::vector<std::optional<double>> numeric(m);
    bool all_missing = true;
    bool all_numeric = true;
    for (std::size_t i = 0; i < m; ++i) {
      const std::string& cell = rows[keep[i]][j];
      if (detail::is_missing_cell(cell)) continue;
      all_missing = false;
      if (const auto v = detail::parse_number(cell))
        numeric[i] = *v;
      else
        all_numeric = false;
    }
    if (all_missing) {
      ds.warnings.push_back("dropped empty column: " + header[j]);
      continue;
    }

    std::vector<double> col(m);
    if (all_numeric) {
      std::vector<double> present;
      for (const auto& v : numeric)
        if (v) present.push_back(*v);
      const double fill = detail::median_of(std::move(present));
      for (std::size_t i = 0; i < m; ++i) col[i] = numeric[i] ? *numeric[i] : fill;
    } else {
      // label-encode by first appearance; missing becomes its own category
      std::map<std::string, double> codes;
      for (std::size_t i = 0; i < m; ++i) {
        const std::string& cell = rows[keep[i]][j];
        const std::string key = detail::is_missing_cell(cell) ? std::string("\x01missing") : cell;
        auto it = codes.find(key);
        if (it == codes.end()) it = codes.emplace(key, static_cast<double>(codes.size())).first;
        col[i] = it->second;
      }
    }
    ds.X.add_col(std::move(col));
    ds.feature_names.push_back(header[j]);
  }
  if (ds.X.n_cols() == 0) throw LoadError("no usable feature columns in " + path);

  // target column: numeric or label-encoded
  std::vector<double> raw_y(m);
  {
    bool all_numeric = true;
    for (std::size_t i = 0; i < m; ++i)
      if (!detail::parse_number(rows[keep[i]][target_col])) all_numeric = false;
    if (all_numeric) {
      for (std::size_t i = 0; i < m; ++i) raw_y[i] = *detail::parse_number(rows[keep[i]][target_col]);
      bool integral = true;
      for (double v : raw_y)
        if (std::fabs(v - std::round(v)) > 1e-9) integral = false;
      std::vector<double> distinct = raw_y;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

      const bool classify =
          opts.task_override ? *opts.task_override == Task::Classification
                             : (integral && distinct.size() <= static_cast<std::size_t>(opts.class_value_limit) &&
                                distinct.size() >= 2);
      if (classify) {
        if (distinct.size() < 2) throw LoadError("classification target has a single class");
        ds.task = Task::Classification;
        ds.n_classes = static_cast<int>(distinct.size());
        for (std::size_t i = 0; i < m; ++i) {
          const auto it = std::lower_bound(distinct.begin(), distinct.end(), raw_y[i]);
          raw_y[i] = static_cast<double>(it - distinct.begin());
        }
      } else {
        ds.task = Task::Regression;
      }
    } else {
      if (opts.task_override && *opts.task_override == Task::Regression)
        throw LoadError("regression requested but target is not numeric");
      std::map<std::string, double> codes;
      for (std::size_t i = 0; i < m; ++i) {
        const std::string& cell = rows[keep[i]][target_col];
        auto it = codes.find(cell);
        if (it == codes.end()) it = codes.emplace(cell, static_cast<double>(codes.size())).first;
        raw_y[i] = it->second;
      }
      if (codes.size() < 2) throw LoadError("classification target has a single class");
      ds.task = Task::Classification;
      ds.n_classes = static_cast<int>(codes.size());
    }
  }
  ds.y = std::move(raw_y);
  return ds;
}

// Deterministic k-fold plan: stratified for classification (per-class counts
// across folds differ by at most one), plain shuffled split for regression.
inline FoldPlan make_folds(const Dataset& ds, int k, std::uint64_t seed) {
  const std::size_t m = ds.n_rows();
  if (k < 2) throw FoldError("fold count must be >= 2");
  if (m < static_cast<std::size_t>(k)) throw FoldError("fewer rows than folds");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(m, 0);
  Rng rng(seed);

  if (ds.task == Task::Classification) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
    for (std::size_t i = 0; i < m; ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
    for (const auto& members : by_class)
      if (members.size() < static_cast<std::size_t>(k))
        throw FoldError("class too small for " + std::to_string(k) + " folds");
    // Round-robin with a rolling pointer across classes keeps both the
    // per-class and the global fold sizes within one of each other.
    int fold = 0;
    for (auto& members : by_class) {
      rng.shuffle(members);
      for (std::size_t idx : members) {
        plan.assignments[idx] = fold;
        fold = (fold + 1) % k;
      }
    }
  } else {
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < m; ++i) plan.assignments[order[i]] = static_cast<int>(i % k);
  }
  return plan;
}

}  // namespace featforge
