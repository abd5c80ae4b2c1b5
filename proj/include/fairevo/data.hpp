#pragma once

/// @file data.hpp
/// Tabular dataset ingestion: CSV + schema loading, age discretization,
/// imputation/encoding into a dense matrix, and the stratified splits used
/// by the search and the experiment protocol.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fairevo/error.hpp"
#include "fairevo/matrix.hpp"
#include "fairevo/random.hpp"

namespace fairevo {

enum class ColumnKind { numeric, categorical };

inline std::string to_string(ColumnKind k) { return k == ColumnKind::numeric ? "numeric" : "categorical"; }

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  bool is_sensitive = false;
  bool is_label = false;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

struct Schema {
  std::vector<ColumnSpec> columns;
  // Overrides the minority-class default for the positive label.
  std::optional<std::string> positive_label;
};

/// Accepts either `{"columns": [...], "positive_label": "..."}` or a bare
/// array of column objects.
inline Schema parse_schema(const nlohmann::json& j) {
  Schema schema;
  const nlohmann::json* cols = &j;
  if (j.is_object()) {
    for (auto& [key, _] : j.items()) {
      if (key != "columns" && key != "positive_label") throw SchemaError("schema: unknown key '" + key + "'");
    }
    if (!j.contains("columns")) throw SchemaError("schema: missing 'columns'");
    cols = &j.at("columns");
    if (j.contains("positive_label")) schema.positive_label = j.at("positive_label").get<std::string>();
  }
  if (!cols->is_array()) throw SchemaError("schema: 'columns' must be an array");
  for (const auto& c : *cols) {
    ColumnSpec spec;
    try {
      spec.name = c.at("name").get<std::string>();
      const auto kind = c.value("kind", std::string("numeric"));
      if (kind == "numeric") spec.kind = ColumnKind::numeric;
      else if (kind == "categorical") spec.kind = ColumnKind::categorical;
      else throw SchemaError("schema: column '" + spec.name + "' has unknown kind '" + kind + "'");
      spec.is_sensitive = c.value("is_sensitive", false);
      spec.is_label = c.value("is_label", false);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("schema: ") + e.what());
    }
    schema.columns.push_back(std::move(spec));
  }
  const auto n_labels = std::count_if(schema.columns.begin(), schema.columns.end(),
                                      [](const ColumnSpec& c) { return c.is_label; });
  if (n_labels != 1) throw SchemaError("schema: exactly one label column required");
  return schema;
}

inline Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  try {
    return parse_schema(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema " + path.string() + ": " + e.what());
  }
}

/// A cell is missing, a number, or a category token.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) noexcept { return std::holds_alternative<std::monostate>(c); }

inline const std::string kAgeBelow25 = "<25";
inline const std::string kAge25to60 = "25-60";
inline const std::string kAgeAbove60 = ">60";

/// Maps ages onto the three bins; 25 and 60 both fall in the closed middle bin.
/// Missing values stay missing.
inline Cell discretize_age(const Cell& value) {
  if (is_missing(value)) return value;
  if (!std::holds_alternative<double>(value)) throw ContractError("discretize_age: non-numeric value");
  const double v = std::get<double>(value);
  if (!(v >= 0.0)) throw ContractError("discretize_age: negative age");
  if (v < 25.0) return kAgeBelow25;
  if (v <= 60.0) return kAge25to60;
  return kAgeAbove60;
}

inline std::vector<Cell> discretize_age(std::span<const Cell> values) {
  std::vector<Cell> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(discretize_age(v));
  return out;
}

/// Immutable row-major table with one binary label column.
class TabularDataset {
 public:
  TabularDataset(std::vector<ColumnSpec> columns, std::vector<Cell> cells,
                 std::optional<std::string> positive_label = std::nullopt)
      : columns_(std::move(columns)), cells_(std::move(cells)) {
    if (columns_.empty()) throw SchemaError("dataset has no columns");
    if (cells_.size() % columns_.size() != 0) throw ContractError("dataset: ragged cell table");
    n_rows_ = cells_.size() / columns_.size();
    if (n_rows_ == 0) throw SchemaError("dataset has no rows");

    std::optional<std::size_t> label;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c].is_label) {
        if (label) throw SchemaError("dataset: more than one label column");
        label = c;
      } else {
        feature_columns_.push_back(c);
        if (columns_[c].is_sensitive) sensitive_columns_.push_back(c);
      }
    }
    if (!label) throw SchemaError("dataset: no label column");
    label_column_ = *label;
    resolve_labels(positive_label);
  }

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  const ColumnSpec& column(std::size_t c) const { return columns_.at(c); }
  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_columns() const noexcept { return columns_.size(); }
  std::size_t n_features() const noexcept { return feature_columns_.size(); }

  const Cell& cell(std::size_t row, std::size_t col) const noexcept { return cells_[row * columns_.size() + col]; }

  std::size_t label_column() const noexcept { return label_column_; }
  // Column indices (into columns()) of every non-label column, in file order.
  const std::vector<std::size_t>& feature_columns() const noexcept { return feature_columns_; }
  const std::vector<std::size_t>& sensitive_columns() const noexcept { return sensitive_columns_; }

  std::span<const int> labels() const noexcept { return labels_; }
  const std::string& positive_label() const noexcept { return positive_label_; }
  const std::string& negative_label() const noexcept { return negative_label_; }

  double positive_fraction() const noexcept {
    return static_cast<double>(std::count(labels_.begin(), labels_.end(), 1)) / static_cast<double>(n_rows_);
  }

  std::optional<std::size_t> column_index(std::string_view name) const {
    for (std::size_t c = 0; c < columns_.size(); ++c)
      if (columns_[c].name == name) return c;
    return std::nullopt;
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    for (auto c : feature_columns_) names.push_back(columns_[c].name);
    return names;
  }

  TabularDataset select_rows(std::span<const std::size_t> rows) const {
    std::vector<Cell> cells;
    cells.reserve(rows.size() * columns_.size());
    for (auto r : rows) {
      if (r >= n_rows_) throw ContractError("select_rows: row out of range");
      for (std::size_t c = 0; c < columns_.size(); ++c) cells.push_back(cell(r, c));
    }
    return TabularDataset(columns_, std::move(cells), positive_label_);
  }

 private:
  void resolve_labels(const std::optional<std::string>& positive_override) {
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> tokens(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) {
      const Cell& v = cell(r, label_column_);
      if (is_missing(v)) throw SchemaError("label missing at row " + std::to_string(r + 1));
      tokens[r] = std::holds_alternative<std::string>(v) ? std::get<std::string>(v) : format_number(std::get<double>(v));
      ++counts[tokens[r]];
    }
    if (counts.size() != 2)
      throw SchemaError("label column '" + columns_[label_column_].name + "' must have exactly 2 distinct values, found " +
                        std::to_string(counts.size()));
    auto first = counts.begin();
    auto second = std::next(first);
    if (positive_override) {
      if (!counts.contains(*positive_override))
        throw SchemaError("positive label '" + *positive_override + "' not present in label column");
      positive_label_ = *positive_override;
      negative_label_ = positive_label_ == first->first ? second->first : first->first;
    } else if (first->second < second->second) {
      positive_label_ = first->first;
      negative_label_ = second->first;
    } else {
      // Minority wins; on a tie the lexicographically larger token is positive.
      positive_label_ = second->first;
      negative_label_ = first->first;
    }
    labels_.resize(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) labels_[r] = tokens[r] == positive_label_ ? 1 : 0;
  }

  static std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

  std::vector<ColumnSpec> columns_;
  std::vector<Cell> cells_;
  std::size_t n_rows_ = 0;
  std::size_t label_column_ = 0;
  std::vector<std::size_t> feature_columns_;
  std::vector<std::size_t> sensitive_columns_;
  std::vector<int> labels_;
  std::string positive_label_;
  std::string negative_label_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record. Quoted fields may contain commas and "" escapes;
// embedded newlines are not supported.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      if (!trim(field).empty()) throw ParseError("unexpected quote inside unquoted field", row);
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", row);
  out.push_back(was_quoted ? field : std::string(trim(field)));
  return out;
}

inline bool is_missing_token(std::string_view s) { return s.empty() || s == "?"; }

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses CSV text against a schema. Header names must match the schema
/// names as a set; columns are kept in header order. Sensitive columns
/// declared numeric are discretized into age bins and become categorical.
inline TabularDataset parse_csv(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) throw ParseError("empty CSV input", 0);
  const auto header = detail::split_csv_line(line, 0);

  std::vector<ColumnSpec> columns;
  for (const auto& name : header) {
    auto it = std::find_if(schema.columns.begin(), schema.columns.end(),
                           [&](const ColumnSpec& c) { return c.name == name; });
    if (it == schema.columns.end()) throw SchemaError("CSV column '" + name + "' not declared in schema");
    if (std::any_of(columns.begin(), columns.end(), [&](const ColumnSpec& c) { return c.name == name; }))
      throw SchemaError("duplicate CSV column '" + name + "'");
    columns.push_back(*it);
  }
  for (const auto& c : schema.columns) {
    if (std::none_of(columns.begin(), columns.end(), [&](const ColumnSpec& h) { return h.name == c.name; }))
      throw SchemaError("schema column '" + c.name + "' missing from CSV header");
  }

  std::vector<Cell> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    auto fields = detail::split_csv_line(line, row);
    if (fields.size() != columns.size())
      throw ParseError("expected " + std::to_string(columns.size()) + " fields, got " + std::to_string(fields.size()),
                       row);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& f = fields[c];
      if (detail::is_missing_token(f)) {
        cells.emplace_back(std::monostate{});
      } else if (columns[c].kind == ColumnKind::numeric && !columns[c].is_label) {
        auto v = detail::parse_double(f);
        if (!v) throw ParseError("column '" + columns[c].name + "': not a number: '" + f + "'", row);
        cells.emplace_back(*v);
      } else {
        cells.emplace_back(f);
      }
    }
  }
  if (row == 0) throw ParseError("CSV has a header but no data rows", 0);

  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].is_sensitive && columns[c].kind == ColumnKind::numeric) {
      for (std::size_t r = 0; r < row; ++r) {
        auto& cell = cells[r * columns.size() + c];
        try {
          cell = discretize_age(cell);
        } catch (const ContractError&) {
          throw ParseError("column '" + columns[c].name + "': invalid age value", r + 1);
        }
      }
      columns[c].kind = ColumnKind::categorical;
    }
  }
  return TabularDataset(std::move(columns), std::move(cells), schema.positive_label);
}

inline TabularDataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_csv(in, schema);
}

/// Dense encoding of a row subset.
struct EncodedMatrix {
  Matrix features;
  std::vector<int> labels;
  // Encoded column -> source column name (and index into the dataset's columns).
  std::vector<std::string> column_origin;
  std::vector<std::size_t> column_source;
  std::vector<std::string> column_names;
};

/// Imputation + one-hot + standardization, fitted on one row subset and
/// applied to any other. Categorical missing -> mode, numeric missing ->
/// median; categories never seen at fit time encode as all zeros.
class Encoder {
 public:
  Encoder() = default;

  /// Fits on `rows` using only the listed source columns (all features when empty).
  static Encoder fit(const TabularDataset& ds, std::span<const std::size_t> rows,
                     std::span<const std::size_t> source_columns = {}) {
    if (rows.empty()) throw EncodingError("cannot fit encoder on zero rows");
    Encoder enc;
    std::vector<std::size_t> cols(source_columns.begin(), source_columns.end());
    if (cols.empty()) cols = ds.feature_columns();
    for (auto c : cols) {
      const auto& spec = ds.column(c);
      if (spec.is_label) throw ContractError("encoder: label column cannot be a feature");
      ColumnState st;
      st.source = c;
      st.name = spec.name;
      st.kind = spec.kind;
      if (spec.kind == ColumnKind::categorical) {
        std::map<std::string, std::size_t> counts;
        for (auto r : rows) {
          const Cell& v = ds.cell(r, c);
          if (is_missing(v)) continue;
          ++counts[std::holds_alternative<std::string>(v) ? std::get<std::string>(v) : std::to_string(std::get<double>(v))];
        }
        if (counts.empty()) throw EncodingError("column '" + spec.name + "' has no observed values");
        std::size_t best = 0;
        for (const auto& [cat, n] : counts) {
          st.categories.push_back(cat);
          if (n > best) {  // strict: ties keep the lexicographically first category
            best = n;
            st.mode = cat;
          }
        }
      } else {
        std::vector<double> observed;
        for (auto r : rows) {
          const Cell& v = ds.cell(r, c);
          if (!is_missing(v)) observed.push_back(std::get<double>(v));
        }
        if (observed.empty()) throw EncodingError("column '" + spec.name + "' has no observed values");
        std::sort(observed.begin(), observed.end());
        const auto m = observed.size();
        st.median = m % 2 == 1 ? observed[m / 2] : 0.5 * (observed[m / 2 - 1] + observed[m / 2]);
        // Mean/std over the imputed column.
        double sum = 0.0;
        for (auto r : rows) sum += value_or(ds.cell(r, c), st.median);
        st.mean = sum / static_cast<double>(rows.size());
        double ss = 0.0;
        for (auto r : rows) {
          const double d = value_or(ds.cell(r, c), st.median) - st.mean;
          ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
        st.scale = sd > 1e-12 ? sd : 1.0;
      }
      enc.columns_.push_back(std::move(st));
    }
    return enc;
  }

  std::size_t n_encoded() const noexcept {
    std::size_t n = 0;
    for (const auto& c : columns_) n += c.kind == ColumnKind::numeric ? 1 : c.categories.size();
    return n;
  }

  EncodedMatrix transform(const TabularDataset& ds, std::span<const std::size_t> rows) const {
    EncodedMatrix out;
    const auto width = n_encoded();
    out.features = Matrix(rows.size(), width);
    out.labels.reserve(rows.size());
    for (const auto& c : columns_) {
      if (c.kind == ColumnKind::numeric) {
        out.column_origin.push_back(c.name);
        out.column_source.push_back(c.source);
        out.column_names.push_back(c.name);
      } else {
        for (const auto& cat : c.categories) {
          out.column_origin.push_back(c.name);
          out.column_source.push_back(c.source);
          out.column_names.push_back(c.name + "=" + cat);
        }
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows[i];
      auto dst = out.features.row(i);
      std::size_t j = 0;
      for (const auto& c : columns_) {
        const Cell& v = ds.cell(r, c.source);
        if (c.kind == ColumnKind::numeric) {
          dst[j++] = (value_or(v, c.median) - c.mean) / c.scale;
        } else {
          const std::string token = is_missing(v) ? c.mode
                                    : std::holds_alternative<std::string>(v) ? std::get<std::string>(v)
                                                                             : std::to_string(std::get<double>(v));
          auto it = std::lower_bound(c.categories.begin(), c.categories.end(), token);
          if (it != c.categories.end() && *it == token) dst[j + static_cast<std::size_t>(it - c.categories.begin())] = 1.0;
          j += c.categories.size();
        }
      }
      out.labels.push_back(ds.labels()[r]);
    }
    return out;
  }

 private:
  struct ColumnState {
    std::size_t source = 0;
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<std::string> categories;  // sorted
    std::string mode;
    double median = 0.0;
    double mean = 0.0;
    double scale = 1.0;
  };

  static double value_or(const Cell& v, double fallback) {
    return is_missing(v) ? fallback : std::get<double>(v);
  }

  std::vector<ColumnState> columns_;
};

/// Fits and applies the encoder over the whole dataset.
inline EncodedMatrix impute_and_encode(const TabularDataset& ds) {
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return Encoder::fit(ds, rows).transform(ds, rows);
}

// ---------------------------------------------------------------------------
// Splits

struct FoldPlan {
  std::size_t k = 0;
  std::vector<int> assignments;  // row -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r)
      if (static_cast<std::size_t>(assignments[r]) == fold) rows.push_back(r);
    return rows;
  }

  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r)
      if (static_cast<std::size_t>(assignments[r]) != fold) rows.push_back(r);
    return rows;
  }

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

/// Stratified k-fold over a label vector. The smaller class is shuffled and
/// dealt round-robin; the larger class is shuffled and split into per-fold
/// quotas proportional to each fold's share of the smaller class (largest
/// remainder), which keeps every fold's class ratio near the global one.
inline FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw SplitError("stratified_kfold: k must be >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] != 0 && labels[r] != 1) throw ContractError("stratified_kfold: labels must be 0/1");
    by_class[labels[r]].push_back(r);
  }
  for (int c = 0; c < 2; ++c)
    if (by_class[c].size() < k)
      throw SplitError("stratified_kfold: class " + std::to_string(c) + " has fewer than k rows");

  FoldPlan plan{k, std::vector<int>(labels.size(), -1), seed};
  Rng rng(mix_seed(seed));
  const int small = by_class[1].size() <= by_class[0].size() ? 1 : 0;
  auto& first = by_class[small];
  auto& second = by_class[1 - small];
  std::shuffle(first.begin(), first.end(), rng);
  std::shuffle(second.begin(), second.end(), rng);

  std::vector<std::size_t> share(k, 0);
  for (std::size_t i = 0; i < first.size(); ++i) {
    plan.assignments[first[i]] = static_cast<int>(i % k);
    ++share[i % k];
  }
  std::vector<std::size_t> quota(k);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const double exact = static_cast<double>(second.size()) * static_cast<double>(share[f]) /
                         static_cast<double>(first.size());
    quota[f] = static_cast<std::size_t>(exact);
    assigned += quota[f];
    rem.emplace_back(-(exact - static_cast<double>(quota[f])), f);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t i = 0; assigned < second.size(); ++i, ++assigned) ++quota[rem[i % k].second];
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t q = 0; q < quota[f]; ++q) plan.assignments[second[pos++]] = static_cast<int>(f);
  return plan;
}

inline FoldPlan stratified_kfold(const TabularDataset& ds, std::size_t k, std::uint64_t seed) {
  return stratified_kfold(ds.labels(), k, seed);
}

namespace detail {

// Per-class quotas summing to `total`, proportional to class sizes
// (largest-remainder; ties to the lower class id).
inline std::array<std::size_t, 2> allocate_by_class(const std::array<std::size_t, 2>& sizes, std::size_t total) {
  const double n = static_cast<double>(sizes[0] + sizes[1]);
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> rem{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = n > 0 ? static_cast<double>(total) * static_cast<double>(sizes[c]) / n : 0.0;
    quota[c] = std::min(sizes[c], static_cast<std::size_t>(std::floor(exact)));
    rem[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  while (assigned < total) {
    int pick = rem[0] >= rem[1] ? 0 : 1;
    if (quota[pick] >= sizes[pick]) pick = 1 - pick;
    ++quota[pick];
    rem[pick] = -1.0;
    ++assigned;
  }
  return quota;
}

}  // namespace detail

/// Label-stratified sample of `count` rows from `rows`, returned sorted.
inline std::vector<std::size_t> stratified_sample(std::span<const int> labels, std::span<const std::size_t> rows,
                                                  std::size_t count, std::uint64_t seed) {
  if (count > rows.size()) throw ContractError("stratified_sample: count exceeds rows");
  std::vector<std::size_t> by_class[2];
  for (auto r : rows) by_class[labels[r]].push_back(r);
  const auto quota = detail::allocate_by_class({by_class[0].size(), by_class[1].size()}, count);
  Rng rng(mix_seed(seed));
  std::vector<std::size_t> out;
  out.reserve(count);
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct TrainValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified hold-out: validation gets round(fraction * n) rows.
inline TrainValidationSplit train_validation_split(std::span<const int> labels, std::span<const std::size_t> rows,
                                                   double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("train_validation_split: fraction must be in (0,1)");
  std::size_t n_pos = 0;
  for (auto r : rows) n_pos += labels[r] == 1;
  if (n_pos == 0 || n_pos == rows.size()) throw SplitError("train_validation_split: rows contain a single class");
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
  if (n_val == 0 || n_val == rows.size()) throw SplitError("train_validation_split: a subset would be empty");

  TrainValidationSplit split;
  split.validation = stratified_sample(labels, rows, n_val, seed);
  for (auto r : rows)
    if (!std::binary_search(split.validation.begin(), split.validation.end(), r)) split.train.push_back(r);
  return split;
}

}  // namespace fairevo
