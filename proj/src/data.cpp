#include "fairgp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

namespace fairgp {

std::string to_string(TargetKind kind) {
  return kind == TargetKind::Binary ? "binary" : "continuous";
}

TargetKind target_kind_from_string(const std::string& name) {
  if (name == "binary") return TargetKind::Binary;
  if (name == "continuous") return TargetKind::Continuous;
  throw InvalidArgument("unknown target kind '" + name + "' (expected binary or continuous)");
}

std::string to_string(AttributeKind kind) {
  return kind == AttributeKind::Categorical ? "categorical" : "continuous";
}

AttributeKind attribute_kind_from_string(const std::string& name) {
  if (name == "categorical") return AttributeKind::Categorical;
  if (name == "continuous") return AttributeKind::Continuous;
  throw InvalidArgument("unknown attribute kind '" + name +
                        "' (expected categorical or continuous)");
}

void DatasetSchema::validate() const {
  require(!target_column.empty(), "schema: target column is required");
  require(!protected_columns.empty(), "schema: at least one protected column is required");
  std::set<std::string> seen{target_column};
  for (const auto& p : protected_columns)
    if (!seen.insert(p.name).second)
      throw InvalidArgument("schema: column '" + p.name + "' used twice (target/protected)");
  for (const auto& f : feature_columns)
    if (!seen.insert(f).second)
      throw InvalidArgument("schema: feature column '" + f +
                            "' overlaps the target or protected columns");
  for (const auto& c : categorical_feature_columns) {
    if (c == target_column ||
        std::any_of(protected_columns.begin(), protected_columns.end(),
                    [&](const ProtectedColumn& p) { return p.name == c; }))
      throw InvalidArgument("schema: categorical feature '" + c +
                            "' overlaps the target or protected columns");
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, Index line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted)
    throw DataError(DataError::Kind::Format,
                    "csv: unterminated quote on line " + std::to_string(line_no));
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "?";
}

bool parse_number(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

std::vector<std::string> sorted_levels(const std::set<std::string>& values) {
  std::vector<std::string> levels(values.begin(), values.end());
  bool numeric = true;
  double tmp = 0.0;
  for (const auto& v : levels) numeric = numeric && parse_number(v, tmp);
  if (numeric) {
    std::stable_sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
      double x = 0.0, y = 0.0;
      parse_number(a, x);
      parse_number(b, y);
      return x < y;
    });
  }
  return levels;
}

Index level_code(const std::vector<std::string>& levels, const std::string& value,
                 const std::string& column) {
  const auto it = std::find(levels.begin(), levels.end(), value);
  if (it == levels.end())
    throw DataError(DataError::Kind::UnparseableCell,
                    "csv: column '" + column + "' has unseen category '" + value + "'");
  return static_cast<Index>(it - levels.begin());
}

}  // namespace

Dataset Dataset::rows(const std::vector<Index>& index) const {
  Dataset out;
  const auto k = static_cast<Index>(index.size());
  out.X.resize(k, X.cols());
  out.S.resize(k, S.cols());
  out.S_raw.resize(k, S_raw.cols());
  out.y.resize(k);
  for (Index a = 0; a < k; ++a) {
    out.X.row(a) = X.row(index[a]);
    out.S.row(a) = S.row(index[a]);
    out.S_raw.row(a) = S_raw.row(index[a]);
    out.y(a) = y(index[a]);
  }
  out.feature_names = feature_names;
  out.protected_names = protected_names;
  out.protected_kinds = protected_kinds;
  out.target_name = target_name;
  out.binary = binary;
  out.dropped_rows = dropped_rows;
  out.encoding = encoding;
  return out;
}

Dataset load_csv(const std::string& path, const DatasetSchema& schema, const Encoding* encoding) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw DataError(DataError::Kind::EmptyResult, "csv: '" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line, 1);
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError(DataError::Kind::UnknownColumn,
                      "csv: column '" + name + "' not found in header of '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t target_col = column_of(schema.target_column);
  std::vector<std::size_t> prot_cols;
  for (const auto& p : schema.protected_columns) prot_cols.push_back(column_of(p.name));
  std::vector<std::string> feature_names = schema.feature_columns;
  if (feature_names.empty()) {
    for (const auto& h : header) {
      const bool used = h == schema.target_column ||
                        std::any_of(schema.protected_columns.begin(),
                                    schema.protected_columns.end(),
                                    [&](const ProtectedColumn& p) { return p.name == h; });
      if (!used) feature_names.push_back(h);
    }
  }
  for (const auto& c : schema.categorical_feature_columns)
    if (std::find(feature_names.begin(), feature_names.end(), c) == feature_names.end())
      throw DataError(DataError::Kind::UnknownColumn,
                      "csv: categorical feature '" + c + "' is not a feature column");
  std::vector<std::size_t> feat_cols;
  for (const auto& f : feature_names) feat_cols.push_back(column_of(f));
  require(!feat_cols.empty(), "csv: no feature columns");

  std::vector<std::vector<std::string>> kept;
  Dataset ds;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line, line_no);
    if (cells.size() != header.size())
      throw DataError(DataError::Kind::Format, "csv: line " + std::to_string(line_no) + " has " +
                                                   std::to_string(cells.size()) +
                                                   " cells, header has " +
                                                   std::to_string(header.size()));
    for (auto& c : cells) c = trim(c);
    bool missing = is_missing(cells[target_col]);
    for (std::size_t c : prot_cols) missing = missing || is_missing(cells[c]);
    for (std::size_t c : feat_cols) missing = missing || is_missing(cells[c]);
    if (missing) {
      ++ds.dropped_rows;
      continue;
    }
    kept.push_back(std::move(cells));
  }
  if (kept.empty())
    throw DataError(DataError::Kind::EmptyResult,
                    "csv: no complete rows in '" + path + "' (" + std::to_string(ds.dropped_rows) +
                        " dropped)");
  const auto n = static_cast<Index>(kept.size());

  auto is_categorical_feature = [&](const std::string& name) {
    return std::find(schema.categorical_feature_columns.begin(),
                     schema.categorical_feature_columns.end(),
                     name) != schema.categorical_feature_columns.end();
  };
  auto levels_for = [&](const std::string& name, std::size_t col) {
    if (encoding != nullptr) {
      const auto it = encoding->levels.find(name);
      if (it == encoding->levels.end())
        throw DataError(DataError::Kind::UnknownColumn,
                        "csv: encoding has no levels for column '" + name + "'");
      return it->second;
    }
    std::set<std::string> values;
    for (const auto& row : kept) values.insert(row[col]);
    return sorted_levels(values);
  };
  auto number_at = [&](Index i, std::size_t col) {
    double v = 0.0;
    if (!parse_number(kept[i][col], v))
      throw DataError(DataError::Kind::UnparseableCell,
                      "csv: cannot parse '" + kept[i][col] + "' in column '" + header[col] +
                          "' as a number");
    return v;
  };

  // Features.
  std::vector<Vector> columns;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    const std::string& name = feature_names[f];
    const std::size_t col = feat_cols[f];
    if (is_categorical_feature(name)) {
      const std::vector<std::string> levels = levels_for(name, col);
      ds.encoding.levels[name] = levels;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        Vector v = Vector::Zero(n);
        for (Index i = 0; i < n; ++i) v(i) = kept[i][col] == levels[l] ? 1.0 : 0.0;
        columns.push_back(v);
        ds.feature_names.push_back(name + "=" + levels[l]);
      }
      for (Index i = 0; i < n; ++i) level_code(levels, kept[i][col], name);
    } else {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v(i) = number_at(i, col);
      columns.push_back(v);
      ds.feature_names.push_back(name);
    }
  }
  ds.X.resize(n, static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) ds.X.col(static_cast<Index>(c)) = columns[c];

  // Protected attributes.
  ds.S_raw.resize(n, static_cast<Index>(prot_cols.size()));
  for (std::size_t j = 0; j < prot_cols.size(); ++j) {
    const ProtectedColumn& p = schema.protected_columns[j];
    ds.protected_names.push_back(p.name);
    ds.protected_kinds.push_back(p.kind);
    if (p.kind == AttributeKind::Categorical) {
      const std::vector<std::string> levels = levels_for(p.name, prot_cols[j]);
      ds.encoding.levels[p.name] = levels;
      for (Index i = 0; i < n; ++i)
        ds.S_raw(i, static_cast<Index>(j)) =
            static_cast<double>(level_code(levels, kept[i][prot_cols[j]], p.name));
    } else {
      for (Index i = 0; i < n; ++i) ds.S_raw(i, static_cast<Index>(j)) = number_at(i, prot_cols[j]);
    }
  }
  ds.S = ds.S_raw;

  // Target.
  ds.target_name = schema.target_column;
  ds.binary = schema.target_kind == TargetKind::Binary;
  ds.y.resize(n);
  if (!ds.binary) {
    for (Index i = 0; i < n; ++i) ds.y(i) = number_at(i, target_col);
  } else {
    std::vector<std::string> levels;
    if (!schema.positive_label.empty()) {
      levels = {"", schema.positive_label};
      for (Index i = 0; i < n; ++i) ds.y(i) = kept[i][target_col] == schema.positive_label ? 1 : 0;
    } else {
      levels = encoding != nullptr && encoding->levels.count(schema.target_column)
                   ? encoding->levels.at(schema.target_column)
                   : levels_for(schema.target_column, target_col);
      if (levels.size() != 2)
        throw DataError(DataError::Kind::Format,
                        "csv: binary target '" + schema.target_column + "' has " +
                            std::to_string(levels.size()) + " distinct values, expected 2");
      for (Index i = 0; i < n; ++i)
        ds.y(i) = static_cast<double>(level_code(levels, kept[i][target_col], schema.target_column));
      ds.encoding.levels[schema.target_column] = levels;
    }
  }
  return ds;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError(DataError::Kind::Io, "csv: cannot write '" + path + "'");
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  };
  std::vector<std::string> names = ds.feature_names;
  names.insert(names.end(), ds.protected_names.begin(), ds.protected_names.end());
  names.push_back(ds.target_name);
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << quote(names[i]);
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.X.cols(); ++j) {
      put(ds.X(i, j));
      out << ',';
    }
    for (Index j = 0; j < ds.S_raw.cols(); ++j) {
      put(ds.S_raw(i, j));
      out << ',';
    }
    put(ds.y(i));
    out << '\n';
  }
  if (!out) throw DataError(DataError::Kind::Io, "csv: write to '" + path + "' failed");
}

DatasetSchema written_schema(const Dataset& ds) {
  DatasetSchema schema;
  schema.target_column = ds.target_name;
  schema.target_kind = ds.binary ? TargetKind::Binary : TargetKind::Continuous;
  for (std::size_t j = 0; j < ds.protected_names.size(); ++j)
    schema.protected_columns.push_back({ds.protected_names[j], AttributeKind::Continuous});
  schema.feature_columns = ds.feature_names;
  return schema;
}

Standardizer Standardizer::fit(const Matrix& X) {
  require(X.rows() >= 1, "standardizer: empty matrix");
  Standardizer s;
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  const double denom = X.rows() > 1 ? static_cast<double>(X.rows() - 1) : 1.0;
  for (Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.mean(j)).square().sum() / denom;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  require(X.cols() == mean.size(), "standardizer: column count mismatch");
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

namespace {

Standardizer protected_scaler(const Dataset& train) {
  Standardizer s = Standardizer::fit(train.S_raw);
  for (std::size_t j = 0; j < train.protected_kinds.size(); ++j)
    if (train.protected_kinds[j] == AttributeKind::Categorical) {
      s.mean(static_cast<Index>(j)) = 0.0;
      s.scale(static_cast<Index>(j)) = 1.0;
    }
  return s;
}

}  // namespace

Dataset apply_scalers(const Dataset& ds, const Standardizer& x_scaler,
                      const Standardizer& s_scaler) {
  Dataset out = ds;
  out.X = x_scaler.apply(ds.X);
  out.S = s_scaler.apply(ds.S_raw);
  return out;
}

SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "split: test_fraction must lie in (0, 1)");
  const Index n = ds.size();
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Index>> groups;
  if (ds.binary) {
    groups.resize(2);
    for (Index i = 0; i < n; ++i) groups[ds.y(i) == 1.0 ? 1 : 0].push_back(i);
  } else {
    groups.resize(1);
    groups[0].resize(n);
    std::iota(groups[0].begin(), groups[0].end(), Index{0});
  }
  SplitResult out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& idx = groups[g];
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto count = static_cast<Index>(idx.size());
    const auto n_test =
        static_cast<Index>(std::llround(test_fraction * static_cast<double>(count)));
    if (n_test < 1 || n_test >= count) {
      const std::string what = ds.binary ? "class " + std::to_string(g) : "dataset";
      throw DataError(DataError::Kind::Split,
                      "split: " + what + " (" + std::to_string(count) +
                          " rows) cannot populate both train and test");
    }
    out.test_index.insert(out.test_index.end(), idx.begin(), idx.begin() + n_test);
    out.train_index.insert(out.train_index.end(), idx.begin() + n_test, idx.end());
  }
  std::sort(out.train_index.begin(), out.train_index.end());
  std::sort(out.test_index.begin(), out.test_index.end());
  const Dataset train_raw = ds.rows(out.train_index);
  out.x_scaler = Standardizer::fit(train_raw.X);
  out.s_scaler = protected_scaler(train_raw);
  out.train = apply_scalers(train_raw, out.x_scaler, out.s_scaler);
  out.test = apply_scalers(ds.rows(out.test_index), out.x_scaler, out.s_scaler);
  return out;
}

}  // namespace fairgp
