#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairgp/common.hpp"
#include "fairgp/fair_subspace.hpp"

namespace fairgp {

enum class TargetKind { Binary, Continuous };

std::string to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& name);
std::string to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(const std::string& name);

struct ProtectedColumn {
  std::string name;
  AttributeKind kind = AttributeKind::Continuous;
};

struct DatasetSchema {
  std::string target_column;
  TargetKind target_kind = TargetKind::Continuous;
  std::string positive_label;  // binary targets with non-numeric labels
  std::vector<ProtectedColumn> protected_columns;
  std::vector<std::string> feature_columns;  // empty: every remaining column
  std::vector<std::string> categorical_feature_columns;

  /// Target, protected and feature sets must be pairwise disjoint.
  void validate() const;
};

class DataError : public InvalidArgument {
 public:
  enum class Kind { UnknownColumn, UnparseableCell, EmptyResult, Io, Format, Split };
  DataError(Kind kind, const std::string& message) : InvalidArgument(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Category levels (sorted) of every categorical column, shared between the
/// training file and any later file scored with the same model.
struct Encoding {
  std::map<std::string, std::vector<std::string>> levels;
};

/// Affine map applied column-wise: (x - mean) / scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  bool empty() const { return mean.size() == 0; }
};

struct Dataset {
  Matrix X;      // encoded features
  Matrix S;      // protected attributes; continuous columns standardized after split
  Matrix S_raw;  // protected attributes in original units
  Vector y;
  std::vector<std::string> feature_names;
  std::vector<std::string> protected_names;
  std::vector<AttributeKind> protected_kinds;
  std::string target_name;
  bool binary = false;
  Index dropped_rows = 0;
  Encoding encoding;

  Index size() const { return y.size(); }
  Dataset rows(const std::vector<Index>& index) const;
};

/// Reads a comma-separated file with a header row. Rows with an empty or
/// NA/NaN/? cell in any used column are dropped and counted. When `encoding`
/// is given its levels are used (unseen levels are an error); otherwise the
/// levels found in the file are used.
Dataset load_csv(const std::string& path, const DatasetSchema& schema,
                 const Encoding* encoding = nullptr);

/// Writes feature, protected and target columns with round-trip precision.
void write_csv(const std::string& path, const Dataset& ds);

/// Schema that reloads a file produced by write_csv.
DatasetSchema written_schema(const Dataset& ds);

struct SplitResult {
  Dataset train;
  Dataset test;
  Standardizer x_scaler;
  Standardizer s_scaler;  // identity entries for categorical columns
  std::vector<Index> train_index;
  std::vector<Index> test_index;
};

/// Seeded split (stratified by class for binary targets). Features and
/// continuous protected columns are standardized with train statistics only.
SplitResult split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Applies fitted scalers to a dataset loaded for scoring.
Dataset apply_scalers(const Dataset& ds, const Standardizer& x_scaler,
                      const Standardizer& s_scaler);

}  // namespace fairgp
