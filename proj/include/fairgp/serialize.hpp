#pragma once

#include <string>

#include <json.hpp>

#include "fairgp/data.hpp"
#include "fairgp/fgp.hpp"

namespace fairgp {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j);

/// Self-describing dump: kernel, Xtrain, train_col_means, E, log_lambda,
/// log_noise and, when fitted, the targets and mean terms. Doubles are written
/// in shortest round-trip form, so load(save(m)) reproduces every bit.
Json model_to_json(const FgpModel& model);
FgpModel model_from_json(const Json& j);

Json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const Json& j);

Json schema_to_json(const DatasetSchema& schema);
DatasetSchema schema_from_json(const Json& j);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace fairgp
