#include "fairgp/serialize.hpp"

#include <fstream>

namespace fairgp {

namespace {

constexpr const char* kModelFormat = "fairgp-model";
constexpr int kModelVersion = 1;

}  // namespace

Json matrix_to_json(const Matrix& M) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(M.size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  require(rows >= 0 && cols >= 0 && static_cast<Index>(data.size()) == rows * cols,
          "json: matrix data length does not match its shape");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) M(i, c) = data[static_cast<std::size_t>(i * cols + c)];
  return M;
}

Json vector_to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

Json kernel_to_json(const KernelSpec& spec) {
  Json j{{"family", to_string(spec.family())}, {"variance", spec.variance()}};
  if (spec.family() == KernelFamily::RBF) j["lengthscale"] = spec.lengthscale();
  return j;
}

KernelSpec kernel_from_json(const Json& j) {
  const KernelFamily family = kernel_family_from_string(j.at("family").get<std::string>());
  const double variance = j.value("variance", 1.0);
  if (family == KernelFamily::RBF) return KernelSpec::rbf(j.at("lengthscale").get<double>(), variance);
  return KernelSpec::linear(variance);
}

Json model_to_json(const FgpModel& model) {
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kernel"] = kernel_to_json(model.spec());
  j["Xtrain"] = matrix_to_json(model.Xtrain());
  j["train_col_means"] = vector_to_json(model.train_col_means().transpose());
  j["E"] = matrix_to_json(model.E());
  j["log_lambda"] = vector_to_json(model.log_lambda());
  j["log_noise"] = model.log_noise();
  if (model.fitted()) {
    j["targets"] = vector_to_json(model.targets());
    j["y_offset"] = model.y_offset();
    j["mean_beta"] = vector_to_json(model.mean_beta());
  }
  return j;
}

FgpModel model_from_json(const Json& j) {
  if (j.value("format", std::string()) != kModelFormat)
    throw InvalidArgument("model dump: not a fairgp model file");
  if (j.value("version", 0) != kModelVersion)
    throw InvalidArgument("model dump: unsupported version");
  const KernelSpec spec = kernel_from_json(j.at("kernel"));
  const Matrix X = matrix_from_json(j.at("Xtrain"));
  const Eigen::RowVectorXd means = vector_from_json(j.at("train_col_means")).transpose();
  const Matrix E = matrix_from_json(j.at("E"));
  const Vector log_lambda = vector_from_json(j.at("log_lambda"));
  const double log_noise = j.at("log_noise").get<double>();
  if (j.contains("targets")) {
    const Vector y = vector_from_json(j.at("targets"));
    return FgpModel::restore(spec, X, means, E, log_lambda, log_noise, &y,
                             j.at("y_offset").get<double>(), vector_from_json(j.at("mean_beta")));
  }
  return FgpModel::restore(spec, X, means, E, log_lambda, log_noise, nullptr, 0.0, Vector());
}

Json standardizer_to_json(const Standardizer& s) {
  return Json{{"mean", vector_to_json(s.mean.transpose())},
              {"scale", vector_to_json(s.scale.transpose())}};
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer s;
  s.mean = vector_from_json(j.at("mean")).transpose();
  s.scale = vector_from_json(j.at("scale")).transpose();
  require(s.mean.size() == s.scale.size(), "json: standardizer size mismatch");
  return s;
}

Json schema_to_json(const DatasetSchema& schema) {
  Json prot = Json::array();
  for (const auto& p : schema.protected_columns)
    prot.push_back(Json{{"name", p.name}, {"kind", to_string(p.kind)}});
  Json j{{"target", schema.target_column},
         {"target_kind", to_string(schema.target_kind)},
         {"protected", prot},
         {"features", schema.feature_columns},
         {"categorical_features", schema.categorical_feature_columns}};
  if (!schema.positive_label.empty()) j["positive_label"] = schema.positive_label;
  return j;
}

DatasetSchema schema_from_json(const Json& j) {
  DatasetSchema schema;
  schema.target_column = j.at("target").get<std::string>();
  schema.target_kind = target_kind_from_string(j.value("target_kind", std::string("continuous")));
  schema.positive_label = j.value("positive_label", std::string());
  for (const auto& p : j.at("protected")) {
    if (p.is_string()) {
      schema.protected_columns.push_back({p.get<std::string>(), AttributeKind::Continuous});
    } else {
      schema.protected_columns.push_back(
          {p.at("name").get<std::string>(),
           attribute_kind_from_string(p.value("kind", std::string("continuous")))});
    }
  }
  schema.feature_columns = j.value("features", std::vector<std::string>());
  schema.categorical_feature_columns = j.value("categorical_features", std::vector<std::string>());
  schema.validate();
  return schema;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return Json::parse(in);
}

}  // namespace fairgp
