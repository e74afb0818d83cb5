#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "fairgp/data.hpp"
#include "fairgp/serialize.hpp"
#include "fairgp/synthetic.hpp"

using namespace fairgp;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "fairgp_test_data";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

DatasetSchema toy_schema() {
  DatasetSchema s;
  s.target_column = "y";
  s.protected_columns = {{"s", AttributeKind::Continuous}};
  s.categorical_feature_columns = {"color"};
  return s;
}

DataError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("no DataError thrown");
  return DataError::Kind::Io;
}

}  // namespace

TEST_CASE("one-hot encoding of a categorical feature") {
  const std::string path = temp_file("toy.csv", "x,color,s,y\n1.5,red,0.1,3\n2.5,blue,0.2,4\n-1,red,0.3,5\n");
  const Dataset ds = load_csv(path, toy_schema());
  REQUIRE(ds.X.cols() == 3);
  CHECK(ds.feature_names == std::vector<std::string>{"x", "color=blue", "color=red"});
  Matrix X(3, 3);
  X << 1.5, 0, 1, 2.5, 1, 0, -1, 0, 1;
  CHECK(ds.X == X);
  CHECK(ds.y == (Vector(3) << 3, 4, 5).finished());
  CHECK(ds.S_raw.col(0) == (Vector(3) << 0.1, 0.2, 0.3).finished());
  CHECK(ds.encoding.levels.at("color") == std::vector<std::string>{"blue", "red"});
  CHECK(ds.dropped_rows == 0);
}

TEST_CASE("rows with missing cells are dropped and counted") {
  const std::string path =
      temp_file("missing.csv", "x,color,s,y\n1,red,0.1,\n2,blue,NA,4\n3,red,0.3,5\n4,\"blue\",0.4,6\n");
  const Dataset ds = load_csv(path, toy_schema());
  CHECK(ds.size() == 2);
  CHECK(ds.dropped_rows == 2);
  CHECK(ds.y == (Vector(2) << 5, 6).finished());
}

TEST_CASE("binary targets map to 0 and 1") {
  DatasetSchema s = toy_schema();
  s.target_kind = TargetKind::Binary;
  s.positive_label = ">50K";
  const std::string path = temp_file("bin.csv", "x,color,s,y\n1,red,0,>50K\n2,blue,1,<=50K\n3,red,0,>50K\n");
  const Dataset ds = load_csv(path, s);
  CHECK(ds.binary);
  CHECK(ds.y == (Vector(3) << 1, 0, 1).finished());
}

TEST_CASE("load errors are distinct") {
  const std::string ok = temp_file("ok.csv", "x,color,s,y\n1,red,0.1,3\n");
  DatasetSchema unknown = toy_schema();
  unknown.target_column = "target";
  CHECK(kind_of([&] { load_csv(ok, unknown); }) == DataError::Kind::UnknownColumn);
  const std::string bad = temp_file("bad.csv", "x,color,s,y\nabc,red,0.1,3\n");
  CHECK(kind_of([&] { load_csv(bad, toy_schema()); }) == DataError::Kind::UnparseableCell);
  const std::string empty = temp_file("empty.csv", "x,color,s,y\n1,red,,3\n");
  CHECK(kind_of([&] { load_csv(empty, toy_schema()); }) == DataError::Kind::EmptyResult);
  CHECK(kind_of([&] { load_csv("/nonexistent/file.csv", toy_schema()); }) == DataError::Kind::Io);
  DatasetSchema overlap = toy_schema();
  overlap.feature_columns = {"x", "s"};
  CHECK_THROWS_AS(overlap.validate(), InvalidArgument);
  Encoding enc;
  enc.levels["color"] = {"red"};
  const std::string unseen = temp_file("unseen.csv", "x,color,s,y\n1,green,0.1,3\n");
  CHECK_THROWS_AS(load_csv(unseen, toy_schema(), &enc), DataError);
}

TEST_CASE("write and reload reproduce the dataset") {
  PlantedConfig cfg;
  cfg.n = 200;
  for (bool binary : {false, true}) {
    cfg.binary = binary;
    const Dataset ds = planted_dataset(cfg);
    const std::string path = temp_file(binary ? "rt_bin.csv" : "rt.csv", "");
    write_csv(path, ds);
    const Dataset back = load_csv(path, written_schema(ds));
    CHECK(back.X == ds.X);
    CHECK(back.S_raw == ds.S_raw);
    CHECK(back.y == ds.y);
    CHECK(back.feature_names == ds.feature_names);
    CHECK(back.binary == ds.binary);
    const DatasetSchema again = schema_from_json(schema_to_json(written_schema(ds)));
    CHECK(again.target_column == ds.target_name);
  }
}

TEST_CASE("features never include target or protected columns") {
  const Dataset ds = planted_dataset(PlantedConfig{});
  for (const auto& name : ds.feature_names) {
    CHECK(name != ds.target_name);
    CHECK(std::find(ds.protected_names.begin(), ds.protected_names.end(), name) == ds.protected_names.end());
  }
}

TEST_CASE("split is seeded and disjoint") {
  PlantedConfig cfg;
  cfg.n = 10;
  const Dataset ds = planted_dataset(cfg);
  const SplitResult a = split(ds, 0.5, 3), b = split(ds, 0.5, 3), c = split(ds, 0.5, 4);
  CHECK(a.train_index == b.train_index);
  CHECK(a.test_index == b.test_index);
  CHECK(a.train.X == b.train.X);
  CHECK(a.test_index.size() == 5);
  CHECK((a.train_index != c.train_index || a.test_index != c.test_index));
  std::set<Index> all(a.train_index.begin(), a.train_index.end());
  all.insert(a.test_index.begin(), a.test_index.end());
  CHECK(all.size() == 10);
  CHECK_THROWS_AS(split(ds, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(split(ds, 1.0, 1), InvalidArgument);
}

TEST_CASE("stratified split keeps the class ratio") {
  PlantedConfig cfg;
  cfg.n = 301;
  cfg.binary = true;
  const Dataset ds = planted_dataset(cfg);
  const double pos = ds.y.sum();
  for (std::uint64_t seed : {1, 2, 3}) {
    const SplitResult s = split(ds, 0.3, seed);
    const double expected = pos * static_cast<double>(s.test.size()) / static_cast<double>(ds.size());
    CHECK(std::abs(s.test.y.sum() - expected) <= 1.0);
  }
}

TEST_CASE("test rows are scaled with training statistics") {
  PlantedConfig cfg;
  cfg.n = 100;
  Dataset ds = planted_dataset(cfg);
  const SplitResult base = split(ds, 0.3, 5);
  for (Index i : base.test_index) ds.X.row(i).array() += 10.0;
  const SplitResult shifted = split(ds, 0.3, 5);
  CHECK(shifted.train.X == base.train.X);
  const Matrix diff = shifted.test.X - base.test.X;
  const Eigen::RowVectorXd expected = (10.0 * Eigen::RowVectorXd::Ones(ds.X.cols())).cwiseQuotient(base.x_scaler.scale);
  for (Index r = 0; r < diff.rows(); ++r) CHECK((diff.row(r) - expected).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(base.train.X.colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  const Dataset rescored = apply_scalers(ds.rows(base.test_index), base.x_scaler, base.s_scaler);
  CHECK((rescored.X - shifted.test.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("categorical protected columns stay unscaled") {
  PlantedConfig cfg;
  cfg.n = 60;
  cfg.binary = true;
  const Dataset ds = planted_dataset(cfg);
  REQUIRE(ds.protected_kinds[0] == AttributeKind::Categorical);
  const SplitResult s = split(ds, 0.25, 2);
  CHECK(s.train.S == s.train.S_raw);
  CHECK(s.s_scaler.scale(0) == 1.0);
  CHECK(s.s_scaler.mean(0) == 0.0);
}

TEST_CASE("loading is deterministic") {
  PlantedConfig cfg;
  cfg.n = 50;
  const Dataset ds = planted_dataset(cfg);
  const std::string path = temp_file("det.csv", "");
  write_csv(path, ds);
  const Dataset a = load_csv(path, written_schema(ds)), b = load_csv(path, written_schema(ds));
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(split(a, 0.3, 1).test.X == split(b, 0.3, 1).test.X);
}
