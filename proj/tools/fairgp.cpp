#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairgp/experiment.hpp"
#include "fairgp/validation.hpp"

using namespace fairgp;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;

struct Overrides {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  double eps = -1.0;
  std::string eps_grid;
  std::string criterion;
};

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = load_config(o.config_path);
  if (o.seed_set) {
    c.seed = o.seed;
    c.source["seed"] = o.seed;
    // Same as editing the file: generated data follows the seed unless it has its own.
    if (c.synthetic && !c.source["data"]["synthetic"].contains("seed")) c.synthetic->seed = o.seed;
  }
  if (!o.out.empty()) c.output = o.out;
  if (o.eps >= -0.5) {
    set_eps_grid(c, {o.eps});
    c.source.erase("eps");
    c.source["eps_grid"] = c.eps_grid;
  }
  if (!o.eps_grid.empty()) {
    set_eps_grid(c, parse_eps_list(o.eps_grid));
    c.source.erase("eps");
    c.source["eps_grid"] = c.eps_grid;
  }
  if (!o.criterion.empty()) {
    try {
      c.criterion = criterion_from_string(o.criterion);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    c.source["criterion"] = o.criterion;
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

Json preprocessing_json(const PreparedData& data) {
  Json encoding = Json::object();
  for (const auto& [name, levels] : data.split.train.encoding.levels) encoding[name] = levels;
  return Json{{"schema", schema_to_json(data.schema)},
              {"encoding", encoding},
              {"x_scaler", standardizer_to_json(data.split.x_scaler)},
              {"s_scaler", standardizer_to_json(data.split.s_scaler)},
              {"binary", data.split.train.binary}};
}

Json fit_json(const FitTrace& trace, const FgpModel& model) {
  return Json{{"iterations", trace.iterations},
              {"evaluations", trace.evaluations},
              {"converged", trace.converged},
              {"final_lml", trace.accepted_lml.empty() ? 0.0 : trace.accepted_lml.back()},
              {"log_lambda", vector_to_json(model.log_lambda())},
              {"log_noise", model.log_noise()}};
}

int cmd_train(const Overrides& o) {
  ExperimentConfig c = resolve(o);
  if (c.eps_grid.size() != 1)
    throw ConfigError("train needs a single eps (use --eps or the 'eps' key)");
  const PreparedData data = prepare_data(c);
  const Subspaces sub = build_subspaces(c, data.split.train);
  const EpsOutcome res = run_eps(c, sub, data.split.train, data.split.test, c.eps_grid[0]);
  fs::create_directories(c.output);

  Json dump = model_to_json(*res.model);
  dump["preprocessing"] = preprocessing_json(data);
  write_json((fs::path(c.output) / "model.json").string(), dump);

  Json report{{"record", record_to_json(res.record)},
              {"n_test", res.report.n_test},
              {"degenerate_scores", res.report.degenerate_scores},
              {"variance_clipped", res.prediction.clipped},
              {"dropped_rows", data.split.train.dropped_rows},
              {"fit", fit_json(res.trace, *res.model)},
              {"subspaces", subspace_summary(sub)},
              {"protected", data.split.train.protected_names}};
  write_json((fs::path(c.output) / "report.json").string(), report);
  if (res.prediction.clipped > 0)
    std::cerr << "note: predictive variance clipped at " << res.prediction.clipped << " points\n";
  std::cout << tradeoff_header(data.split.train.protected_names, data.split.train.binary) << "\n"
            << tradeoff_row(res.record, data.split.train.binary, c.report_timing) << "\n";
  return 0;
}

int cmd_sweep(const Overrides& o) {
  ExperimentConfig c = resolve(o);
  const auto start = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(c);
  const Subspaces sub = build_subspaces(c, data.split.train);
  const std::vector<EpsOutcome> results =
      sweep(c, sub, data.split.train, data.split.test, c.eps_grid);
  std::vector<TradeoffRecord> records;
  for (const auto& r : results) records.push_back(r.record);
  const std::string csv = tradeoff_csv(records, data.split.train.protected_names,
                                       data.split.train.binary, c.report_timing);
  fs::create_directories(c.output);
  const fs::path csv_path = fs::path(c.output) / "tradeoff.csv";
  write_text(csv_path, csv);

  Json timings{{"subspaces_s", sub.seconds},
               {"total_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                               .count()}};
  Json per_eps = Json::array();
  for (const auto& r : results)
    per_eps.push_back(Json{{"eps", r.record.eps},
                           {"fit_s", r.record.wall_time_s},
                           {"iterations", r.trace.iterations},
                           {"converged", r.trace.converged}});
  timings["per_eps"] = per_eps;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(c.source.dump())));
  Json manifest{{"config_hash", hash},
                {"config", c.source},
                {"seed", c.seed},
                {"versions", version_info()},
                {"timings", timings},
                {"subspaces", subspace_summary(sub)},
                {"n_train", data.split.train.size()},
                {"n_test", data.split.test.size()},
                {"dropped_rows", data.split.train.dropped_rows},
                {"table", csv_path.filename().string()}};
  write_json((fs::path(c.output) / "manifest.json").string(), manifest);
  std::cout << csv;
  return 0;
}

int cmd_validate(std::uint64_t seed, bool inject) {
  ValidationOptions opt;
  opt.seed = seed;
  opt.corrupt_basis = inject;
  const ValidationReport report = run_validation(opt);
  std::cout << report.to_text();
  std::cout << (report.passed() ? "all checks passed" : "validation FAILED") << "\n";
  return report.passed() ? 0 : 1;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& out) {
  const Json dump = read_json(model_path);
  const FgpModel model = model_from_json(dump);
  if (!dump.contains("preprocessing"))
    throw InvalidArgument("model dump has no preprocessing section");
  const Json& pre = dump.at("preprocessing");
  const DatasetSchema schema = schema_from_json(pre.at("schema"));
  Encoding encoding;
  for (const auto& item : pre.at("encoding").items())
    encoding.levels[item.key()] = item.value().get<std::vector<std::string>>();
  const Dataset raw = load_csv(data_path, schema, &encoding);
  const Dataset ds = apply_scalers(raw, standardizer_from_json(pre.at("x_scaler")),
                                   standardizer_from_json(pre.at("s_scaler")));
  const Prediction pred = predict(model, ds.X);
  const EvalReport report = evaluate(pred.mean, ds.y, ds.S, ds.binary);
  Json j{{"n", report.n_test},
         {"error", report.error},
         {"sp", vector_to_json(report.sp)},
         {"dropped_rows", raw.dropped_rows},
         {"degenerate_scores", report.degenerate_scores},
         {"protected", ds.protected_names}};
  if (report.eop) j["eop"] = vector_to_json(*report.eop);
  if (report.eo) j["eo"] = vector_to_json(*report.eo);
  if (!out.empty()) write_json(out, j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_generate(const PlantedConfig& cfg, const std::string& out) {
  const Dataset ds = planted_dataset(cfg);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_csv(out, ds);
  std::cout << "wrote " << ds.size() << " rows to " << out << "\n";
  return 0;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment configuration (JSON)")->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](const std::uint64_t& s) { o.seed = s; o.seed_set = true; }, "override seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--eps", o.eps, "single trade-off value in [0, 1]");
  cmd->add_option("--eps-grid", o.eps_grid, "comma-separated trade-off values");
  cmd->add_option("--criterion", o.criterion, "sp, eop or eo");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair Gaussian process experiments"};
  app.require_subcommand(1);

  Overrides train_o, sweep_o;
  CLI::App* train = app.add_subcommand("train", "fit one model and write model.json and report.json");
  add_common(train, train_o);
  CLI::App* sw = app.add_subcommand("sweep", "fit every eps in the grid and write tradeoff.csv");
  add_common(sw, sweep_o);

  std::uint64_t validate_seed = 1;
  bool inject = false;
  CLI::App* validate = app.add_subcommand("validate", "run the invariant suites");
  validate->add_option("--seed", validate_seed, "random seed");
  validate->add_flag("--inject-fault", inject, "perturb the model basis (self-test)");

  std::string model_path, data_path, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "score a model dump on a CSV file");
  eval->add_option("--model", model_path, "model.json from train")->required();
  eval->add_option("--data", data_path, "CSV file with the training schema")->required();
  eval->add_option("--out", eval_out, "write the report to this file");

  PlantedConfig planted;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "write a planted-dependence CSV");
  gen->add_option("--out", gen_out, "CSV path")->required();
  gen->add_option("--n", planted.n, "rows");
  gen->add_option("--seed", planted.seed, "random seed");
  gen->add_option("--leak", planted.leak, "weight of the S-driven feature in the target");
  gen->add_option("--noise", planted.noise, "target noise standard deviation");
  gen->add_flag("--binary", planted.binary, "binary target and protected attribute");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(train_o);
    if (sw->parsed()) return cmd_sweep(sweep_o);
    if (validate->parsed()) return cmd_validate(validate_seed, inject);
    if (eval->parsed()) return cmd_eval(model_path, data_path, eval_out);
    if (gen->parsed()) return cmd_generate(planted, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
