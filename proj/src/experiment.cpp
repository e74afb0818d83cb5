#include "fairgp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <set>
#include <sstream>

#include "fairgp/linalg.hpp"

namespace fairgp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_keys(const Json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
}

template <typename T>
T get_as(const Json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: key '" + key + "' in " + where + " has the wrong type");
  }
}

template <typename T>
void read_opt(const Json& obj, const std::string& key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

std::optional<Index> auto_or_count(const Json& obj, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const Json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (!v.is_number_integer() || v.get<Index>() < 1)
    throw ConfigError("config: '" + key + "' must be a positive integer or \"auto\"");
  return v.get<Index>();
}

PlantedConfig parse_planted(const Json& j, std::uint64_t default_seed) {
  check_keys(j, "data.synthetic",
             {"n", "seed", "free_features", "leak", "noise", "feature_noise", "binary"});
  PlantedConfig p;
  p.seed = default_seed;
  read_opt(j, "n", "data.synthetic", p.n);
  read_opt(j, "seed", "data.synthetic", p.seed);
  read_opt(j, "free_features", "data.synthetic", p.free_features);
  read_opt(j, "leak", "data.synthetic", p.leak);
  read_opt(j, "noise", "data.synthetic", p.noise);
  read_opt(j, "feature_noise", "data.synthetic", p.feature_noise);
  read_opt(j, "binary", "data.synthetic", p.binary);
  if (p.n < 10) throw ConfigError("config: data.synthetic.n must be >= 10");
  return p;
}

FitConfig parse_fit(const Json& j) {
  check_keys(j, "fit",
             {"max_iters", "init_log_lambda", "init_log_noise", "convergence_tol", "gradient_tol",
              "initial_step", "max_backtracks", "noise_floor_ratio", "mean", "center_targets"});
  FitConfig f;
  read_opt(j, "max_iters", "fit", f.max_iters);
  read_opt(j, "init_log_lambda", "fit", f.init_log_lambda);
  if (j.contains("init_log_noise")) {
    f.init_log_noise = get_as<double>(j, "init_log_noise", "fit");
    f.init_log_noise_set = true;
  }
  read_opt(j, "convergence_tol", "fit", f.convergence_tol);
  read_opt(j, "gradient_tol", "fit", f.gradient_tol);
  read_opt(j, "initial_step", "fit", f.initial_step);
  read_opt(j, "max_backtracks", "fit", f.max_backtracks);
  read_opt(j, "noise_floor_ratio", "fit", f.noise_floor_ratio);
  read_opt(j, "center_targets", "fit", f.center_targets);
  if (j.contains("mean")) {
    const auto mean = get_as<std::string>(j, "mean", "fit");
    if (mean == "zero") f.mean = MeanFunction::Zero;
    else if (mean == "linear_pi") f.mean = MeanFunction::LinearPi;
    else throw ConfigError("config: fit.mean must be \"zero\" or \"linear_pi\"");
  }
  if (f.max_iters < 1 || f.convergence_tol <= 0.0 || f.initial_step <= 0.0 ||
      f.max_backtracks < 1 || f.noise_floor_ratio <= 0.0)
    throw ConfigError("config: fit settings out of range");
  return f;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void set_eps_grid(ExperimentConfig& config, std::vector<double> grid) {
  if (grid.empty()) throw ConfigError("config: eps grid is empty");
  for (double e : grid)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("config: eps values must lie in [0, 1]");
  std::sort(grid.begin(), grid.end());
  config.eps_grid = std::move(grid);
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("eps list: cannot parse '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("eps list: cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

ExperimentConfig parse_config(const Json& doc) {
  check_keys(doc, "config",
             {"data", "test_fraction", "kernel", "criterion", "m", "d", "threshold", "slices",
              "eta", "solver", "eps", "eps_grid", "fit", "seed", "output", "report_timing",
              "score_labels"});
  ExperimentConfig c;
  c.source = doc;
  read_opt(doc, "seed", "config", c.seed);

  if (!doc.contains("data")) throw ConfigError("config: missing 'data' section");
  const Json& data = doc.at("data");
  check_keys(data, "data", {"synthetic", "path", "schema"});
  if (data.contains("synthetic") == data.contains("path"))
    throw ConfigError("config: data needs exactly one of 'synthetic' or 'path'");
  if (data.contains("synthetic")) {
    c.synthetic = parse_planted(data.at("synthetic"), c.seed);
  } else {
    c.data_path = get_as<std::string>(data, "path", "data");
    if (!data.contains("schema")) throw ConfigError("config: data.schema is required with a path");
    try {
      c.schema = schema_from_json(data.at("schema"));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: data.schema: ") + e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: data.schema: ") + e.what());
    }
  }
  read_opt(doc, "test_fraction", "config", c.test_fraction);
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw ConfigError("config: test_fraction must lie in (0, 1)");

  if (doc.contains("kernel")) {
    const Json& k = doc.at("kernel");
    check_keys(k, "kernel", {"family", "lengthscale", "variance"});
    if (k.contains("family")) {
      try {
        c.kernel_family = kernel_family_from_string(get_as<std::string>(k, "family", "kernel"));
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    if (k.contains("lengthscale") &&
        !(k.at("lengthscale").is_string() && k.at("lengthscale").get<std::string>() == "median")) {
      c.lengthscale = get_as<double>(k, "lengthscale", "kernel");
      if (!(*c.lengthscale > 0.0)) throw ConfigError("config: kernel.lengthscale must be positive");
    }
    read_opt(k, "variance", "kernel", c.kernel_variance);
    if (!(c.kernel_variance > 0.0)) throw ConfigError("config: kernel.variance must be positive");
  }

  if (doc.contains("criterion")) {
    try {
      c.criterion = criterion_from_string(get_as<std::string>(doc, "criterion", "config"));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  c.m = auto_or_count(doc, "m");
  c.d = auto_or_count(doc, "d");
  read_opt(doc, "threshold", "config", c.threshold);
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0))
    throw ConfigError("config: threshold must lie in [0, 1]");
  read_opt(doc, "slices", "config", c.slices);
  if (c.slices < 2) throw ConfigError("config: slices must be >= 2");
  read_opt(doc, "eta", "config", c.eta);
  if (!(c.eta > 0.0)) throw ConfigError("config: eta must be positive");
  if (doc.contains("solver")) {
    const auto s = get_as<std::string>(doc, "solver", "config");
    if (s == "iterative") c.solver = SdrSolver::Iterative;
    else if (s == "dense") c.solver = SdrSolver::Dense;
    else throw ConfigError("config: solver must be \"iterative\" or \"dense\"");
  }

  if (doc.contains("eps") && doc.contains("eps_grid"))
    throw ConfigError("config: give either 'eps' or 'eps_grid', not both");
  if (doc.contains("eps")) set_eps_grid(c, {get_as<double>(doc, "eps", "config")});
  if (doc.contains("eps_grid"))
    set_eps_grid(c, get_as<std::vector<double>>(doc, "eps_grid", "config"));

  if (doc.contains("fit")) c.fit = parse_fit(doc.at("fit"));
  read_opt(doc, "output", "config", c.output);
  read_opt(doc, "report_timing", "config", c.report_timing);
  read_opt(doc, "score_labels", "config", c.score_labels);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  Json doc;
  try {
    doc = read_json(path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: cannot parse '" + path + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c = parse_config(doc);
  if (!c.data_path.empty()) {
    const std::filesystem::path p(c.data_path);
    if (p.is_relative())
      c.data_path = (std::filesystem::path(path).parent_path() / p).lexically_normal().string();
  }
  return c;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  PreparedData out;
  Dataset full;
  if (config.synthetic) {
    full = planted_dataset(*config.synthetic);
    out.schema = written_schema(full);
    out.schema.protected_columns[0].kind = full.protected_kinds[0];
  } else {
    full = load_csv(config.data_path, config.schema);
    out.schema = config.schema;
    out.from_csv = true;
  }
  out.split = split(full, config.test_fraction, config.seed);
  return out;
}

Subspaces build_subspaces(const ExperimentConfig& config, const Dataset& train) {
  const auto start = Clock::now();
  const Index n = train.size();
  Subspaces sub;
  if (config.kernel_family == KernelFamily::RBF) {
    const double l = config.lengthscale ? *config.lengthscale : median_pairwise_distance(train.X);
    if (!(l > 0.0)) throw NumericalError("pipeline: median pairwise distance is zero");
    sub.spec = KernelSpec::rbf(l, config.kernel_variance);
  } else {
    sub.spec = KernelSpec::linear(config.kernel_variance);
  }
  sub.K = gram(sub.spec, train.X);

  ProtectedSdrOptions popt;
  popt.kinds = train.protected_kinds;
  popt.sdr.eta = config.eta;
  popt.sdr.solver = config.solver;
  for (Index j = 0; j < train.S.cols(); ++j) {
    const bool categorical = j < static_cast<Index>(popt.kinds.size()) &&
                             popt.kinds[j] == AttributeKind::Categorical;
    popt.slices.push_back(categorical ? default_slice_count(train.S.col(j), true)
                                      : std::min(config.slices, n));
  }
  if (config.m) {
    popt.m = *config.m;
    sub.protected_union = protected_sdr_union(sub.K, train.y, train.S, config.criterion, popt);
  } else {
    popt.m = std::max<Index>(1, *std::max_element(popt.slices.begin(), popt.slices.end()) - 1);
    ProtectedUnion full = protected_sdr_union(sub.K, train.y, train.S, config.criterion, popt);
    Index m = 1;
    for (const SdrResult& block : full.blocks) {
      const double top = block.tau.size() ? block.tau.maxCoeff() : 0.0;
      if (top > 0.0)
        m = std::max(m, select_dimension(block.tau, block.tau.size(), config.threshold * top));
    }
    ProtectedUnion trimmed;
    trimmed.labels = full.labels;
    trimmed.W.resize(n, m * static_cast<Index>(full.blocks.size()));
    for (std::size_t b = 0; b < full.blocks.size(); ++b) {
      SdrResult block = full.blocks[b];
      block.W = block.W.leftCols(m).eval();
      block.tau = block.tau.head(m).eval();
      trimmed.W.middleCols(static_cast<Index>(b) * m, m) = block.W;
      trimmed.blocks.push_back(std::move(block));
    }
    sub.protected_union = std::move(trimmed);
    popt.m = m;
  }
  sub.m = popt.m;
  sub.fair_basis = fair_nullspace(sub.K, sub.protected_union.W);
  sub.fairness_residual = fairness_residual(sub.K, sub.protected_union.W, sub.fair_basis.Q);
  sub.k_norm = linalg::spectral_norm_sym(sub.K);
  sub.fair = orthonormalize(sub.K, sub.fair_basis.Q);

  const Index h_target = train.binary ? 2 : std::min(config.slices, n);
  const Index d_cap = std::min(std::max<Index>(1, h_target - 1), sub.fair.dim());
  SdrOptions topt;
  topt.eta = config.eta;
  topt.solver = config.solver;
  if (config.d) {
    if (*config.d > sub.fair.dim())
      throw InvalidArgument("pipeline: d = " + std::to_string(*config.d) +
                            " exceeds the fair subspace dimension " +
                            std::to_string(sub.fair.dim()));
    sub.target_sdr = sdr_subspace(sub.K, train.y, std::max(*config.d, d_cap), h_target, topt);
    sub.d = *config.d;
  } else {
    sub.target_sdr = sdr_subspace(sub.K, train.y, d_cap, h_target, topt);
    const double top = sub.target_sdr.tau.maxCoeff();
    sub.d = top > 0.0 ? select_dimension(sub.target_sdr.tau, d_cap, config.threshold * top) : 1;
  }
  sub.predictive = orthonormalize(sub.K, sub.target_sdr.W.leftCols(sub.d));
  sub.pair = principal_pair(sub.K, sub.fair, sub.predictive);
  sub.seconds = seconds_since(start);
  return sub;
}

EpsOutcome run_eps(const ExperimentConfig& config, const Subspaces& sub, const Dataset& train,
                   const Dataset& test, double eps) {
  const auto start = Clock::now();
  const ModelBasis mb = model_basis(sub.fair, sub.predictive, sub.pair, eps);
  EpsOutcome out;
  FgpModel model = fit(sub.spec, train.X, train.y, mb.E, config.fit, &out.trace);
  out.prediction = predict(model, test.X);
  out.report = evaluate(out.prediction.mean, test.y, test.S, test.binary, config.score_labels);
  TradeoffRecord& r = out.record;
  r.eps = eps;
  r.error = out.report.error;
  r.sp = out.report.sp;
  if (out.report.eop) r.eop = *out.report.eop;
  if (out.report.eo) r.eo = *out.report.eo;
  r.sigma_min = mb.sigma_min();
  const ProjectionGaps gaps = projection_gaps(r.sigma_min, eps);
  r.fair_gap = gaps.fair_gap;
  r.pred_gap = gaps.pred_gap;
  out.model = std::move(model);
  r.wall_time_s = seconds_since(start);
  return out;
}

std::vector<EpsOutcome> sweep(const ExperimentConfig& config, const Subspaces& sub,
                              const Dataset& train, const Dataset& test,
                              const std::vector<double>& grid) {
  require(!grid.empty(), "sweep: eps grid is empty");
  const auto count = static_cast<long>(grid.size());
  std::vector<EpsOutcome> out(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_eps(config, sub, train, test, grid[i]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string tradeoff_header(const std::vector<std::string>& attributes, bool binary) {
  std::string h = "eps,error";
  for (const auto& a : attributes) h += ",sp_" + a;
  if (binary) {
    for (const auto& a : attributes) h += ",eop_" + a;
    for (const auto& a : attributes) h += ",eo_" + a;
  }
  return h + ",sigma_min,fair_gap,pred_gap,wall_time_s";
}

std::string tradeoff_row(const TradeoffRecord& r, bool binary, bool report_timing) {
  std::string row = format_double(r.eps) + "," + format_double(r.error);
  for (Index j = 0; j < r.sp.size(); ++j) row += "," + format_double(r.sp(j));
  if (binary) {
    for (Index j = 0; j < r.eop.size(); ++j) row += "," + format_double(r.eop(j));
    for (Index j = 0; j < r.eo.size(); ++j) row += "," + format_double(r.eo(j));
  }
  row += "," + format_double(r.sigma_min) + "," + format_double(r.fair_gap) + "," +
         format_double(r.pred_gap) + "," + format_double(report_timing ? r.wall_time_s : 0.0);
  return row;
}

std::string tradeoff_csv(const std::vector<TradeoffRecord>& records,
                         const std::vector<std::string>& attributes, bool binary,
                         bool report_timing) {
  std::string out = tradeoff_header(attributes, binary) + "\n";
  for (const auto& r : records) out += tradeoff_row(r, binary, report_timing) + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Json record_to_json(const TradeoffRecord& r) {
  Json j{{"eps", r.eps},
         {"error", r.error},
         {"sp", vector_to_json(r.sp)},
         {"sigma_min", r.sigma_min},
         {"fair_gap", r.fair_gap},
         {"pred_gap", r.pred_gap},
         {"wall_time_s", r.wall_time_s}};
  if (r.eop.size()) j["eop"] = vector_to_json(r.eop);
  if (r.eo.size()) j["eo"] = vector_to_json(r.eo);
  return j;
}

Json subspace_summary(const Subspaces& sub) {
  return Json{{"kernel", kernel_to_json(sub.spec)},
              {"n_train", sub.K.rows()},
              {"m", sub.m},
              {"d", sub.d},
              {"protected_columns", sub.protected_union.W.cols()},
              {"constraint_rank", sub.fair_basis.constraint_rank},
              {"fair_dim", sub.fair.dim()},
              {"predictive_dim", sub.predictive.dim()},
              {"principal_cosines", vector_to_json(sub.pair.sigma)},
              {"fairness_residual", sub.fairness_residual},
              {"fairness_residual_bound", 1e-8 * sub.k_norm * sub.k_norm},
              {"target_tau", vector_to_json(sub.target_sdr.tau)}};
}

Json version_info() {
  std::string compiler = "unknown";
#ifdef __VERSION__
  compiler = __VERSION__;
#endif
  return Json{{"fairgp", FAIRGP_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", compiler},
#ifdef _OPENMP
              {"openmp", _OPENMP}
#else
              {"openmp", 0}
#endif
  };
}

}  // namespace fairgp
