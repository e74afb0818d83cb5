#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgp/data.hpp"
#include "fairgp/fair_subspace.hpp"
#include "fairgp/fgp.hpp"
#include "fairgp/kernel.hpp"
#include "fairgp/metrics.hpp"
#include "fairgp/model_subspace.hpp"
#include "fairgp/sdr.hpp"
#include "fairgp/serialize.hpp"
#include "fairgp/synthetic.hpp"

namespace fairgp {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct ExperimentConfig {
  // Data: either a CSV file with a schema or a generated planted scenario.
  std::optional<PlantedConfig> synthetic;
  std::string data_path;
  DatasetSchema schema;
  double test_fraction = 0.3;

  KernelFamily kernel_family = KernelFamily::RBF;
  std::optional<double> lengthscale;  // empty: median pairwise distance
  double kernel_variance = 1.0;

  FairnessCriterion criterion = FairnessCriterion::StatisticalParity;
  std::optional<Index> m;  // empty: chosen from tau with `threshold`
  std::optional<Index> d;
  double threshold = 0.01;  // relative to the largest tau
  Index slices = 10;        // target slices and default for continuous attributes
  double eta = 1e-4;
  SdrSolver solver = SdrSolver::Iterative;

  std::vector<double> eps_grid{1.0};
  FitConfig fit;
  std::uint64_t seed = 1;
  std::string output = "out";
  bool report_timing = false;  // false writes 0 in wall_time_s for byte-stable tables
  bool score_labels = false;

  Json source;  // parsed document, used for the run hash
};

/// Parses a configuration document; throws ConfigError with a message naming
/// the offending key.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);

/// Applies --eps / --eps-grid style overrides; values must lie in [0, 1].
void set_eps_grid(ExperimentConfig& config, std::vector<double> grid);
std::vector<double> parse_eps_list(const std::string& text);

struct PreparedData {
  SplitResult split;
  DatasetSchema schema;  // schema that reproduces the encoding on new files
  bool from_csv = false;
};

PreparedData prepare_data(const ExperimentConfig& config);

/// Every eps-independent quantity of the pipeline.
struct Subspaces {
  KernelSpec spec = KernelSpec::linear();
  Matrix K;
  ProtectedUnion protected_union;
  FairBasis fair_basis;
  SdrResult target_sdr;
  OrthonormalBasis fair;        // F
  OrthonormalBasis predictive;  // G
  PrincipalPair pair;
  Index m = 0;
  Index d = 0;
  double fairness_residual = 0.0;  // max |W^T K Gamma K Q|
  double k_norm = 0.0;             // ||K||_2
  double seconds = 0.0;
};

Subspaces build_subspaces(const ExperimentConfig& config, const Dataset& train);

struct TradeoffRecord {
  double eps = 0.0;
  double error = 0.0;
  Vector sp;
  Vector eop;  // empty for continuous targets
  Vector eo;
  double sigma_min = 0.0;
  double fair_gap = 0.0;
  double pred_gap = 0.0;
  double wall_time_s = 0.0;
};

struct EpsOutcome {
  TradeoffRecord record;
  EvalReport report;
  FitTrace trace;
  Prediction prediction;
  std::optional<FgpModel> model;
};

EpsOutcome run_eps(const ExperimentConfig& config, const Subspaces& sub, const Dataset& train,
                   const Dataset& test, double eps);

/// One outcome per eps in grid order. Values are fitted in parallel.
std::vector<EpsOutcome> sweep(const ExperimentConfig& config, const Subspaces& sub,
                              const Dataset& train, const Dataset& test,
                              const std::vector<double>& grid);

std::string tradeoff_header(const std::vector<std::string>& attributes, bool binary);
std::string tradeoff_row(const TradeoffRecord& record, bool binary, bool report_timing);
std::string tradeoff_csv(const std::vector<TradeoffRecord>& records,
                         const std::vector<std::string>& attributes, bool binary,
                         bool report_timing);

std::uint64_t fnv1a(const std::string& text);

Json record_to_json(const TradeoffRecord& record);
Json subspace_summary(const Subspaces& sub);
Json version_info();

}  // namespace fairgp
