#include "fairgp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fairgp {

Dataset planted_dataset(const PlantedConfig& config) {
  require(config.n >= 4, "planted_dataset: need n >= 4");
  require(config.free_features >= 2, "planted_dataset: need at least two S-free features");
  require(config.noise >= 0.0 && config.feature_noise >= 0.0,
          "planted_dataset: noise levels must be non-negative");
  const Index n = config.n;
  const Index p = 2 + config.free_features;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  Dataset ds;
  ds.X.resize(n, p);
  ds.S_raw.resize(n, 1);
  ds.y.resize(n);
  Vector f(n);
  for (Index i = 0; i < n; ++i) {
    const double s = config.binary ? (coin(rng) ? 1.0 : 0.0) : normal(rng);
    const double centered = config.binary ? 2.0 * s - 1.0 : s;
    ds.S_raw(i, 0) = s;
    ds.X(i, 0) = centered + config.feature_noise * normal(rng);
    ds.X(i, 1) = centered * centered - 1.0 + config.feature_noise * normal(rng) +
                 (config.binary ? 0.5 * centered : 0.0);
    for (Index j = 2; j < p; ++j) ds.X(i, j) = normal(rng);
    f(i) = std::sin(ds.X(i, 2)) + 0.5 * ds.X(i, 3) + config.leak * ds.X(i, 0);
  }
  for (Index i = 0; i < n; ++i) ds.y(i) = f(i) + config.noise * normal(rng);
  if (config.binary) {
    std::vector<double> sorted(ds.y.data(), ds.y.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double median = sorted[static_cast<std::size_t>(n / 2)];
    for (Index i = 0; i < n; ++i) ds.y(i) = ds.y(i) > median ? 1.0 : 0.0;
  }
  ds.S = ds.S_raw;
  for (Index j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  ds.protected_names = {"s"};
  ds.protected_kinds = {config.binary ? AttributeKind::Categorical : AttributeKind::Continuous};
  ds.target_name = "y";
  ds.binary = config.binary;
  return ds;
}

}  // namespace fairgp
