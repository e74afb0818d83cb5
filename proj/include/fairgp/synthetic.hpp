#pragma once

#include <cstdint>

#include "fairgp/data.hpp"

namespace fairgp {

/// Planted-dependence scenario. S drives x1 (linearly) and x2 (through S^2);
/// x3.. are independent of S. The target is
///   f = sin(x3) + 0.5 x4 + leak * x1,
/// observed with Gaussian noise (continuous) or thresholded at its median
/// after adding noise (binary). Binary scenarios use a binary S.
struct PlantedConfig {
  Index n = 2000;
  std::uint64_t seed = 7;
  Index free_features = 3;  // x3, x4, ... (at least 2)
  double leak = 0.45;       // weight of the S-driven feature in the target
  double noise = 0.5;       // target noise standard deviation
  double feature_noise = 0.25;
  bool binary = false;
};

/// Unstandardized dataset with features x1.., protected column "s" and target "y".
Dataset planted_dataset(const PlantedConfig& config);

}  // namespace fairgp
