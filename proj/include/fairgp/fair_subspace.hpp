#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairgp/common.hpp"
#include "fairgp/sdr.hpp"

namespace fairgp {

enum class FairnessCriterion { StatisticalParity, EqualityOfOpportunity, EqualizedOdds };

std::string to_string(FairnessCriterion criterion);
FairnessCriterion criterion_from_string(const std::string& name);

enum class AttributeKind { Categorical, Continuous };

struct ProtectedSdrOptions {
  Index m = 1;                        // directions per attribute (per class for EOP/EO)
  std::vector<AttributeKind> kinds;   // one per column of S; empty = all continuous
  std::vector<Index> slices;          // explicit slice counts; empty = defaults
  SdrOptions sdr;
};

/// Concatenated protected-attribute SDR bases, n x (blocks * m).
struct ProtectedUnion {
  Matrix W;
  std::vector<SdrResult> blocks;      // attribute order, Y=1 block before Y=0
  std::vector<std::string> labels;    // e.g. "s0", "s0|y=1"
};

/// Builds W for the chosen criterion:
///   SP  - one block per protected column on the full sample;
///   EOP - per column, SDR on the Y=1 principal submatrix, zero-padded to n rows;
///   EO  - both the Y=1 and the Y=0 blocks per column.
ProtectedUnion protected_sdr_union(const Matrix& K, const Vector& y, const Matrix& S,
                                   FairnessCriterion criterion,
                                   const ProtectedSdrOptions& options);

/// Basis of the fair subspace F = span{phi Q_j}.
struct FairBasis {
  Matrix Q;  // n x r, Euclidean-orthonormal columns
  Matrix W;  // protected union used to build it
  Index r = 0;
  Index constraint_rank = 0;  // rank of K~ W
};

/// Q spans the orthogonal complement of range(K~ W) with K~ = K'^T K' and
/// K' the column-centered K, so W^T K Gamma_n K Q = 0. Throws NumericalError
/// when the constraints exhaust R^n.
FairBasis fair_nullspace(const Matrix& K, const Matrix& W);

/// max |W^T K Gamma_n K Q|.
double fairness_residual(const Matrix& K, const Matrix& W, const Matrix& Q);

// Synthetic check of the linear fairness construction: X ~ N(0, Sigma),
// S = sign(x_1) + noise (or independent of X), C spans null((Sigma B)^T).
struct Prop1Config {
  Index n = 10000;
  Index p = 5;
  std::uint64_t seed = 1;
  bool dependent = true;       // false: B = 0 and S independent of X
  double correlation = 0.0;    // AR(1) correlation of Sigma; 0 gives identity
  double noise = 0.5;
};

struct Prop1Report {
  double sample_cov_norm = 0.0;  // max_j |sample Cov(c_j^T X, S)|
  double bound = 0.0;            // 3 sigma_hat / sqrt(n)
  double sigma_hat = 0.0;
  Index n = 0;
  bool passed() const { return sample_cov_norm <= bound; }
};

Prop1Report verify_prop1_synthetic(const Prop1Config& config);

struct RateReport {
  std::vector<Index> sizes;
  std::vector<double> mean_cov_norm;
  double slope = 0.0;  // least-squares slope of log(mean_cov_norm) on log(n)
};

/// Averages sample_cov_norm over `replicates` seeds per size and fits the
/// log-log slope.
RateReport prop1_rate(const std::vector<Index>& sizes, int replicates, std::uint64_t seed,
                      const Prop1Config& base = {});

}  // namespace fairgp
