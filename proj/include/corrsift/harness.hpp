#ifndef CORRSIFT_HARNESS_HPP
#define CORRSIFT_HARNESS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrsift/pvalue.hpp"

namespace corrsift {

enum class CapMode { min, paper_max };

struct SimConfig {
  int p = 20;
  double n_factor = 2.0;
  int reps = 2000;
  std::optional<double> threshold;  // fixed c; adaptive when unset
  double alpha = 0.05;
  std::uint64_t seed = 0;
  CapMode cap_mode = CapMode::min;
  long mc_budget = 1000;
  double integration_rel_tol = 1e-4;
  int max_subdivisions = 400;
  int threads = 1;

  int n() const { return static_cast<int>(std::lround(n_factor * p)); }
  void validate() const;
};

// Random covariance: eigenvalues uniform on [1, 10] with Haar-random
// eigenvectors, plus w * 11^T for w ~ Unif[0, 1] to raise the signal.
CovarianceMatrix generate_sigma(int p, RngStream& rng);

// Hook for experiments that need the rank-one weight too.
CovarianceMatrix generate_sigma(int p, RngStream& rng, double& w_out);

struct ThresholdChoice {
  double c = 0.0;        // final threshold after the deviation term and cap
  double c_tilde = 0.0;  // population grid value
  bool exact_two_components = true;
};

// Adaptive threshold: smallest grid value (over unique off-diagonal
// population |rho|) giving exactly two components; when none does, the
// value whose component count is closest to two from above, flagged.
// cap_mode selects min{., 1 - 1e-8} (default) or the literal max form.
ThresholdChoice population_threshold(const CovarianceMatrix& sigma, int n,
                                     CapMode cap_mode = CapMode::min);

// Population effect size 1 - |Sigma| / (|Sigma_PP| |Sigma_PcPc|).
double effect_size(const CovarianceMatrix& sigma, const IndexSet& group);

// Kolmogorov-Smirnov test against Uniform(0, 1).
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_uniform_test(std::vector<double> values);

struct Type1Record {
  int replicate = 0;
  int group_size = 0;
  int r = 0;
  double p_selective = 0.0;
  double p_classical = 0.0;
  std::string selective_method;
};

struct Type1Result {
  std::vector<Type1Record> records;
  int skipped = 0;  // replicates with no group having a nonempty complement
  KsResult ks_selective;
  KsResult ks_classical;
};

Type1Result run_type1_experiment(const SimConfig& config);

struct PowerRecord {
  int replicate = 0;
  double delta = 0.0;
  int delta_bin = 0;  // floor(delta * 10)
  bool rejected_selective = false;
  bool rejected_classical = false;
  int r = 0;
};

struct PowerBin {
  int bin = 0;
  int count = 0;
  double power_selective = 0.0;
  double power_classical = 0.0;
};

struct PowerResult {
  std::vector<PowerRecord> records;
  int skipped = 0;
  std::vector<PowerBin> bins;  // only bins with count >= min_bin_count
};

PowerResult run_power_experiment(const SimConfig& config,
                                 int min_bin_count = 100);

// n x p matrix of N(0, Sigma) rows; `chol` is the lower Cholesky factor.
Matrix sample_gaussian_rows(int n, const Matrix& chol, RngStream& rng);

}  // namespace corrsift

#endif  // CORRSIFT_HARNESS_HPP
