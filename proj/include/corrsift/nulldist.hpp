#ifndef CORRSIFT_NULLDIST_HPP
#define CORRSIFT_NULLDIST_HPP

#include <string>

#include "corrsift/linalg.hpp"
#include "corrsift/rng.hpp"

namespace corrsift {

// Parameters the null distribution of the canonical correlations depends on.
struct NullSpec {
  int n = 0;  // sample size
  int p = 0;  // total variables
  int r = 0;  // min-block size

  NullSpec(int n, int p, int r) : n(n), p(p), r(r) {
    if (n <= p) throw ArgumentError("null distribution requires n > p");
    if (r < 1 || 2 * r > p) throw ArgumentError("need 1 <= r <= p/2");
  }
};

// Log of the unnormalized joint density of the sorted canonical
// correlations: sum_i [(p-2r) log lambda_i + ((n-p-2)/2) log(1-lambda_i^2)]
// + sum_{i<j} log(lambda_i^2 - lambda_j^2). Returns -infinity outside the
// support {1 >= lambda_1 >= ... >= lambda_r >= 0}. The multivariate gamma
// normalization constant is deliberately never computed; every use in this
// library is a ratio over the same (n, p, r).
double null_log_density_unnormalized(const Vector& lambdas,
                                     const NullSpec& spec);

// One draw of the r sorted canonical correlations under the null:
// W ~ Wishart_r(I, p-r) and T ~ Wishart_r(I, n-1-p+r) via Bartlett
// decomposition, then lambda_i = sqrt(psi_i / (1 + psi_i)) for the
// eigenvalues psi of W T^{-1}, solved as a symmetric-definite problem.
Vector sample_null_canonical_correlations(const NullSpec& spec,
                                          RngStream& rng);

// Lower-triangular Bartlett factor of a Wishart_r(I, df) draw (the Wishart
// matrix is L L^T). Exposed for the sampler's moment tests.
Matrix wishart_bartlett_factor(int dim, int df, RngStream& rng);

// Regularized incomplete beta I_x(a, b), absolute accuracy ~1e-12; x is
// clamped to [0, 1].
double beta_cdf(double x, double a, double b);

struct ClassicalPValue {
  double p = 1.0;
  bool exact = false;  // true for the r = 1 beta closed form
  long b_used = 0;     // MC replicates consumed (0 when exact)
};

// Classical LRT p-value for the Wilks statistic of the observed lambdas.
// r = 1 is exact via the beta CDF; r > 1 uses B Monte Carlo draws with
// add-one smoothing (1 + hits) / (1 + B).
ClassicalPValue classical_p_value(const Vector& lambdas_hat,
                                  const NullSpec& spec, long B,
                                  RngStream& rng);

}  // namespace corrsift

#endif  // CORRSIFT_NULLDIST_HPP
