#ifndef CORRSIFT_PVALUE_HPP
#define CORRSIFT_PVALUE_HPP

#include <optional>
#include <string>

#include "corrsift/nulldist.hpp"
#include "corrsift/polytope.hpp"

namespace corrsift {

enum class PValueMethod {
  closed_form,
  integration,
  monte_carlo,
  classical_exact,
  classical_mc,
};

std::string to_string(PValueMethod method);

// Forces a route instead of the r-based dispatch.
enum class MethodPolicy { automatic, closed, integrate, mc };

struct PValueDiagnostics {
  long B_used = 0;
  long acceptance_count = 0;
  std::optional<std::string> fallback_reason;
  bool integration_converged = true;
};

struct PValueResult {
  double p = 1.0;
  PValueMethod method = PValueMethod::closed_form;
  PValueDiagnostics diagnostics;
};

// Selective p-value for a group produced by the thresholding selection.
// Verifies the group really is selected at threshold c, decomposes, then
// routes: r = 1 closed form; 2 <= r <= 5 polytope integration (falling back
// to Monte Carlo when the geometry degenerates or the ratio leaves [0, 1]);
// r > 5 Monte Carlo.
PValueResult selective_p_value(const CovarianceMatrix& s, int n,
                               const IndexSet& group, double c,
                               MethodPolicy policy, long B, RngStream& rng,
                               bool ordered = false,
                               double integration_rel_tol = 1e-6,
                               int max_subdivisions = 10000);

// Truncated-beta closed form for r = 1: p = (F(g_u) - F(min{g_u, l1^2})) /
// F(g_u) with F the Beta((p-1)/2, (n-p)/2) CDF.
double closed_form_selective_p(double lambda1_hat, double g_u,
                               const NullSpec& spec);

struct IntegratedP {
  double p = 0.0;
  bool converged = true;
};

// Ratio of the null density integrated over the polytope intersected with
// the low-Wilks region to the density over the whole polytope.
IntegratedP integrate_selective_p(const PolytopeH& poly,
                                  const Vector& lambdas_hat,
                                  const NullSpec& spec, double rel_tol = 1e-6,
                                  int max_subdivisions = 10000);

struct McSelectiveP {
  double p = 0.0;
  long B_used = 0;
  long acceptance_count = 0;
};

// Monte Carlo ratio estimate with raw counts. If fewer than 100 draws land
// in the polytope, B escalates by x10 up to 10^6 before giving up.
McSelectiveP mc_selective_p(const PolytopeH& poly, const Vector& lambdas_hat,
                            const NullSpec& spec, long B, RngStream& rng);

}  // namespace corrsift

#endif  // CORRSIFT_PVALUE_HPP
