#include "corrsift/pvalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "corrsift/selection.hpp"

namespace corrsift {

std::string to_string(PValueMethod method) {
  switch (method) {
    case PValueMethod::closed_form:
      return "closed_form";
    case PValueMethod::integration:
      return "integration";
    case PValueMethod::monte_carlo:
      return "monte_carlo";
    case PValueMethod::classical_exact:
      return "classical_exact";
    case PValueMethod::classical_mc:
      return "classical_mc";
  }
  return "unknown";
}

double closed_form_selective_p(double lambda1_hat, double g_u,
                               const NullSpec& spec) {
  if (spec.r != 1) throw ArgumentError("closed form requires r = 1");
  if (!(g_u > 0.0)) {
    throw DegenerateTruncationError(
        "truncation point g_u is zero; conditioning set has measure zero");
  }
  const double a = 0.5 * (spec.p - 1);
  const double b = 0.5 * (spec.n - spec.p);
  const double l2 = lambda1_hat * lambda1_hat;
  const double f_gu = beta_cdf(g_u, a, b);
  const double f_lo = beta_cdf(std::min(g_u, l2), a, b);
  if (!(f_gu > 0.0)) {
    throw DegenerateTruncationError(
        "beta mass of the conditioning set underflowed to zero");
  }
  return std::clamp((f_gu - f_lo) / f_gu, 0.0, 1.0);
}

IntegratedP integrate_selective_p(const PolytopeH& poly,
                                  const Vector& lambdas_hat,
                                  const NullSpec& spec, double rel_tol,
                                  int max_subdivisions) {
  if (poly.r < 2 || poly.r > 5) {
    throw ArgumentError("polytope integration is used for 2 <= r <= 5");
  }
  const auto vertices = enumerate_vertices(poly);
  const auto simplices = triangulate(vertices);

  // Shift the log density so exponentials stay in range; the shift cancels
  // in the ratio.
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& simplex : simplices) {
    Vector bary = Vector::Constant(poly.r + 1, 1.0 / (poly.r + 1));
    const double v =
        null_log_density_unnormalized(simplex.point(bary), spec);
    if (std::isfinite(v)) shift = std::max(shift, v);
  }
  if (!std::isfinite(shift)) shift = 0.0;

  const double observed = wilks_statistic(lambdas_hat);
  auto density = [&](const Vector& lambda) {
    const double lf = null_log_density_unnormalized(lambda, spec);
    return std::isfinite(lf) ? std::exp(lf - shift) : 0.0;
  };
  auto wilks_at = [](const Vector& lambda) {
    double stat = 1.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      stat *= 1.0 - lambda(i) * lambda(i);
    }
    return stat;
  };
  auto density_low_wilks = [&](const Vector& lambda) {
    if (wilks_at(lambda) > observed) return 0.0;
    return density(lambda);
  };

  // The indicator 1{Wilks <= observed} is invisible to the embedded
  // quadrature pair when its boundary band misses every node, so split the
  // simplices along that boundary first. The high-Wilks set is convex
  // (sum of log(1 - lambda_i^2) is concave), so a simplex whose vertices are
  // all strictly high lies entirely in the high region and contributes
  // nothing to the numerator.
  std::vector<Simplex> low_parts;
  constexpr int kSplitDepth = 12;
  const std::size_t max_parts =
      256 + 8 * static_cast<std::size_t>(max_subdivisions);
  std::vector<std::pair<Simplex, int>> work;
  for (const auto& simplex : simplices) work.push_back({simplex, 0});
  while (!work.empty()) {
    auto [part, depth] = std::move(work.back());
    work.pop_back();
    double stat_min = std::numeric_limits<double>::infinity();
    double stat_max = -stat_min;
    for (Eigen::Index v = 0; v < part.vertices.rows(); ++v) {
      const double stat = wilks_at(part.vertices.row(v).transpose());
      stat_min = std::min(stat_min, stat);
      stat_max = std::max(stat_max, stat);
    }
    if (stat_min > observed) continue;  // certified all-high: contributes 0
    if (stat_max <= observed || depth >= kSplitDepth ||
        low_parts.size() + work.size() >= max_parts) {
      low_parts.push_back(std::move(part));
      continue;
    }
    // Straddles the boundary: bisect the longest edge.
    Eigen::Index a = 0, b = 1;
    double best = -1.0;
    for (Eigen::Index i = 0; i < part.vertices.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < part.vertices.rows(); ++j) {
        const double len =
            (part.vertices.row(i) - part.vertices.row(j)).squaredNorm();
        if (len > best) {
          best = len;
          a = i;
          b = j;
        }
      }
    }
    const Eigen::RowVectorXd mid =
        0.5 * (part.vertices.row(a) + part.vertices.row(b));
    Simplex left = part, right = part;
    left.vertices.row(b) = mid;
    right.vertices.row(a) = mid;
    work.push_back({std::move(left), depth + 1});
    work.push_back({std::move(right), depth + 1});
  }

  double numerator = 0.0, denominator = 0.0;
  bool converged = true;
  for (const auto& simplex : simplices) {
    const auto den =
        integrate_simplex(density, simplex, rel_tol, max_subdivisions);
    denominator += den.value;
    converged = converged && den.converged;
  }
  for (const auto& part : low_parts) {
    const auto num = integrate_simplex(density_low_wilks, part, rel_tol,
                                       max_subdivisions);
    numerator += num.value;
    converged = converged && num.converged;
  }
  if (!(denominator > 0.0) || !std::isfinite(denominator) ||
      !std::isfinite(numerator)) {
    return {std::numeric_limits<double>::quiet_NaN(), false};
  }
  return {numerator / denominator, converged};
}

McSelectiveP mc_selective_p(const PolytopeH& poly, const Vector& lambdas_hat,
                            const NullSpec& spec, long B, RngStream& rng) {
  if (B < 1) throw ArgumentError("MC replicate count must be positive");
  constexpr long kMinAcceptance = 100;
  constexpr long kBMax = 1000000;

  const double observed = wilks_statistic(lambdas_hat);
  long target = B;
  long drawn = 0;
  long accepted = 0;
  long hits = 0;
  for (;;) {
    for (; drawn < target; ++drawn) {
      const Vector draw = sample_null_canonical_correlations(spec, rng);
      if (!poly.contains(draw)) continue;
      ++accepted;
      if (wilks_statistic(draw) <= observed) ++hits;
    }
    if (accepted >= kMinAcceptance) break;
    if (target >= kBMax) {
      throw InsufficientAcceptanceError(
          "polytope acceptance stayed below " +
              std::to_string(kMinAcceptance) + " after " +
              std::to_string(target) + " draws",
          static_cast<double>(accepted) / static_cast<double>(drawn));
    }
    target = std::min(kBMax, target * 10);
  }
  McSelectiveP out;
  out.p = static_cast<double>(hits) / static_cast<double>(accepted);
  out.B_used = drawn;
  out.acceptance_count = accepted;
  return out;
}

PValueResult selective_p_value(const CovarianceMatrix& s, int n,
                               const IndexSet& group, double c,
                               MethodPolicy policy, long B, RngStream& rng,
                               bool ordered, double integration_rel_tol,
                               int max_subdivisions) {
  const Partition selection = select_components(s, c, ordered);
  if (!selection.contains(group)) {
    throw SelectionMismatchError(
        "group is not among the components selected at this threshold");
  }
  const CcaDecomposition cca = cca_decompose(s, group);
  const NullSpec spec(n, s.p(), cca.r());

  PValueResult result;
  const int r = cca.r();

  const bool force_closed = policy == MethodPolicy::closed;
  const bool force_integrate = policy == MethodPolicy::integrate;
  const bool force_mc = policy == MethodPolicy::mc;
  if (force_closed && r != 1) {
    throw ArgumentError("closed-form route requires r = 1");
  }
  if (force_integrate && (r < 2 || r > 5)) {
    throw ArgumentError("integration route requires 2 <= r <= 5");
  }

  if (r == 1 && !force_mc) {
    result.p = closed_form_selective_p(cca.lambdas(0), g_u(s, cca, c), spec);
    result.method = PValueMethod::closed_form;
    return result;
  }

  const PolytopeH poly = build_constraints(s, cca, c);

  if (!force_mc && r >= 2 && r <= 5) {
    std::optional<std::string> fallback;
    try {
      const IntegratedP integrated = integrate_selective_p(
          poly, cca.lambdas, spec, integration_rel_tol, max_subdivisions);
      if (std::isfinite(integrated.p) && integrated.p >= 0.0 &&
          integrated.p <= 1.0) {
        result.p = integrated.p;
        result.method = PValueMethod::integration;
        result.diagnostics.integration_converged = integrated.converged;
        return result;
      }
      fallback = "integration estimate outside [0, 1]";
    } catch (const DegenerateGeometryError& e) {
      fallback = std::string("degenerate geometry: ") + e.what();
    } catch (const EmptyFeasibleRegionError& e) {
      fallback = std::string("empty feasible region: ") + e.what();
    }
    if (force_integrate) {
      throw ArgumentError("forced integration route failed: " + *fallback);
    }
    result.diagnostics.fallback_reason = fallback;
  }

  const McSelectiveP mc = mc_selective_p(poly, cca.lambdas, spec, B, rng);
  result.p = mc.p;
  result.method = PValueMethod::monte_carlo;
  result.diagnostics.B_used = mc.B_used;
  result.diagnostics.acceptance_count = mc.acceptance_count;
  return result;
}

}  // namespace corrsift
