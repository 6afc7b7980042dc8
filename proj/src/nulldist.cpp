#include "corrsift/nulldist.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "corrsift/cca.hpp"

namespace corrsift {

double null_log_density_unnormalized(const Vector& lambdas,
                                     const NullSpec& spec) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (lambdas.size() != spec.r) {
    throw ArgumentError("lambda vector length does not match spec.r");
  }
  double prev = 1.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas(i);
    if (!(l >= 0.0) || l > prev) return kNegInf;
    prev = l;
  }
  const double power_exponent = static_cast<double>(spec.p - 2 * spec.r);
  const double beta_exponent = 0.5 * static_cast<double>(spec.n - spec.p - 2);
  double log_f = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas(i);
    if (power_exponent != 0.0) {
      if (l == 0.0) return kNegInf;
      log_f += power_exponent * std::log(l);
    }
    const double one_minus = 1.0 - l * l;
    if (beta_exponent != 0.0) {
      if (one_minus <= 0.0) {
        if (beta_exponent > 0.0) return kNegInf;
        return std::numeric_limits<double>::infinity();
      }
      log_f += beta_exponent * std::log(one_minus);
    }
  }
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    for (Eigen::Index j = i + 1; j < lambdas.size(); ++j) {
      const double gap = lambdas(i) * lambdas(i) - lambdas(j) * lambdas(j);
      if (gap <= 0.0) return kNegInf;
      log_f += std::log(gap);
    }
  }
  return log_f;
}

Matrix wishart_bartlett_factor(int dim, int df, RngStream& rng) {
  if (df < dim) {
    throw ArgumentError("Wishart degrees of freedom below dimension");
  }
  Matrix l = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    l(i, i) = rng.chi(static_cast<double>(df - i));
    for (int j = 0; j < i; ++j) l(i, j) = rng.normal();
  }
  return l;
}

Vector sample_null_canonical_correlations(const NullSpec& spec,
                                          RngStream& rng) {
  const int r = spec.r;
  const int df_w = spec.p - r;
  const int df_t = spec.n - 1 - spec.p + r;
  if (df_w < 1 || df_t < r) {
    throw ArgumentError("degrees of freedom too small for the sampler");
  }
  constexpr int kMaxRetries = 16;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const Matrix lw = wishart_bartlett_factor(r, df_w, rng);
    const Matrix lt = wishart_bartlett_factor(r, df_t, rng);
    // Eigenvalues of W T^{-1} with W = Lw Lw^T, T = Lt Lt^T equal those of
    // the symmetric matrix (Lt^{-1} Lw)(Lt^{-1} Lw)^T.
    const Matrix m =
        lt.triangularView<Eigen::Lower>().solve(lw);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m * m.transpose());
    if (es.info() != Eigen::Success) continue;
    bool ok = true;
    Vector lambdas(r);
    for (int i = 0; i < r; ++i) {
      const double psi = es.eigenvalues()(r - 1 - i);  // descending
      if (!std::isfinite(psi) || psi < 0.0) {
        ok = false;
        break;
      }
      lambdas(i) = std::sqrt(psi / (1.0 + psi));
    }
    if (!ok) continue;
    std::sort(lambdas.data(), lambdas.data() + r, std::greater<double>());
    return lambdas;
  }
  throw SingularityError("Wishart sampler failed repeatedly (singular T draws)",
                         0.0);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw ArgumentError("beta shapes must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

ClassicalPValue classical_p_value(const Vector& lambdas_hat,
                                  const NullSpec& spec, long B,
                                  RngStream& rng) {
  if (lambdas_hat.size() != spec.r) {
    throw ArgumentError("lambda vector length does not match spec.r");
  }
  ClassicalPValue out;
  if (spec.r == 1) {
    const double l2 = lambdas_hat(0) * lambdas_hat(0);
    out.p = 1.0 - beta_cdf(l2, 0.5 * (spec.p - 1), 0.5 * (spec.n - spec.p));
    out.exact = true;
    return out;
  }
  if (B < 1) throw ArgumentError("MC replicate count must be positive");
  const double observed = wilks_statistic(lambdas_hat);
  long hits = 0;
  for (long b = 0; b < B; ++b) {
    const Vector draw = sample_null_canonical_correlations(spec, rng);
    if (wilks_statistic(draw) <= observed) ++hits;
  }
  out.p = static_cast<double>(1 + hits) / static_cast<double>(1 + B);
  out.b_used = B;
  return out;
}

}  // namespace corrsift
