#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "corrsift/cca.hpp"
#include "corrsift/rng.hpp"
#include "corrsift/selection.hpp"

using namespace corrsift;

namespace {

CovarianceMatrix random_spd_cov(int p, RngStream& rng) {
  Matrix a(p + 4, p);
  for (int i = 0; i < p + 4; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  }
  Matrix s = a.transpose() * a / static_cast<double>(p + 4);
  s += 0.2 * Matrix::Identity(p, p);
  s = 0.5 * (s + s.transpose().eval());
  return CovarianceMatrix(std::move(s));
}

// Independent oracle: explicitly form the whitened cross block with
// eigendecomposition-based inverse square roots and take Eigen's SVD of it
// directly, without the library's orientation logic.
Vector oracle_singular_values(const CovarianceMatrix& s,
                              const IndexSet& group) {
  const IndexSet comp = group_complement(group, s.p());
  const Matrix spp = submatrix(s.matrix(), group, group);
  const Matrix scc = submatrix(s.matrix(), comp, comp);
  const Matrix cross = submatrix(s.matrix(), group, comp);
  auto inv_sqrt = [](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return Matrix(es.eigenvectors() *
                  es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                  es.eigenvectors().transpose());
  };
  const Matrix w = inv_sqrt(spp) * cross * inv_sqrt(scc);
  Eigen::JacobiSVD<Matrix> svd(w);
  const int r = std::min<int>(group.size(), comp.size());
  return svd.singularValues().head(r);
}

}  // namespace

TEST_CASE("identity covariance has all-zero canonical correlations") {
  const CovarianceMatrix s(Matrix::Identity(5, 5));
  const CcaDecomposition cca = cca_decompose(s, {0, 1});
  REQUIRE(cca.r() == 2);
  CHECK(cca.lambdas.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(wilks_statistic(cca.lambdas) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("2x2 correlation rho gives lambda_1 = |rho|") {
  Matrix s(2, 2);
  s << 1.0, -0.6, -0.6, 1.0;
  const CcaDecomposition cca = cca_decompose(CovarianceMatrix(s), {0});
  REQUIRE(cca.r() == 1);
  CHECK(cca.lambdas(0) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("lambdas match an independent Jacobi SVD of the whitened block") {
  RngStream rng(17, 0);
  const CovarianceMatrix s = random_spd_cov(6, rng);
  const IndexSet group{0, 1, 2};
  const CcaDecomposition cca = cca_decompose(s, group);
  const Vector oracle = oracle_singular_values(s, group);
  REQUIRE(cca.lambdas.size() == oracle.size());
  CHECK((cca.lambdas - oracle).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("decomposition contract: sorting, range, orthonormality") {
  RngStream rng(23, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 5 + static_cast<int>(rng.uniform() * 4);
    const CovarianceMatrix s = random_spd_cov(p, rng);
    const int card = 1 + static_cast<int>(rng.uniform() * (p - 1));
    IndexSet group;
    for (int i = 0; i < card; ++i) group.push_back(i);
    const CcaDecomposition cca = cca_decompose(s, group);
    CHECK(cca.r() == std::min<int>(card, p - card));
    for (int i = 0; i < cca.r(); ++i) {
      CHECK(cca.lambdas(i) >= 0.0);
      CHECK(cca.lambdas(i) <= 1.0);
      if (i) CHECK(cca.lambdas(i) <= cca.lambdas(i - 1) + 1e-14);
    }
    const Matrix ata = cca.A_hat.transpose() * cca.A_hat;
    const Matrix gtg = cca.Gamma_hat.transpose() * cca.Gamma_hat;
    CHECK((ata - Matrix::Identity(cca.r(), cca.r())).norm() < 1e-9);
    CHECK((gtg - Matrix::Identity(cca.r(), cca.r())).norm() < 1e-9);
  }
}

TEST_CASE("reconstruction of the observed cross block") {
  RngStream rng(29, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const CovarianceMatrix s = random_spd_cov(7, rng);
    const IndexSet group{0, 2, 5};
    const CcaDecomposition cca = cca_decompose(s, group);
    const IndexSet comp = group_complement(group, 7);
    const Matrix cross = submatrix(s.matrix(), group, comp);
    const Matrix rebuilt = cca.sqrt_S_PP * cca.group_factor() *
                           cca.lambdas.asDiagonal() *
                           cca.complement_factor().transpose() *
                           cca.sqrt_S_PcPc;
    CHECK((rebuilt - cross).norm() / std::max(1.0, cross.norm()) < 1e-8);
  }
}

TEST_CASE("statistic is orientation-free: group vs complement") {
  RngStream rng(41, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const CovarianceMatrix s = random_spd_cov(6, rng);
    const IndexSet group{1, 3};
    const IndexSet comp = group_complement(group, 6);
    const double a = wilks_statistic(cca_decompose(s, group).lambdas);
    const double b = wilks_statistic(cca_decompose(s, comp).lambdas);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
}

TEST_CASE("Wilks statistic equals the determinant ratio") {
  RngStream rng(47, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 4 + static_cast<int>(rng.uniform() * 7);  // p <= 10
    const CovarianceMatrix s = random_spd_cov(p, rng);
    const int card = 1 + static_cast<int>(rng.uniform() * (p - 1));
    IndexSet group;
    for (int i = 0; i < card; ++i) group.push_back(i);
    const IndexSet comp = group_complement(group, p);
    const double stat = wilks_statistic(cca_decompose(s, group).lambdas);
    const double det_ratio = std::exp(
        log_determinant(s.matrix()) -
        log_determinant(submatrix(s.matrix(), group, group)) -
        log_determinant(submatrix(s.matrix(), comp, comp)));
    CHECK(stat == doctest::Approx(det_ratio).epsilon(1e-8));
  }
}

TEST_CASE("wilks_statistic basics and domain") {
  Vector two(2);
  two << 0.0, 0.0;
  CHECK(wilks_statistic(two) == 1.0);
  two << 1.0, 0.3;
  CHECK(wilks_statistic(two) == doctest::Approx(0.0).epsilon(1e-15));
  two << 0.6, 0.3;
  CHECK(wilks_statistic(two) == doctest::Approx(0.5824).epsilon(1e-12));
  two << 1.2, 0.3;
  CHECK_THROWS_AS(wilks_statistic(two), ArgumentError);
}

TEST_CASE("cca rejects empty and full groups") {
  RngStream rng(3, 0);
  const CovarianceMatrix s = random_spd_cov(4, rng);
  CHECK_THROWS_AS(cca_decompose(s, {}), ArgumentError);
  CHECK_THROWS_AS(cca_decompose(s, {0, 1, 2, 3}), ArgumentError);
}

TEST_CASE("cca rejects a singular within-group block") {
  Matrix s = Matrix::Identity(4, 4);
  s(0, 1) = s(1, 0) = 1.0;  // block {0,1} singular
  CHECK_THROWS_AS(cca_decompose(CovarianceMatrix(s), {0, 1}),
                  SingularityError);
}

TEST_CASE("perturbed covariance with observed lambdas returns S") {
  RngStream rng(59, 0);
  const CovarianceMatrix s = random_spd_cov(6, rng);
  const IndexSet group{0, 1};
  const CcaDecomposition cca = cca_decompose(s, group);
  const CovarianceMatrix back = perturbed_covariance(s, cca, cca.lambdas);
  CHECK((back.matrix() - s.matrix()).norm() / s.matrix().norm() < 1e-8);
}

TEST_CASE("perturbed covariance with zero lambdas zeroes the cross block") {
  RngStream rng(61, 0);
  const CovarianceMatrix s = random_spd_cov(5, rng);
  const IndexSet group{1, 4};
  const CcaDecomposition cca = cca_decompose(s, group);
  const CovarianceMatrix out =
      perturbed_covariance(s, cca, Vector::Zero(cca.r()));
  const IndexSet comp = group_complement(group, 5);
  CHECK(submatrix(out.matrix(), group, comp).lpNorm<Eigen::Infinity>() <
        1e-14);
  // Within-group blocks untouched.
  CHECK((submatrix(out.matrix(), group, group) -
         submatrix(s.matrix(), group, group))
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((submatrix(out.matrix(), comp, comp) -
         submatrix(s.matrix(), comp, comp))
            .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("round trip: decomposing the perturbed covariance recovers lambda") {
  RngStream rng(67, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const CovarianceMatrix s = random_spd_cov(7, rng);
    const IndexSet group{0, 3, 6};
    const CcaDecomposition cca = cca_decompose(s, group);
    Vector target(cca.r());
    for (int i = 0; i < cca.r(); ++i) target(i) = rng.uniform(0.0, 0.7);
    std::sort(target.data(), target.data() + target.size(),
              std::greater<double>());
    const CovarianceMatrix pert = perturbed_covariance(s, cca, target);
    const Vector recovered = cca_decompose(pert, group).lambdas;
    CHECK((recovered - target).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("perturbed covariance rejects a length mismatch") {
  RngStream rng(71, 0);
  const CovarianceMatrix s = random_spd_cov(5, rng);
  const CcaDecomposition cca = cca_decompose(s, {0, 1});
  CHECK_THROWS_AS(perturbed_covariance(s, cca, Vector::Zero(3)),
                  ArgumentError);
}

TEST_CASE("correlation cross block of the perturbation is linear in lambda") {
  RngStream rng(73, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 5 + static_cast<int>(rng.uniform() * 4);
    const CovarianceMatrix s = random_spd_cov(p, rng);
    const int card = 1 + static_cast<int>(rng.uniform() * (p - 1));
    IndexSet group;
    for (int i = 0; i < card; ++i) group.push_back(i);
    const IndexSet comp = group_complement(group, p);
    const CcaDecomposition cca = cca_decompose(s, group);
    const int r = cca.r();

    auto cross_corr = [&](const Vector& lambda) {
      const Matrix sp = perturbed_covariance(s, cca, lambda).matrix();
      Matrix out(card, p - card);
      for (int i = 0; i < card; ++i) {
        for (int j = 0; j < static_cast<int>(comp.size()); ++j) {
          out(i, j) = sp(group[i], comp[j]) /
                      std::sqrt(sp(group[i], group[i]) *
                                sp(comp[j], comp[j]));
        }
      }
      return out;
    };

    // Unsorted lambdas on purpose: linearity is a formula-level identity
    // with no ordering restriction. Coefficients are kept nonnegative with
    // a + b <= 1 so every combination stays inside the [0, 1] domain.
    Vector l1(r), l2(r);
    for (int i = 0; i < r; ++i) {
      l1(i) = rng.uniform(0.0, 1.0);
      l2(i) = rng.uniform(0.0, 1.0);
    }
    const double a = rng.uniform(0.0, 0.6);
    const double b = rng.uniform(0.0, 1.0 - a);
    const Matrix lhs = cross_corr(a * l1 + b * l2);
    const Matrix rhs = a * cross_corr(l1) + b * cross_corr(l2);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}
