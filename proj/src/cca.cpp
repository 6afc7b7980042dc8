#include "corrsift/cca.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "corrsift/selection.hpp"

namespace corrsift {

CcaDecomposition cca_decompose(const CovarianceMatrix& s,
                               const IndexSet& group) {
  const int p = s.p();
  IndexSet complement = group_complement(group, p);

  CcaDecomposition out;
  out.group = group;
  out.complement = complement;
  out.group_is_small = group.size() <= complement.size();

  const IndexSet& small = out.group_is_small ? group : complement;
  const IndexSet& large = out.group_is_small ? complement : group;

  const Matrix s_ss = submatrix(s.matrix(), small, small);
  const Matrix s_ll = submatrix(s.matrix(), large, large);
  const Matrix s_sl = submatrix(s.matrix(), small, large);

  const Matrix inv_sqrt_ss = sym_inv_sqrt(s_ss);
  const Matrix inv_sqrt_ll = sym_inv_sqrt(s_ll);

  const Matrix whitened = inv_sqrt_ss * s_sl * inv_sqrt_ll;

  Eigen::JacobiSVD<Matrix> svd(whitened,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector lambdas = svd.singularValues();
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();

  // Clamp roundoff; singular values of a whitened cross block cannot exceed 1.
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (lambdas(i) < 0.0 && lambdas(i) > -1e-12) lambdas(i) = 0.0;
    if (lambdas(i) > 1.0 && lambdas(i) < 1.0 + 1e-12) lambdas(i) = 1.0;
    lambdas(i) = std::min(1.0, std::max(0.0, lambdas(i)));
  }

  // Fix signs: largest-magnitude entry of each left singular vector positive.
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index imax = 0;
    u.col(k).cwiseAbs().maxCoeff(&imax);
    if (u(imax, k) < 0.0) {
      u.col(k) = -u.col(k);
      v.col(k) = -v.col(k);
    }
  }

  out.lambdas = std::move(lambdas);
  out.A_hat = std::move(u);
  out.Gamma_hat = std::move(v);

  const Matrix sqrt_small = sym_sqrt(s_ss);
  const Matrix sqrt_large = sym_sqrt(s_ll);
  out.sqrt_S_PP = out.group_is_small ? sqrt_small : sqrt_large;
  out.sqrt_S_PcPc = out.group_is_small ? sqrt_large : sqrt_small;
  return out;
}

double wilks_statistic(const Vector& lambdas) {
  double stat = 1.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas(i);
    if (!(l >= 0.0 && l <= 1.0)) {
      throw ArgumentError("canonical correlation outside [0, 1]");
    }
    stat *= 1.0 - l * l;
  }
  return stat;
}

CovarianceMatrix perturbed_covariance(const CovarianceMatrix& s,
                                      const CcaDecomposition& cca,
                                      const Vector& lambdas) {
  if (lambdas.size() != cca.lambdas.size()) {
    throw ArgumentError("lambda vector length does not match decomposition");
  }
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas(i) >= 0.0 && lambdas(i) <= 1.0)) {
      throw ArgumentError("lambda entry outside [0, 1]");
    }
  }
  const Matrix cross = cca.sqrt_S_PP * cca.group_factor() *
                       lambdas.asDiagonal() *
                       cca.complement_factor().transpose() * cca.sqrt_S_PcPc;
  Matrix out = s.matrix();
  for (std::size_t i = 0; i < cca.group.size(); ++i) {
    for (std::size_t j = 0; j < cca.complement.size(); ++j) {
      out(cca.group[i], cca.complement[j]) = cross(i, j);
      out(cca.complement[j], cca.group[i]) = cross(i, j);
    }
  }
  return CovarianceMatrix(std::move(out));
}

}  // namespace corrsift
