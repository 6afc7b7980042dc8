#ifndef CORRSIFT_CCA_HPP
#define CORRSIFT_CCA_HPP

#include "corrsift/linalg.hpp"

namespace corrsift {

// Canonical correlation decomposition of the split (group, complement).
//
// Internally the smaller of the two blocks is always treated as the "left"
// side of the whitened cross block, so r = min(card, p - card) holds
// structurally. A_hat holds the singular vectors of the smaller block,
// Gamma_hat those of the larger one; group_factor()/complement_factor()
// translate back to the caller's orientation.
struct CcaDecomposition {
  IndexSet group;
  IndexSet complement;
  Vector lambdas;      // sorted non-increasing, each in [0, 1]
  Matrix A_hat;        // card(small) x r, orthonormal columns
  Matrix Gamma_hat;    // card(large) x r, orthonormal columns
  Matrix sqrt_S_PP;    // symmetric square root of S_{P,P}
  Matrix sqrt_S_PcPc;  // symmetric square root of S_{Pc,Pc}
  bool group_is_small = true;

  int r() const { return static_cast<int>(lambdas.size()); }

  // Factor keyed to the caller's group (card(group) x r): the cross block
  // satisfies S_{P,Pc} = sqrt_S_PP * group_factor * diag(lambda) *
  // complement_factor^T * sqrt_S_PcPc.
  const Matrix& group_factor() const {
    return group_is_small ? A_hat : Gamma_hat;
  }
  const Matrix& complement_factor() const {
    return group_is_small ? Gamma_hat : A_hat;
  }
};

CcaDecomposition cca_decompose(const CovarianceMatrix& s,
                               const IndexSet& group);

// Wilks' lambda statistic: prod_i (1 - lambda_i^2).
double wilks_statistic(const Vector& lambdas);

// Covariance with its (group, complement) cross block rebuilt from the
// observed singular vectors and the supplied lambda vector; all other
// blocks untouched.
CovarianceMatrix perturbed_covariance(const CovarianceMatrix& s,
                                      const CcaDecomposition& cca,
                                      const Vector& lambdas);

}  // namespace corrsift

#endif  // CORRSIFT_CCA_HPP
