#ifndef CORRSIFT_LINALG_HPP
#define CORRSIFT_LINALG_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "corrsift/errors.hpp"

namespace corrsift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;  // 0-based, ascending

// n observations (rows) of p variables (columns).
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values,
                      std::optional<std::vector<std::string>> labels = {});

  const Matrix& values() const { return values_; }
  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }
  const std::optional<std::vector<std::string>>& labels() const {
    return labels_;
  }

  // Throws DimensionError unless n > p, as required for inference.
  void require_inference_shape() const;

 private:
  Matrix values_;
  std::optional<std::vector<std::string>> labels_;
};

// Symmetric p x p covariance matrix. Symmetry and a non-negative diagonal
// are enforced at construction; zero-variance variables are rejected later
// by the correlation conversion, and positive definiteness is only checked
// where whitening needs it.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix s);

  const Matrix& matrix() const { return s_; }
  int p() const { return static_cast<int>(s_.rows()); }
  double operator()(int i, int j) const { return s_(i, j); }

 private:
  Matrix s_;
};

class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(Matrix r);

  const Matrix& matrix() const { return r_; }
  int p() const { return static_cast<int>(r_.rows()); }
  double operator()(int i, int j) const { return r_(i, j); }

 private:
  Matrix r_;
};

// 1/n-normalized centered cross product. Note the 1/n (not 1/(n-1))
// divisor; the Wilks calibration downstream depends on it.
CovarianceMatrix sample_covariance(const DataMatrix& data);

CorrelationMatrix correlation_from_covariance(const CovarianceMatrix& s);

// Symmetric square root / inverse square root via full symmetric
// eigendecomposition. Rejects matrices whose smallest eigenvalue falls
// below rel_tol times the largest.
Matrix sym_sqrt(const Matrix& m, double rel_tol = 1e-10);
Matrix sym_inv_sqrt(const Matrix& m, double rel_tol = 1e-10);

// log |M| for symmetric positive definite M, via Cholesky.
double log_determinant(const Matrix& m);

// Submatrix with the given row and column index sets.
Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols);

}  // namespace corrsift

#endif  // CORRSIFT_LINALG_HPP
