#include "corrsift/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace corrsift {

DataMatrix::DataMatrix(Matrix values,
                       std::optional<std::vector<std::string>> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() < 2) {
    throw DimensionError("DataMatrix needs at least 2 observations");
  }
  if (labels_ &&
      static_cast<Eigen::Index>(labels_->size()) != values_.cols()) {
    throw DimensionError("column label count does not match column count");
  }
}

void DataMatrix::require_inference_shape() const {
  if (n() <= p()) {
    throw DimensionError("inference requires n > p (got n = " +
                         std::to_string(n()) + ", p = " + std::to_string(p()) +
                         ")");
  }
}

CovarianceMatrix::CovarianceMatrix(Matrix s) : s_(std::move(s)) {
  if (s_.rows() != s_.cols()) {
    throw DimensionError("covariance matrix must be square");
  }
  const double scale = s_.cwiseAbs().maxCoeff();
  const double asym = (s_ - s_.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-12 * scale) {
    throw ArgumentError("covariance matrix is not symmetric");
  }
  s_ = 0.5 * (s_ + s_.transpose().eval());
  // A zero diagonal entry (constant variable) is tolerated here; the
  // correlation conversion rejects it with the offending index.
  for (Eigen::Index i = 0; i < s_.rows(); ++i) {
    if (s_(i, i) < 0.0) {
      throw DegenerateVariableError(
          "covariance diagonal entry " + std::to_string(i + 1) +
              " is negative",
          static_cast<int>(i));
    }
  }
}

CorrelationMatrix::CorrelationMatrix(Matrix r) : r_(std::move(r)) {
  if (r_.rows() != r_.cols()) {
    throw DimensionError("correlation matrix must be square");
  }
  for (Eigen::Index i = 0; i < r_.rows(); ++i) {
    r_(i, i) = 1.0;
    for (Eigen::Index j = 0; j < r_.cols(); ++j) {
      if (std::abs(r_(i, j)) > 1.0 + 1e-12) {
        throw ArgumentError("correlation entry outside [-1, 1]");
      }
      if (r_(i, j) > 1.0) r_(i, j) = 1.0;
      if (r_(i, j) < -1.0) r_(i, j) = -1.0;
    }
  }
}

CovarianceMatrix sample_covariance(const DataMatrix& data) {
  const Matrix& x = data.values();
  const Vector mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean.transpose();
  Matrix s = (centered.transpose() * centered) / static_cast<double>(data.n());
  s = 0.5 * (s + s.transpose().eval());
  return CovarianceMatrix(std::move(s));
}

CorrelationMatrix correlation_from_covariance(const CovarianceMatrix& s) {
  const int p = s.p();
  Matrix r(p, p);
  Vector inv_sd(p);
  for (int i = 0; i < p; ++i) {
    if (!(s(i, i) > 0.0)) {
      throw DegenerateVariableError(
          "variable " + std::to_string(i + 1) + " has non-positive variance",
          i);
    }
    inv_sd(i) = 1.0 / std::sqrt(s(i, i));
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      r(i, j) = s(i, j) * inv_sd(i) * inv_sd(j);
    }
  }
  r.diagonal().setOnes();
  return CorrelationMatrix(std::move(r));
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> checked_eigensolve(const Matrix& m,
                                                         double rel_tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("sym_sqrt input must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const double max_ev = es.eigenvalues().maxCoeff();
  const double min_ev = es.eigenvalues().minCoeff();
  if (!(max_ev > 0.0) || min_ev <= rel_tol * max_ev) {
    const double ratio = max_ev > 0.0 ? min_ev / max_ev : 0.0;
    throw SingularityError(
        "matrix is numerically singular (min/max eigenvalue ratio " +
            std::to_string(ratio) + ")",
        ratio);
  }
  return es;
}

}  // namespace

Matrix sym_sqrt(const Matrix& m, double rel_tol) {
  auto es = checked_eigensolve(m, rel_tol);
  const Vector roots = es.eigenvalues().cwiseSqrt();
  Matrix out = es.eigenvectors() * roots.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose().eval());
}

Matrix sym_inv_sqrt(const Matrix& m, double rel_tol) {
  auto es = checked_eigensolve(m, rel_tol);
  const Vector roots = es.eigenvalues().cwiseSqrt().cwiseInverse();
  Matrix out = es.eigenvectors() * roots.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose().eval());
}

double log_determinant(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("log_determinant input must be square");
  }
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    throw SingularityError("log_determinant requires a positive definite input",
                           0.0);
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(i, j) = m(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace corrsift
