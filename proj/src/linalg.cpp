#include "glshrink/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "glshrink/error.hpp"

namespace glshrink {

namespace {
constexpr double kSymmetryTol = 1e-12;
}

Covariance Covariance::make(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "covariance must be square and non-empty, got " + std::to_string(matrix.rows()) + "x" +
                    std::to_string(matrix.cols()));
  }
  if (!matrix.allFinite()) throw Error(ErrorCode::NonFinite, "covariance has non-finite entries");

  const double scale = matrix.cwiseAbs().maxCoeff();
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw Error(ErrorCode::NotSymmetric, "max |S - S^T| = " + std::to_string(asym));
  }

  Covariance cov;
  cov.matrix_ = 0.5 * (matrix + matrix.transpose());
  cov.llt_.compute(cov.matrix_);
  if (cov.llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov.matrix_, Eigen::EigenvaluesOnly);
  cov.eig_min_ = eig.eigenvalues().minCoeff();
  cov.eig_max_ = eig.eigenvalues().maxCoeff();
  if (!(cov.eig_min_ > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite, "smallest eigenvalue is not positive");
  }
  return cov;
}

Covariance Covariance::identity(int dim) { return make(Matrix::Identity(dim, dim)); }

void Covariance::check_dim(Eigen::Index n) const {
  if (n != matrix_.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector length " + std::to_string(n) + " vs covariance dim " + std::to_string(matrix_.rows()));
  }
}

double Covariance::mahalanobis_sq(const Eigen::Ref<const Vector>& x) const {
  check_dim(x.size());
  return llt_.matrixL().solve(x).squaredNorm();
}

Vector Covariance::whiten(const Eigen::Ref<const Vector>& x) const {
  check_dim(x.size());
  return llt_.matrixL().solve(x);
}

Vector Covariance::unwhiten(const Eigen::Ref<const Vector>& y) const {
  check_dim(y.size());
  return llt_.matrixL() * y;
}

Matrix Covariance::whitening_matrix() const {
  if (dim() > 64) throw Error(ErrorCode::DimensionMismatch, "whitening matrix only materialized for dim <= 64");
  return llt_.matrixL().solve(Matrix::Identity(dim(), dim()));
}

NormBounds norm_equivalence_bounds(const Covariance& cov) {
  return {1.0 / std::sqrt(cov.eig_max()), 1.0 / std::sqrt(cov.eig_min())};
}

}  // namespace glshrink
