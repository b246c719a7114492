#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace glshrink {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Known SPD noise covariance Σ, factorized once at construction.
///
/// All Mahalanobis geometry goes through the lower Cholesky factor Σ = C Cᵀ:
/// whitening is y = C⁻¹x, so ‖y‖₂² = xᵀΣ⁻¹x. The symmetric square root
/// Σ^{-1/2} is never needed because every quantity downstream depends on x
/// only through ‖x‖_Σ or through orthogonally invariant whitened draws.
/// Immutable after construction.
class Covariance {
 public:
  /// Validates, symmetrizes by averaging, factorizes and computes the
  /// eigenvalue bounds. Throws NonFinite, NotSymmetric, NotPositiveDefinite.
  static Covariance make(const Matrix& matrix);
  static Covariance identity(int dim);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  /// Lower-triangular Cholesky factor.
  Matrix chol() const { return llt_.matrixL(); }
  double eig_min() const { return eig_min_; }
  double eig_max() const { return eig_max_; }

  double mahalanobis_sq(const Eigen::Ref<const Vector>& x) const;
  Vector whiten(const Eigen::Ref<const Vector>& x) const;
  Vector unwhiten(const Eigen::Ref<const Vector>& y) const;

  /// Materialized C⁻¹ (whitening matrix); only offered for dim ≤ 64.
  Matrix whitening_matrix() const;

 private:
  Covariance() = default;
  void check_dim(Eigen::Index n) const;

  Matrix matrix_;
  Eigen::LLT<Matrix> llt_;
  double eig_min_ = 0.0;
  double eig_max_ = 0.0;
};

struct NormBounds {
  double c_low;
  double c_high;
};

/// Constants with c_low‖x‖₂ ≤ ‖x‖_Σ ≤ c_high‖x‖₂, namely
/// (λ_max^{-1/2}, λ_min^{-1/2}).
NormBounds norm_equivalence_bounds(const Covariance& cov);

inline double mahalanobis_sq(const Eigen::Ref<const Vector>& x, const Covariance& cov) {
  return cov.mahalanobis_sq(x);
}

}  // namespace glshrink
