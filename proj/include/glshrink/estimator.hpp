#pragma once

#include "glshrink/linalg.hpp"
#include "glshrink/priors.hpp"
#include "glshrink/weight_table.hpp"

namespace glshrink {

struct PointEstimate {
  Vector estimate;
  double weight = 0.0;
  double s = 0.0;
};

/// θ̂ = E(1 - κ | s) x with s = xᵀΣ⁻¹x.
PointEstimate posterior_mean(const Vector& x, const Covariance& cov, const PriorSpec& prior);

/// Row i of `estimates` is weights[i] times row i of the input.
struct EstimateBatch {
  Matrix estimates;
  Vector weights;
  Vector stats;
};

/// Observations are the rows of `xs` (n × k). With a table, weights for s in
/// the table range come from interpolation; otherwise each is computed by
/// quadrature. Output does not depend on the number of threads.
EstimateBatch posterior_mean_batch(const Matrix& xs, const Covariance& cov, const PriorSpec& prior,
                                   const WeightTable* table = nullptr);

/// Single-threaded reference for posterior_mean_batch.
EstimateBatch posterior_mean_batch_serial(const Matrix& xs, const Covariance& cov, const PriorSpec& prior,
                                          const WeightTable* table = nullptr);

}  // namespace glshrink
