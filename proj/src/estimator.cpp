#include "glshrink/estimator.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "glshrink/error.hpp"
#include "glshrink/posterior.hpp"

namespace glshrink {

namespace {

void check_table(const WeightTable* table, const PriorSpec& prior, int k) {
  if (!table) return;
  if (table->k != k) throw Error(ErrorCode::DimensionMismatch, "weight table was built for another k");
  if (prior_hash(table->prior) != prior_hash(prior)) {
    throw Error(ErrorCode::WrongVariant, "weight table was built for another prior");
  }
}

double weight_for(double s, int k, const PriorSpec& prior, const WeightTable* table) {
  if (table) return table->lookup(s);
  return PosteriorKernel(prior, k, s).shrinkage_weight();
}

void check_rows(const Matrix& xs, const Covariance& cov) {
  if (xs.cols() != cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "observations have " + std::to_string(xs.cols()) +
                                                  " columns, covariance is " + std::to_string(cov.dim()));
  }
  if (!xs.allFinite()) throw Error(ErrorCode::NonFinite, "observations contain non-finite values");
}

EstimateBatch run_batch(const Matrix& xs, const Covariance& cov, const PriorSpec& prior, const WeightTable* table,
                        bool parallel) {
  check_rows(xs, cov);
  const int k = cov.dim();
  check_table(table, prior, k);
  const auto n = static_cast<std::int64_t>(xs.rows());
  EstimateBatch out;
  out.stats.resize(n);
  out.weights.resize(n);
  out.estimates.resize(n, k);

#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) out.stats[i] = cov.mahalanobis_sq(xs.row(i).transpose());

  // Sorted order keeps consecutive table lookups in neighbouring segments.
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out.stats[a] < out.stats[b]; });

  bool failed = false;
  ErrorCode code = ErrorCode::QuadratureFailure;
  std::string message;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::int64_t j = 0; j < n; ++j) {
    const std::int64_t i = order[j];
    try {
      out.weights[i] = weight_for(out.stats[i], k, prior, table);
    } catch (const Error& e) {
#pragma omp critical(glshrink_batch_error)
      {
        if (!failed) {
          code = e.code();
          message = e.what();
        }
        failed = true;
      }
    }
  }
  if (failed) throw Error(code, message);

  for (std::int64_t i = 0; i < n; ++i) out.estimates.row(i) = out.weights[i] * xs.row(i);
  return out;
}

}  // namespace

PointEstimate posterior_mean(const Vector& x, const Covariance& cov, const PriorSpec& prior) {
  if (x.size() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "x has the wrong length");
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "x contains non-finite values");
  PointEstimate p;
  p.s = cov.mahalanobis_sq(x);
  p.weight = PosteriorKernel(prior, cov.dim(), p.s).shrinkage_weight();
  p.estimate = p.weight * x;
  return p;
}

EstimateBatch posterior_mean_batch(const Matrix& xs, const Covariance& cov, const PriorSpec& prior,
                                   const WeightTable* table) {
  return run_batch(xs, cov, prior, table, true);
}

EstimateBatch posterior_mean_batch_serial(const Matrix& xs, const Covariance& cov, const PriorSpec& prior,
                                          const WeightTable* table) {
  return run_batch(xs, cov, prior, table, false);
}

}  // namespace glshrink
