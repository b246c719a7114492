#pragma once

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "glshrink/error.hpp"
#include "glshrink/linalg.hpp"

namespace glshrink::test {

// Hand-rolled generators for property tests; every test owns its engine.
using Engine = std::mt19937_64;

inline double uniform(Engine& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

inline double log_uniform(Engine& g, double lo, double hi) {
  return std::exp(uniform(g, std::log(lo), std::log(hi)));
}

inline Vector random_vector(Engine& g, int k, double scale = 1.0) {
  std::normal_distribution<double> n;
  Vector v(k);
  for (int i = 0; i < k; ++i) v(i) = scale * n(g);
  return v;
}

// A Aᵀ + k·0.1·I with Gaussian A: SPD with condition number of order 10–100.
inline Matrix random_spd(Engine& g, int k) {
  std::normal_distribution<double> n;
  Matrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = n(g);
  return a * a.transpose() + 0.1 * k * Matrix::Identity(k, k);
}

inline Matrix random_orthogonal(Engine& g, int k) {
  std::normal_distribution<double> n;
  Matrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = n(g);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

inline bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace glshrink::test

// Checks that `expr` throws glshrink::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                      \
  do {                                                        \
    bool thrown_ = false;                                     \
    try {                                                     \
      (void)(expr);                                           \
    } catch (const ::glshrink::Error& e_) {                   \
      thrown_ = true;                                         \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());      \
    }                                                         \
    CHECK_MESSAGE(thrown_, "expected an exception: " #expr); \
  } while (0)
