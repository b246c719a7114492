#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glshrink/priors.hpp"

namespace glshrink {

/// w(s) = E(1 - κ | s) tabulated on [0, s_max] for fast batch lookups.
///
/// Knots are placed adaptively; between knots w is a cubic Hermite using the
/// exact derivative dw/ds = Var(κ | s) / 2, with Fritsch-Carlson limiting so
/// the interpolant stays nondecreasing. Values at knots are exact.
struct WeightTable {
  PriorSpec prior;
  int k = 1;
  double s_max = 0.0;
  double tol = 0.0;
  /// Largest midpoint interpolation error seen in the final refinement pass.
  double error_bound = 0.0;
  std::vector<double> grid;
  std::vector<double> weights;
  /// Monotone-limited derivatives at the left and right end of each segment.
  std::vector<double> slope_left;
  std::vector<double> slope_right;

  /// Outside [0, s_max] this falls back to direct quadrature.
  double lookup(double s) const;
};

WeightTable build_weight_table(const PriorSpec& prior, int k, double s_max, double tol);

inline double weight_lookup(const WeightTable& table, double s) { return table.lookup(s); }

/// Versioned binary cache. `load_weight_table` returns nothing when the file
/// is missing, corrupt, or was built for another prior, k, s_max or tol.
void save_weight_table(const WeightTable& table, const std::string& path);
std::optional<WeightTable> load_weight_table(const std::string& path, const PriorSpec& prior, int k, double s_max,
                                             double tol);
WeightTable load_or_build_weight_table(const std::string& path, const PriorSpec& prior, int k, double s_max,
                                       double tol);

}  // namespace glshrink
