#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "featforge/matrix.hpp"

namespace featforge {

// Fixed-size descriptive-statistics embedding of a feature matrix: the seven
// statistics (count, std, min, max, q1, q2, q3) of each column, then the same
// seven statistics of each statistic row across columns. 7 x 7 = 49 values,
// flattened row-major, for any input shape.
inline constexpr int kStateDim = 49;
using StateVector = std::array<double, kStateDim>;

namespace detail {

// Quantile by linear interpolation between order statistics at position
// p * (n - 1), zero-based.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// count, population std, min, max, q1, q2, q3. All moments accumulate over
// the sorted values so the result is bit-exact under input permutation.
inline std::array<double, 7> stats7(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);

  return {static_cast<double>(n), std::sqrt(var), sorted.front(), sorted.back(),
          quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5), quantile_sorted(sorted, 0.75)};
}

}  // namespace detail

inline StateVector represent(const Matrix& X) {
  if (X.empty()) throw std::invalid_argument("represent: empty matrix");

  const std::size_t n = X.n_cols();
  std::array<std::vector<double>, 7> stat_rows;
  for (auto& row : stat_rows) row.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto s = detail::stats7(X.col(j));
    for (std::size_t r = 0; r < 7; ++r) stat_rows[r][j] = s[r];
  }

  StateVector out{};
  for (std::size_t r = 0; r < 7; ++r) {
    const auto s = detail::stats7(stat_rows[r]);
    for (std::size_t c = 0; c < 7; ++c) out[r * 7 + c] = s[c];
  }
  return out;
}

}  // namespace featforge
