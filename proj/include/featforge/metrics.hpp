#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace featforge {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Support-weighted F1 over the classes present in y_true. A class whose
// precision and recall are both zero contributes an F1 of zero.
inline double f1_weighted(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw MetricError("f1_weighted: length mismatch");

  int max_label = 0;
  for (int v : y_true) max_label = std::max(max_label, v);
  for (int v : y_pred) max_label = std::max(max_label, v);

  std::vector<std::size_t> tp(static_cast<std::size_t>(max_label) + 1, 0);
  std::vector<std::size_t> fp(tp.size(), 0), fn(tp.size(), 0), support(tp.size(), 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true[i]);
    const auto p = static_cast<std::size_t>(y_pred[i]);
    ++support[t];
    if (t == p) {
      ++tp[t];
    } else {
      ++fn[t];
      ++fp[p];
    }
  }

  double weighted = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) {
    if (support[c] == 0) continue;
    const double prec_den = static_cast<double>(tp[c] + fp[c]);
    const double rec_den = static_cast<double>(tp[c] + fn[c]);
    const double precision = prec_den > 0 ? static_cast<double>(tp[c]) / prec_den : 0.0;
    const double recall = rec_den > 0 ? static_cast<double>(tp[c]) / rec_den : 0.0;
    const double f1 = (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    weighted += f1 * static_cast<double>(support[c]) / static_cast<double>(y_true.size());
  }
  return weighted;
}

// 1 - relative absolute error: 1 at perfect prediction, 0 for the mean
// predictor, unbounded below.
inline double one_minus_rae(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() < 2)
    throw MetricError("one_minus_rae: length mismatch");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    num += std::fabs(y_pred[i] - y_true[i]);
    den += std::fabs(mean - y_true[i]);
  }
  if (den == 0.0) throw MetricError("one_minus_rae: constant target");
  return 1.0 - num / den;
}

}  // namespace featforge
