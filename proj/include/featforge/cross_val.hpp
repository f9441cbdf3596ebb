#pragma once

#include <cstdint>
#include <vector>

#include "featforge/dataset.hpp"
#include "featforge/matrix.hpp"
#include "featforge/metrics.hpp"
#include "featforge/models.hpp"

namespace featforge {

enum class Metric : std::uint8_t { F1Weighted, OneMinusRae };

inline const char* metric_name(Metric m) { return m == Metric::F1Weighted ? "f1_weighted" : "one_minus_rae"; }

struct Score {
  double value = 0.0;  // arithmetic mean of fold_values
  Metric metric = Metric::OneMinusRae;
  std::vector<double> fold_values;
};

// Fits the model on each fold's complement and scores its in-fold
// predictions; fitting only ever sees train slices. Per-fold model seeds are
// derived as seed + fold index.
inline Score cross_val_score(const Matrix& X, const std::vector<double>& y, Task task, int n_classes,
                             const ModelSpec& model, const FoldPlan& folds) {
  if (X.n_rows() != y.size() || y.size() != folds.assignments.size())
    throw ModelError("cross_val_score: row count mismatch");

  Score score;
  score.metric = task == Task::Classification ? Metric::F1Weighted : Metric::OneMinusRae;
  score.fold_values.reserve(static_cast<std::size_t>(folds.k));

  for (int f = 0; f < folds.k; ++f) {
    const auto train_rows = folds.complement_rows(f);
    const auto test_rows = folds.fold_rows(f);
    const Matrix X_train = X.select_rows(train_rows);
    const Matrix X_test = X.select_rows(test_rows);
    std::vector<double> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];

    ModelSpec fold_model = model;
    fold_model.seed = model.seed + static_cast<std::uint64_t>(f);
    const auto pred = fit_predict(fold_model, X_train, y_train, X_test, task, n_classes);

    if (task == Task::Classification) {
      std::vector<int> yt(test_rows.size()), yp(test_rows.size());
      for (std::size_t i = 0; i < test_rows.size(); ++i) {
        yt[i] = static_cast<int>(y[test_rows[i]]);
        yp[i] = static_cast<int>(pred[i]);
      }
      score.fold_values.push_back(f1_weighted(yt, yp));
    } else {
      std::vector<double> yt(test_rows.size());
      for (std::size_t i = 0; i < test_rows.size(); ++i) yt[i] = y[test_rows[i]];
      score.fold_values.push_back(one_minus_rae(yt, pred));
    }
  }

  double sum = 0.0;
  for (double v : score.fold_values) sum += v;
  score.value = sum / static_cast<double>(score.fold_values.size());
  return score;
}

}  // namespace featforge
