#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "featforge/dataset.hpp"
#include "featforge/matrix.hpp"
#include "featforge/rng.hpp"

namespace featforge {

enum class ModelKind : std::uint8_t { DecisionTree, RandomForest, Ridge, Knn };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::DecisionTree: return "decision_tree";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Knn: return "knn";
  }
  return "random_forest";
}

inline std::optional<ModelKind> model_kind_from_name(const std::string& s) {
  if (s == "decision_tree" || s == "dt") return ModelKind::DecisionTree;
  if (s == "random_forest" || s == "rf") return ModelKind::RandomForest;
  if (s == "ridge") return ModelKind::Ridge;
  if (s == "knn") return ModelKind::Knn;
  return std::nullopt;
}

struct ModelSpec {
  ModelKind kind = ModelKind::RandomForest;
  int max_depth = 8;
  int n_trees = 10;
  double lambda = 1.0;  // ridge penalty, floored at 1e-6
  int k_neighbors = 5;
  std::uint64_t seed = 0;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// ---------------------------------------------------------------------------
// CART tree shared by DecisionTree and RandomForest.
// ---------------------------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class CartTree {
 public:
  CartTree(Task task, int n_classes, int max_depth, int mtry)
      : task_(task), n_classes_(std::max(n_classes, 1)), max_depth_(max_depth), mtry_(mtry) {}

  void fit(const Matrix& X, const std::vector<double>& y, std::vector<std::size_t> rows, Rng* rng) {
    nodes_.clear();
    build(X, y, std::move(rows), 0, rng);
  }

  double predict_row(const Matrix& X, std::size_t i) const {
    int n = 0;
    while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(n)];
      n = X.at(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
    }
    return nodes_[static_cast<std::size_t>(n)].value;
  }

 private:
  double leaf_value(const std::vector<double>& y, const std::vector<std::size_t>& rows) const {
    if (task_ == Task::Classification) {
      std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_), 0);
      for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y[r])];
      std::size_t best = 0;
      for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[best]) best = c;  // ties keep the lowest label
      return static_cast<double>(best);
    }
    double sum = 0.0;
    for (std::size_t r : rows) sum += y[r];
    return sum / static_cast<double>(rows.size());
  }

  bool is_pure(const std::vector<double>& y, const std::vector<std::size_t>& rows) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (y[rows[i]] != y[rows[0]]) return false;
    return true;
  }

  std::vector<std::size_t> candidate_features(std::size_t n_features, Rng* rng) const {
    std::vector<std::size_t> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    if (mtry_ <= 0 || static_cast<std::size_t>(mtry_) >= n_features || rng == nullptr) return all;
    // partial Fisher-Yates, then ascending order for a stable scan
    for (int i = 0; i < mtry_; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) + rng->below(n_features - static_cast<std::size_t>(i));
      std::swap(all[static_cast<std::size_t>(i)], all[j]);
    }
    all.resize(static_cast<std::size_t>(mtry_));
    std::sort(all.begin(), all.end());
    return all;
  }

  // Returns weighted child impurity of the best split on one feature, or
  // infinity when the feature is constant over the node.
  bool best_split_on(const Matrix& X, const std::vector<double>& y, const std::vector<std::size_t>& rows,
                     std::size_t feature, double* impurity, double* threshold) const {
    const std::size_t n = rows.size();
    std::vector<std::pair<double, double>> vals(n);  // (x, y)
    for (std::size_t i = 0; i < n; ++i) vals[i] = {X.at(rows[i], feature), y[rows[i]]};
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return false;

    double best = std::numeric_limits<double>::infinity();
    double best_thr = 0.0;

    if (task_ == Task::Classification) {
      std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
      std::vector<double> right(static_cast<std::size_t>(n_classes_), 0.0);
      for (const auto& [x, label] : vals) right[static_cast<std::size_t>(label)] += 1.0;
      double sq_left = 0.0;
      double sq_right = 0.0;
      for (double c : right) sq_right += c * c;

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto cls = static_cast<std::size_t>(vals[i].second);
        sq_left += 2.0 * left[cls] + 1.0;
        sq_right -= 2.0 * right[cls] - 1.0;
        left[cls] += 1.0;
        right[cls] -= 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        // weighted gini: sum over sides of n_side * (1 - sum p^2)
        const double impur = (nl - sq_left / nl) + (nr - sq_right / nr);
        if (impur < best) {
          best = impur;
          best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    } else {
      double sum_left = 0.0, sq_sum_left = 0.0;
      double sum_right = 0.0, sq_sum_right = 0.0;
      for (const auto& [x, t] : vals) {
        sum_right += t;
        sq_sum_right += t * t;
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = vals[i].second;
        sum_left += t;
        sq_sum_left += t * t;
        sum_right -= t;
        sq_sum_right -= t * t;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double sse = (sq_sum_left - sum_left * sum_left / nl) + (sq_sum_right - sum_right * sum_right / nr);
        if (sse < best) {
          best = sse;
          best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (!std::isfinite(best)) return false;
    *impurity = best;
    *threshold = best_thr;
    return true;
  }

  int build(const Matrix& X, const std::vector<double>& y, std::vector<std::size_t> rows, int depth, Rng* rng) {
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.back().value = leaf_value(y, rows);

    if (depth >= max_depth_ || rows.size() < 2 || is_pure(y, rows)) return node_index;

    double best_impurity = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t j : candidate_features(X.n_cols(), rng)) {
      double impur = 0.0, thr = 0.0;
      if (!best_split_on(X, y, rows, j, &impur, &thr)) continue;
      if (impur < best_impurity) {
        best_impurity = impur;
        best_feature = static_cast<int>(j);
        best_threshold = thr;
      }
    }
    if (best_feature < 0) return node_index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (X.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left = build(X, y, std::move(left_rows), depth + 1, rng);
    const int right = build(X, y, std::move(right_rows), depth + 1, rng);
    nodes_[static_cast<std::size_t>(node_index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(node_index)].threshold = best_threshold;
    nodes_[static_cast<std::size_t>(node_index)].left = left;
    nodes_[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }

  Task task_;
  int n_classes_;
  int max_depth_;
  int mtry_;
  std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------
// Column standardization shared by Ridge and KNN.
// ---------------------------------------------------------------------------

struct Standardizer {
  std::vector<double> mean, scale;

  void fit(const Matrix& X) {
    const auto m = static_cast<double>(X.n_rows());
    mean.assign(X.n_cols(), 0.0);
    scale.assign(X.n_cols(), 1.0);
    for (std::size_t j = 0; j < X.n_cols(); ++j) {
      double mu = 0.0;
      for (double v : X.col(j)) mu += v;
      mu /= m;
      double var = 0.0;
      for (double v : X.col(j)) var += (v - mu) * (v - mu);
      var /= m;
      mean[j] = mu;
      const double sd = std::sqrt(var);
      scale[j] = sd > 1e-12 ? sd : 1.0;  // constant columns standardize to zero
    }
  }

  double apply(double v, std::size_t j) const { return (v - mean[j]) / scale[j]; }
};

// Cholesky solve of the SPD system A x = b; A is overwritten.
inline std::vector<double> cholesky_solve(std::vector<std::vector<double>>& A, std::vector<double> b) {
  const std::size_t n = A.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = A[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= A[j][k] * A[j][k];
    if (d <= 0.0) throw ModelError("ridge: singular system (lambda too small)");
    A[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
      A[i][j] = s / A[j][j];
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= A[i][k] * b[k];
    b[i] = s / A[i][i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[k][i] * b[k];
    b[i] = s / A[i][i];
  }
  return b;
}

// Ridge weights on standardized columns: (X'X + lambda I) w = X'y.
inline std::vector<double> ridge_weights(const Matrix& X, const Standardizer& st,
                                         const std::vector<double>& y_centered, double lambda) {
  const std::size_t p = X.n_cols();
  const std::size_t m = X.n_rows();
  std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t jj = j; jj < p; ++jj) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += st.apply(X.at(i, j), j) * st.apply(X.at(i, jj), jj);
      A[j][jj] = A[jj][j] = s;
    }
    A[j][j] += lambda;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += st.apply(X.at(i, j), j) * y_centered[i];
    b[j] = s;
  }
  return cholesky_solve(A, std::move(b));
}

}  // namespace detail

// Fits the configured model on the train slice and predicts the test rows.
// Classification predictions are class labels encoded as doubles.
inline std::vector<double> fit_predict(const ModelSpec& spec, const Matrix& X_train,
                                       const std::vector<double>& y_train, const Matrix& X_test,
                                       Task task, int n_classes) {
  if (X_train.n_rows() != y_train.size()) throw ModelError("fit_predict: train size mismatch");
  if (X_test.n_cols() != X_train.n_cols()) throw ModelError("fit_predict: column count mismatch");
  const std::size_t m = X_train.n_rows();
  const std::size_t mt = X_test.n_rows();
  const std::size_t p = X_train.n_cols();
  std::vector<double> pred(mt, 0.0);

  switch (spec.kind) {
    case ModelKind::DecisionTree: {
      detail::CartTree tree(task, n_classes, spec.max_depth, 0);
      std::vector<std::size_t> rows(m);
      std::iota(rows.begin(), rows.end(), 0);
      tree.fit(X_train, y_train, std::move(rows), nullptr);
      for (std::size_t i = 0; i < mt; ++i) pred[i] = tree.predict_row(X_test, i);
      return pred;
    }

    case ModelKind::RandomForest: {
      const int mtry = task == Task::Classification
                           ? std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(p)))))
                           : std::max(1, static_cast<int>(p) / 3);
      std::vector<detail::CartTree> trees;
      trees.reserve(static_cast<std::size_t>(spec.n_trees));
      for (int t = 0; t < spec.n_trees; ++t) {
        Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(m);
        for (auto& r : rows) r = rng.below(m);
        detail::CartTree tree(task, n_classes, spec.max_depth, mtry);
        tree.fit(X_train, y_train, std::move(rows), &rng);
        trees.push_back(std::move(tree));
      }
      for (std::size_t i = 0; i < mt; ++i) {
        if (task == Task::Classification) {
          std::vector<int> votes(static_cast<std::size_t>(std::max(n_classes, 1)), 0);
          for (const auto& tree : trees) ++votes[static_cast<std::size_t>(tree.predict_row(X_test, i))];
          std::size_t best = 0;
          for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[best]) best = c;
          pred[i] = static_cast<double>(best);
        } else {
          double s = 0.0;
          for (const auto& tree : trees) s += tree.predict_row(X_test, i);
          pred[i] = s / static_cast<double>(trees.size());
        }
      }
      return pred;
    }

    case ModelKind::Ridge: {
      const double lambda = std::max(spec.lambda, 1e-6);
      detail::Standardizer st;
      st.fit(X_train);
      if (task == Task::Regression) {
        double y_mean = 0.0;
        for (double v : y_train) y_mean += v;
        y_mean /= static_cast<double>(m);
        std::vector<double> yc(m);
        for (std::size_t i = 0; i < m; ++i) yc[i] = y_train[i] - y_mean;
        const auto w = detail::ridge_weights(X_train, st, yc, lambda);
        for (std::size_t i = 0; i < mt; ++i) {
          double s = y_mean;
          for (std::size_t j = 0; j < p; ++j) s += w[j] * st.apply(X_test.at(i, j), j);
          pred[i] = s;
        }
      } else {
        // one-vs-rest on +-1 targets, argmax decision
        std::vector<std::vector<double>> scores(mt, std::vector<double>(static_cast<std::size_t>(n_classes), 0.0));
        for (int c = 0; c < n_classes; ++c) {
          std::vector<double> yc(m);
          double y_mean = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            yc[i] = y_train[i] == static_cast<double>(c) ? 1.0 : -1.0;
            y_mean += yc[i];
          }
          y_mean /= static_cast<double>(m);
          for (auto& v : yc) v -= y_mean;
          const auto w = detail::ridge_weights(X_train, st, yc, lambda);
          for (std::size_t i = 0; i < mt; ++i) {
            double s = y_mean;
            for (std::size_t j = 0; j < p; ++j) s += w[j] * st.apply(X_test.at(i, j), j);
            scores[i][static_cast<std::size_t>(c)] = s;
          }
        }
        for (std::size_t i = 0; i < mt; ++i) {
          std::size_t best = 0;
          for (std::size_t c = 1; c < scores[i].size(); ++c)
            if (scores[i][c] > scores[i][best]) best = c;
          pred[i] = static_cast<double>(best);
        }
      }
      return pred;
    }

    case ModelKind::Knn: {
      const std::size_t k = std::min<std::size_t>(std::max(spec.k_neighbors, 1), m);
      detail::Standardizer st;
      st.fit(X_train);
      for (std::size_t i = 0; i < mt; ++i) {
        std::vector<std::pair<double, std::size_t>> dist(m);
        for (std::size_t r = 0; r < m; ++r) {
          double d = 0.0;
          for (std::size_t j = 0; j < p; ++j) {
            const double diff = st.apply(X_test.at(i, j), j) - st.apply(X_train.at(r, j), j);
            d += diff * diff;
          }
          dist[r] = {d, r};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        if (task == Task::Classification) {
          std::vector<int> votes(static_cast<std::size_t>(std::max(n_classes, 1)), 0);
          for (std::size_t nn = 0; nn < k; ++nn) ++votes[static_cast<std::size_t>(y_train[dist[nn].second])];
          std::size_t best = 0;
          for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[best]) best = c;
          pred[i] = static_cast<double>(best);
        } else {
          double s = 0.0;
          for (std::size_t nn = 0; nn < k; ++nn) s += y_train[dist[nn].second];
          pred[i] = s / static_cast<double>(k);
        }
      }
      return pred;
    }
  }
  throw ModelError("fit_predict: unknown model kind");
}

}  // namespace featforge
