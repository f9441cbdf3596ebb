#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "featforge/cross_val.hpp"
#include "featforge/models.hpp"
#include "support/test_helpers.hpp"

using namespace featforge;

TEST_CASE("knn with k=1 returns the label of an exactly matching row") {
  const Matrix X_train = Matrix::from_rows({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const std::vector<double> y = {0, 1, 0, 1};
  const Matrix X_test = Matrix::from_rows({{2, 2}, {1, 1}});
  ModelSpec spec;
  spec.kind = ModelKind::Knn;
  spec.k_neighbors = 1;
  const auto pred = fit_predict(spec, X_train, y, X_test, Task::Classification, 2);
  CHECK(pred[0] == 0.0);
  CHECK(pred[1] == 1.0);
}

TEST_CASE("ridge shrinks to the train mean as lambda grows") {
  Rng rng(5);
  const Matrix X_train = gen::random_matrix(rng, 30, 3);
  std::vector<double> y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = 2.0 * X_train.at(i, 0) - X_train.at(i, 2) + 1.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= 30.0;

  ModelSpec spec;
  spec.kind = ModelKind::Ridge;
  spec.lambda = 1e12;
  const Matrix X_test = gen::random_matrix(rng, 5, 3);
  const auto pred = fit_predict(spec, X_train, y, X_test, Task::Regression, 0);
  for (double p : pred) CHECK(std::fabs(p - mean) < 1e-6);
}

TEST_CASE("ridge recovers a linear signal with small lambda") {
  Rng rng(6);
  const Matrix X_train = gen::random_matrix(rng, 60, 2);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = 3.0 * X_train.at(i, 0) - 0.5 * X_train.at(i, 1);
  ModelSpec spec;
  spec.kind = ModelKind::Ridge;
  spec.lambda = 1e-6;
  const auto pred = fit_predict(spec, X_train, y, X_train, Task::Regression, 0);
  for (std::size_t i = 0; i < 60; ++i) CHECK(std::fabs(pred[i] - y[i]) < 1e-4);
}

TEST_CASE("duplicating a column barely moves ridge predictions") {
  Rng rng(7);
  const Matrix X_train = gen::random_matrix(rng, 40, 3);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = X_train.at(i, 0) + 0.3 * X_train.at(i, 1) + 0.01 * rng.normal();

  Matrix X_dup = X_train;
  X_dup.add_col(X_train.col(0));
  const Matrix X_test = gen::random_matrix(rng, 10, 3);
  Matrix X_test_dup = X_test;
  X_test_dup.add_col(X_test.col(0));

  ModelSpec spec;
  spec.kind = ModelKind::Ridge;
  spec.lambda = 1e-6;
  const auto base = fit_predict(spec, X_train, y, X_test, Task::Regression, 0);
  const auto dup = fit_predict(spec, X_dup, y, X_test_dup, Task::Regression, 0);
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::fabs(base[i] - dup[i]) < 1e-6);
}

TEST_CASE("depth-1 decision tree separates a thresholded 1-D dataset") {
  // one split at x ~ 0 suffices
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    const double x = i < 10 ? -1.0 - i * 0.1 : 1.0 + i * 0.1;
    rows.push_back({x});
    y.push_back(i < 10 ? 0.0 : 1.0);
  }
  const Matrix X = Matrix::from_rows(rows);
  ModelSpec spec;
  spec.kind = ModelKind::DecisionTree;
  spec.max_depth = 1;
  const auto pred = fit_predict(spec, X, y, X, Task::Classification, 2);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(pred[i] == y[i]);
}

TEST_CASE("decision tree regression fits a step function") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({static_cast<double>(i)});
    y.push_back(i < 15 ? 2.0 : 8.0);
  }
  const Matrix X = Matrix::from_rows(rows);
  ModelSpec spec;
  spec.kind = ModelKind::DecisionTree;
  spec.max_depth = 2;
  const auto pred = fit_predict(spec, X, y, X, Task::Regression, 0);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::fabs(pred[i] - y[i]) < 1e-12);
}

TEST_CASE("random forest is deterministic given the seed") {
  const Dataset ds = gen::synthetic_classification(12, 50);
  ModelSpec spec;
  spec.kind = ModelKind::RandomForest;
  spec.seed = 99;
  const auto a = fit_predict(spec, ds.X, ds.y, ds.X, Task::Classification, 2);
  const auto b = fit_predict(spec, ds.X, ds.y, ds.X, Task::Classification, 2);
  CHECK(a == b);
}

TEST_CASE("all four model kinds run on any loadable dataset") {
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const bool classify = trial % 2 == 0;
    Dataset ds = classify ? gen::synthetic_classification(rng.next_u64(), 40)
                          : gen::synthetic_regression(rng.next_u64(), 40, 4);
    for (ModelKind kind : {ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Ridge, ModelKind::Knn}) {
      ModelSpec spec;
      spec.kind = kind;
      const auto pred = fit_predict(spec, ds.X, ds.y, ds.X, ds.task, ds.n_classes);
      REQUIRE(pred.size() == ds.n_rows());
      for (double p : pred) CHECK(std::isfinite(p));
    }
  }
}

TEST_CASE("cross_val_score reaches 1.0 on a perfectly separating column") {
  Dataset ds = gen::synthetic_classification(21, 60);
  // X already contains the separating column f0
  ModelSpec spec;
  spec.kind = ModelKind::DecisionTree;
  spec.max_depth = 2;
  const FoldPlan folds = make_folds(ds, 5, 17);
  const Score s = cross_val_score(ds.X, ds.y, ds.task, ds.n_classes, spec, folds);
  CHECK(s.value == 1.0);
  CHECK(s.metric == Metric::F1Weighted);
  CHECK(s.fold_values.size() == 5);
}

TEST_CASE("cross_val_score is deterministic and averages fold values") {
  const Dataset ds = gen::synthetic_regression(33, 80, 4);
  ModelSpec spec;
  spec.kind = ModelKind::RandomForest;
  spec.seed = 3;
  const FoldPlan folds = make_folds(ds, 5, 2);
  const Score a = cross_val_score(ds.X, ds.y, ds.task, ds.n_classes, spec, folds);
  const Score b = cross_val_score(ds.X, ds.y, ds.task, ds.n_classes, spec, folds);
  CHECK(a.fold_values == b.fold_values);
  double mean = 0.0;
  for (double v : a.fold_values) mean += v;
  mean /= static_cast<double>(a.fold_values.size());
  CHECK(std::fabs(a.value - mean) <= 1e-15);
}

TEST_CASE("a target-copy column scores strictly higher than pure noise") {
  Rng rng(55);
  const std::size_t m = 100;
  Matrix noise = gen::random_matrix(rng, m, 1);
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = rng.uniform(-3, 3);

  Matrix with_copy = noise;
  std::vector<double> copy(m);
  for (std::size_t i = 0; i < m; ++i) copy[i] = y[i];
  with_copy.add_col(std::move(copy));

  Dataset ds;
  ds.task = Task::Regression;
  ds.X = noise;
  ds.y = y;
  const FoldPlan folds = make_folds(ds, 5, 9);
  ModelSpec spec;
  spec.kind = ModelKind::RandomForest;
  spec.seed = 1;
  const double s_noise = cross_val_score(noise, y, Task::Regression, 0, spec, folds).value;
  const double s_copy = cross_val_score(with_copy, y, Task::Regression, 0, spec, folds).value;
  CHECK(s_copy > s_noise);
}
