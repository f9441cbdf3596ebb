#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "featforge/dataset.hpp"
#include "support/test_helpers.hpp"

using namespace featforge;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

const std::string kTenRows =
    "a,b,t\n"
    "1,2,0\n3,4,1\n5,6,0\n7,8,1\n9,10,0\n11,12,1\n13,14,0\n15,16,1\n17,18,0\n19,20,1\n";

}  // namespace

TEST_CASE("load_csv types a small alternating binary target as classification") {
  const auto path = write_temp("ff_cls.csv", kTenRows);
  const Dataset ds = load_csv(path, "t");
  CHECK(ds.n_rows() == 10);
  CHECK(ds.n_cols() == 2);
  CHECK(ds.task == Task::Classification);
  CHECK(ds.n_classes == 2);
}

TEST_CASE("load_csv infers regression from a distinct real target") {
  std::string csv = "x,t\n";
  for (int i = 0; i < 12; ++i) csv += std::to_string(i) + "," + std::to_string(0.37 * i + 0.001) + "\n";
  const Dataset ds = load_csv(write_temp("ff_reg.csv", csv), "t");
  CHECK(ds.task == Task::Regression);
}

TEST_CASE("load_csv drops a fully empty column with a warning") {
  std::string csv = "a,empty,t\n";
  for (int i = 0; i < 10; ++i) csv += std::to_string(i) + ",," + std::to_string(i * 1.5) + "\n";
  const Dataset ds = load_csv(write_temp("ff_empty.csv", csv), "t");
  CHECK(ds.n_cols() == 1);  // down from 2 feature columns
  REQUIRE_FALSE(ds.warnings.empty());
  CHECK(ds.warnings[0].find("empty") != std::string::npos);
}

TEST_CASE("load_csv imputes missing numerics with the column median") {
  std::string csv = "a,t\n1,0\n2,1\n,0\n4,1\n100,0\n2,1\n1,0\n4,1\n2,0\n4,1\n";
  const Dataset ds = load_csv(write_temp("ff_impute.csv", csv), "t");
  // present values 1,2,4,100,2,1,4,2,4 -> sorted 1,1,2,2,2,4,4,4,100, median 2
  CHECK(ds.X.at(2, 0) == 2.0);
}

TEST_CASE("load_csv label-encodes string columns deterministically") {
  std::string csv = "color,t\n";
  const char* colors[] = {"red", "blue", "red", "green", "blue", "red", "green", "blue", "red", "green"};
  for (int i = 0; i < 10; ++i) csv += std::string(colors[i]) + "," + std::to_string(i % 2) + "\n";
  const auto path = write_temp("ff_cat.csv", csv);
  const Dataset ds = load_csv(path, "t");
  CHECK(ds.X.at(0, 0) == 0.0);  // red first seen
  CHECK(ds.X.at(1, 0) == 1.0);  // blue second
  CHECK(ds.X.at(3, 0) == 2.0);  // green third

  const Dataset again = load_csv(path, "t");
  CHECK(again.X.col(0) == ds.X.col(0));
  CHECK(again.y == ds.y);
}

TEST_CASE("load_csv rejects bad inputs") {
  CHECK_THROWS_AS(load_csv(write_temp("ff_short.csv", "a,t\n1,2\n3,4\n"), "t"), LoadError);
  CHECK_THROWS_AS(load_csv(write_temp("ff_notarget.csv", kTenRows), "missing"), LoadError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "t"), LoadError);
}

TEST_CASE("load_csv accepts a numeric target index") {
  const Dataset ds = load_csv(write_temp("ff_byindex.csv", kTenRows), "2");
  CHECK(ds.task == Task::Classification);
  CHECK(ds.n_cols() == 2);
}

TEST_CASE("make_folds stratifies a balanced binary target perfectly") {
  const auto path = write_temp("ff_folds.csv", kTenRows);
  const Dataset ds = load_csv(path, "t");
  const FoldPlan plan = make_folds(ds, 5, 42);

  std::map<std::pair<int, int>, int> counts;  // (fold, class) -> n
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    ++counts[{plan.assignments[i], static_cast<int>(ds.y[i])}];
  for (int f = 0; f < 5; ++f)
    for (int c = 0; c < 2; ++c) CHECK(counts[{f, c}] == 1);
}

TEST_CASE("make_folds is deterministic for a fixed seed") {
  const Dataset ds = gen::synthetic_regression(5, 40, 3);
  const FoldPlan a = make_folds(ds, 5, 7);
  const FoldPlan b = make_folds(ds, 5, 7);
  CHECK(a.assignments == b.assignments);
  const FoldPlan c = make_folds(ds, 5, 8);
  CHECK(a.assignments != c.assignments);
}

TEST_CASE("regression folds of 103 rows split 21/21/21/20/20") {
  const Dataset ds = gen::synthetic_regression(11, 103, 3);
  const FoldPlan plan = make_folds(ds, 5, 1);
  std::vector<int> sizes(5, 0);
  for (int a : plan.assignments) ++sizes[static_cast<std::size_t>(a)];
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{20, 20, 21, 21, 21});
}

TEST_CASE("fold assignments partition rows and stay within one per class") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 30 + rng.below(100);
    Dataset ds = gen::synthetic_classification(rng.next_u64(), rows);
    const int k = 2 + static_cast<int>(rng.below(4));

    bool enough = true;
    std::vector<int> class_count(2, 0);
    for (double y : ds.y) ++class_count[static_cast<std::size_t>(y)];
    for (int c : class_count)
      if (c < k) enough = false;
    if (!enough) continue;

    const FoldPlan plan = make_folds(ds, k, rng.next_u64());
    REQUIRE(plan.assignments.size() == rows);

    std::vector<std::vector<int>> per_class(2, std::vector<int>(static_cast<std::size_t>(k), 0));
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < rows; ++i) {
      ++sizes[static_cast<std::size_t>(plan.assignments[i])];
      ++per_class[static_cast<std::size_t>(ds.y[i])][static_cast<std::size_t>(plan.assignments[i])];
    }
    int total = 0;
    for (int s : sizes) {
      CHECK(s >= 1);
      total += s;
    }
    CHECK(total == static_cast<int>(rows));
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    for (const auto& pc : per_class) {
      const auto [clo, chi] = std::minmax_element(pc.begin(), pc.end());
      CHECK(*chi - *clo <= 1);
    }
  }
}

TEST_CASE("make_folds rejects classes smaller than the fold count") {
  Dataset ds = gen::synthetic_classification(3, 40);
  // shrink class 1 to two members
  int kept = 0;
  for (auto& y : ds.y) {
    if (y == 1.0 && kept++ >= 2) y = 0.0;
  }
  CHECK_THROWS_AS(make_folds(ds, 5, 0), FoldError);
  CHECK_THROWS_AS(make_folds(ds, 1, 0), FoldError);
}
