#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace featforge {

// Column-major numeric matrix. Columns are the working unit throughout:
// expressions evaluate to columns, the state representation summarizes
// columns, and models pull rows on demand.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols, std::vector<double>(rows, fill)) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (rows.empty()) return m;
    const std::size_t nc = rows.front().size();
    m.rows_ = rows.size();
    m.cols_.assign(nc, std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != nc) throw std::invalid_argument("Matrix::from_rows: ragged rows");
      for (std::size_t j = 0; j < nc; ++j) m.cols_[j][i] = rows[i][j];
    }
    return m;
  }

  static Matrix from_columns(std::vector<std::vector<double>> cols) {
    Matrix m;
    if (cols.empty()) return m;
    m.rows_ = cols.front().size();
    for (const auto& c : cols)
      if (c.size() != m.rows_) throw std::invalid_argument("Matrix::from_columns: ragged columns");
    m.cols_ = std::move(cols);
    return m;
  }

  std::size_t n_rows() const { return rows_; }
  std::size_t n_cols() const { return cols_.size(); }
  bool empty() const { return rows_ == 0 || cols_.empty(); }

  double at(std::size_t i, std::size_t j) const { return cols_[j][i]; }
  double& at(std::size_t i, std::size_t j) { return cols_[j][i]; }

  const std::vector<double>& col(std::size_t j) const { return cols_[j]; }
  std::vector<double>& col(std::size_t j) { return cols_[j]; }

  std::vector<double> row(std::size_t i) const {
    std::vector<double> r(n_cols());
    for (std::size_t j = 0; j < n_cols(); ++j) r[j] = cols_[j][i];
    return r;
  }

  void add_col(std::vector<double> c) {
    if (cols_.empty())
      rows_ = c.size();
    else if (c.size() != rows_)
      throw std::invalid_argument("Matrix::add_col: length mismatch");
    cols_.push_back(std::move(c));
  }

  // Rows selected by index, all columns. Used for CV fold slicing.
  Matrix select_rows(const std::vector<std::size_t>& idx) const {
    Matrix m;
    m.rows_ = idx.size();
    m.cols_.assign(n_cols(), std::vector<double>(idx.size()));
    for (std::size_t j = 0; j < n_cols(); ++j)
      for (std::size_t i = 0; i < idx.size(); ++i) m.cols_[j][i] = cols_[j][idx[i]];
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<double>> cols_;
};

}  // namespace featforge
