#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "dagnn/errors.hpp"

namespace dagnn {

// Dense row-major array of 64-bit reals. Vectors are stored as (len, 1),
// scalars as (1, 1). This is the only numeric container in the library.
class DenseArray {
 public:
  DenseArray() = default;

  static DenseArray zeros(std::size_t rows, std::size_t cols) {
    DenseArray a;
    a.rows_ = rows;
    a.cols_ = cols;
    a.data_.assign(rows * cols, 0.0);
    return a;
  }

  static DenseArray vector(std::size_t len) { return zeros(len, 1); }

  static DenseArray scalar(double v) {
    DenseArray a = zeros(1, 1);
    a.data_[0] = v;
    return a;
  }

  static DenseArray from(std::initializer_list<double> values) {
    DenseArray a;
    a.rows_ = values.size();
    a.cols_ = 1;
    a.data_.assign(values.begin(), values.end());
    return a;
  }

  static DenseArray from_rows(std::size_t rows, std::size_t cols,
                              std::vector<double> data) {
    if (data.size() != rows * cols)
      throw ShapeError("from_rows: data length does not match shape");
    DenseArray a;
    a.rows_ = rows;
    a.cols_ = cols;
    a.data_ = std::move(data);
    return a;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_vector() const { return cols_ == 1; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const DenseArray& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(double v) {
    for (double& x : data_) x = v;
  }

  bool operator==(const DenseArray& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace dagnn
