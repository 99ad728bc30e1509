#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ricci/errors.hpp"

namespace ricci {

// Finitely supported probability measure. Sites are opaque indices
// (graph nodes for neighbourhood measures).
struct DiscreteMeasure {
  std::vector<std::size_t> support;
  std::vector<double> masses;

  std::size_t size() const { return masses.size(); }

  double total() const {
    double s = 0.0;
    for (double m : masses) s += m;
    return s;
  }
};

// Row-major |supp(mu)| x |supp(nu)| ground cost.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw CostError("cost matrix data does not match its shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }

  CostMatrix transposed() const {
    CostMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace ricci
