#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace visitlab {

// Small dense row-major matrix. Everything here is at most a few dozen
// states, so no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<std::vector<double>> to_rows() const;
  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> row_times(const std::vector<double>& v, const Matrix& a);
std::vector<double> times_col(const Matrix& a, const std::vector<double>& v);
Matrix hadamard_power(const Matrix& a, double exponent);

// Strong connectivity of the directed graph {i -> j : a(i,j) > 0}.
bool is_irreducible(const Matrix& a);

void require_stochastic(const Matrix& q, double tol = 1e-12);

double spectral_radius(const Matrix& a, double tol = 1e-12, std::size_t max_iter = 100000);

}  // namespace visitlab
