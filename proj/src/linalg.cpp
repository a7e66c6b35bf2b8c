#include "visitlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "visitlab/error.hpp"

namespace visitlab {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) fail(ErrorKind::shape, "Matrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) fail(ErrorKind::shape, "Matrix: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
  return out;
}

std::vector<double> row_times(const std::vector<double>& v, const Matrix& a) {
  if (v.size() != a.rows()) fail(ErrorKind::shape, "row_times: size mismatch");
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += v[i] * a(i, j);
  }
  return out;
}

std::vector<double> times_col(const Matrix& a, const std::vector<double>& v) {
  if (v.size() != a.cols()) fail(ErrorKind::shape, "times_col: size mismatch");
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

Matrix hadamard_power(const Matrix& a, double exponent) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = std::pow(a(i, j), exponent);
  return out;
}

bool is_irreducible(const Matrix& a) {
  if (!a.square()) fail(ErrorKind::shape, "is_irreducible: matrix not square");
  const std::size_t n = a.rows();
  if (n == 0) return false;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = transpose ? a(j, i) : a(i, j);
        if (w > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

void require_stochastic(const Matrix& q, double tol) {
  if (!q.square() || q.rows() == 0) fail(ErrorKind::shape, "transition matrix must be square and nonempty");
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      if (!(q(i, j) >= 0.0)) fail(ErrorKind::invalid_spec, "transition matrix has a negative entry");
      s += q(i, j);
    }
    if (std::abs(s - 1.0) > tol)
      fail(ErrorKind::invalid_spec, "transition matrix row " + std::to_string(i) + " does not sum to one");
  }
}

double spectral_radius(const Matrix& a, double tol, std::size_t max_iter) {
  if (!a.square() || a.rows() == 0) fail(ErrorKind::shape, "spectral_radius: matrix must be square");
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!(a(i, j) >= 0.0)) fail(ErrorKind::invalid_input, "spectral_radius: negative entry");
      scale = std::max(scale, a(i, j));
    }
  if (scale == 0.0) return 0.0;

  // Work on A/scale + I/2: same Perron vector, and the shift makes
  // periodic irreducible matrices primitive so the iteration converges.
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = a(i, j) / scale + (i == j ? 0.5 : 0.0);

  std::vector<double> x(n, 1.0);
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> y = times_col(b, x);
    double num = 0.0, den = 0.0, norm = 0.0;
    // Collatz-Wielandt: min and max of y_i / x_i bracket the radius when x > 0.
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
      num += x[i] * y[i];
      den += x[i] * x[i];
      norm = std::max(norm, std::abs(y[i]));
      if (x[i] > 1e-300) {
        lo = std::min(lo, y[i] / x[i]);
        hi = std::max(hi, y[i] / x[i]);
      } else {
        positive = false;
      }
    }
    const double rq = num / den;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    if (positive && hi - lo < tol) return (0.5 * (lo + hi) - 0.5) * scale;
    // reducible case: some coordinates vanish, fall back to the quotient
    if (!positive && it > 0 && std::abs(rq - prev) < tol) return (rq - 0.5) * scale;
    prev = rq;
  }
  fail(ErrorKind::numeric, "spectral_radius: power iteration did not converge");
}

}  // namespace visitlab
