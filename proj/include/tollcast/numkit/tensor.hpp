#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tollcast::numkit {

/// Raised when a computation produces or receives NaN/Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  /// Rejects a value count that does not match the shape and any non-finite value.
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  /// First dimension; 1 for a scalar.
  std::size_t rows() const { return shape_.empty() ? 1 : shape_.front(); }
  /// Product of all but the first dimension.
  std::size_t cols() const { return rows() == 0 ? 0 : size() / rows(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  void fill(double v);
  bool all_finite() const;
  /// Throws NumericalError naming `what` if any entry is NaN/Inf.
  void require_finite(std::string_view what) const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// C = A * B for A (n x k), B (k x m). Fixed summation order.
Tensor matmul(const Tensor& a, const Tensor& b);
/// C = A^T * B for A (k x n), B (k x m).
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// C = A * B^T for A (n x k), B (m x k).
Tensor matmul_nt(const Tensor& a, const Tensor& b);

}  // namespace tollcast::numkit
