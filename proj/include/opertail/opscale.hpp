#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "opertail/regvar.hpp"

namespace opertail {

/// Diagonal tail-index matrix E = diag(lambda_1, ..., lambda_d), lambda_i > 0.
class DiagExponent {
 public:
  explicit DiagExponent(std::vector<double> eigenvalues);

  std::size_t dim() const noexcept { return eigenvalues_.size(); }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  double operator[](std::size_t i) const { return eigenvalues_.at(i); }

  double trace() const noexcept { return trace_; }
  double max() const noexcept { return max_; }
  /// Indices attaining the maximal eigenvalue; never empty.
  const std::vector<std::size_t>& argmax() const noexcept { return argmax_; }
  bool in_argmax(std::size_t i) const noexcept;

 private:
  std::vector<double> eigenvalues_;
  double trace_ = 0.0;
  double max_ = 0.0;
  std::vector<std::size_t> argmax_;
};

/// Dense row-major square matrix.
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n);
  static SquareMatrix identity(std::size_t n);
  static SquareMatrix diagonal(std::span<const double> diag);
  /// Throws DomainError for ragged, non-square or non-finite input.
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  bool is_diagonal() const noexcept;
  double norm1() const noexcept;
  std::vector<std::vector<double>> rows() const;

  friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator+(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b);
  friend SquareMatrix operator*(double s, const SquareMatrix& a);

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Largest absolute entry of a - b.
double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b);

/// exp(M) by scaling and squaring of a truncated Taylor series.
SquareMatrix matrix_exponential(const SquareMatrix& m);

/// t^E = exp(E log t). The diagonal overload is exact: diag(t^lambda_i).
SquareMatrix power_matrix(const DiagExponent& e, double t);
SquareMatrix power_matrix(const SquareMatrix& e, double t);

/// g(t) = t^E L(t) with L(t) = diag(l_1(t), ..., l_d(t)), each l_i slowly varying.
struct ScalingFunction {
  DiagExponent exponent;
  std::vector<RVSpec> slow_factors;

  explicit ScalingFunction(DiagExponent e);  // L == identity
  ScalingFunction(DiagExponent e, std::vector<RVSpec> slow);
};

std::vector<double> scale_vector(const ScalingFunction& g, double t, std::span<const double> x);

/// Quasi-homogeneous gauge [x] = sum_i |x_i|^(1/lambda_i); [t^E x] = t [x].
double gauge(const DiagExponent& e, std::span<const double> x);

struct GaugeDecomposition {
  double radius = 0.0;
  std::vector<double> direction;  // lies on the unit gauge sphere
};

/// x = radius^E direction with gauge(direction) = 1. Throws for x = 0.
GaugeDecomposition gauge_decompose(const DiagExponent& e, std::span<const double> x);

}  // namespace opertail
