#include "opertail/opscale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opertail/error.hpp"

namespace opertail {

DiagExponent::DiagExponent(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) throw DomainError("DiagExponent: dimension must be at least 1");
  for (double l : eigenvalues_) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw DomainError("DiagExponent: eigenvalues must be finite and > 0, got " + std::to_string(l));
    trace_ += l;
  }
  max_ = *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i)
    if (eigenvalues_[i] == max_) argmax_.push_back(i);
}

bool DiagExponent::in_argmax(std::size_t i) const noexcept {
  return std::find(argmax_.begin(), argmax_.end(), i) != argmax_.end();
}

SquareMatrix::SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw DomainError("SquareMatrix: dimension must be at least 1");
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
  SquareMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  SquareMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw DomainError("SquareMatrix: row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(rows.size()) + " (non-square input)");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (!std::isfinite(rows[i][j])) throw DomainError("SquareMatrix: non-finite entry");
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

bool SquareMatrix::is_diagonal() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && (*this)(i, j) != 0.0) return false;
  return true;
}

double SquareMatrix::norm1() const noexcept {
  double best = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n_; ++i) col += std::abs((*this)(i, j));
    best = std::max(best, col);
  }
  return best;
}

std::vector<std::vector<double>> SquareMatrix::rows() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
  return out;
}

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.n_ != b.n_) throw DomainError("SquareMatrix: dimension mismatch in product");
  SquareMatrix c(a.n_);
  for (std::size_t i = 0; i < a.n_; ++i)
    for (std::size_t k = 0; k < a.n_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

SquareMatrix operator+(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.n_ != b.n_) throw DomainError("SquareMatrix: dimension mismatch in sum");
  SquareMatrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b) { return a + (-1.0) * b; }

SquareMatrix operator*(double s, const SquareMatrix& a) {
  SquareMatrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("SquareMatrix: dimension mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) best = std::max(best, std::abs(a(i, j) - b(i, j)));
  return best;
}

SquareMatrix matrix_exponential(const SquareMatrix& m) {
  const std::size_t n = m.dim();
  if (m.is_diagonal()) {
    SquareMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = std::exp(m(i, i));
    return out;
  }
  // Scale so that ||A||_1 <= 1/2, sum the series until terms drop below 1e-14
  // of the partial sum, then square back.
  const double norm = m.norm1();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const SquareMatrix a = std::ldexp(1.0, -squarings) * m;

  SquareMatrix sum = SquareMatrix::identity(n);
  SquareMatrix term = SquareMatrix::identity(n);
  for (int k = 1; k <= 64; ++k) {
    term = (1.0 / k) * (term * a);
    sum = sum + term;
    if (term.norm1() <= 1e-14 * sum.norm1()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

SquareMatrix power_matrix(const DiagExponent& e, double t) {
  if (!(t > 0.0)) throw DomainError("power_matrix: t must be > 0");
  SquareMatrix out(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) out(i, i) = std::pow(t, e[i]);
  return out;
}

SquareMatrix power_matrix(const SquareMatrix& e, double t) {
  if (!(t > 0.0)) throw DomainError("power_matrix: t must be > 0");
  if (e.is_diagonal()) {
    SquareMatrix out(e.dim());
    for (std::size_t i = 0; i < e.dim(); ++i) out(i, i) = std::pow(t, e(i, i));
    return out;
  }
  return matrix_exponential(std::log(t) * e);
}

ScalingFunction::ScalingFunction(DiagExponent e)
    : exponent(std::move(e)), slow_factors(exponent.dim(), RVSpec{}) {}

ScalingFunction::ScalingFunction(DiagExponent e, std::vector<RVSpec> slow)
    : exponent(std::move(e)), slow_factors(std::move(slow)) {
  if (slow_factors.size() != exponent.dim())
    throw DomainError("ScalingFunction: need one slow factor per coordinate");
  for (const auto& l : slow_factors)
    if (l.rho != 0.0) throw DomainError("ScalingFunction: slow factors must have rho = 0");
}

std::vector<double> scale_vector(const ScalingFunction& g, double t, std::span<const double> x) {
  if (!(t > 0.0)) throw DomainError("scale_vector: t must be > 0");
  if (x.size() != g.exponent.dim())
    throw DomainError("scale_vector: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                      std::to_string(g.exponent.dim()) + ")");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::pow(t, g.exponent[i]) * g.slow_factors[i](t) * x[i];
  return out;
}

double gauge(const DiagExponent& e, std::span<const double> x) {
  if (x.size() != e.dim()) throw DomainError("gauge: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) sum += std::pow(std::abs(x[i]), 1.0 / e[i]);
  return sum;
}

GaugeDecomposition gauge_decompose(const DiagExponent& e, std::span<const double> x) {
  const double r = gauge(e, x);
  if (!(r > 0.0)) throw DomainError("gauge_decompose: x must be non-zero");
  GaugeDecomposition out{r, std::vector<double>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) out.direction[i] = x[i] * std::pow(r, -e[i]);
  return out;
}

}  // namespace opertail
