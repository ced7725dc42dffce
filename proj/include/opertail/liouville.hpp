#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "opertail/opscale.hpp"

namespace opertail {

/// g(t) = (1 + t)^-theta.
struct InvertedDirichlet {
  double theta = 0.0;
};
/// g(t) = (1 + t)^-beta * log(e + t)^gamma.
struct GenericRV {
  double beta = 0.0;
  double gamma = 0.0;
};
/// g(t) = exp(-t); rapidly varying, used as a negative control.
struct Rapid {};

/// Driving function g of a Liouville density, continuous on [0, inf).
class DrivingFunction {
 public:
  using Variant = std::variant<InvertedDirichlet, GenericRV, Rapid>;

  DrivingFunction(Variant v);  // NOLINT(google-explicit-constructor)

  static DrivingFunction inverted_dirichlet(double theta) { return {InvertedDirichlet{theta}}; }
  static DrivingFunction generic_rv(double beta, double gamma = 0.0) { return {GenericRV{beta, gamma}}; }
  static DrivingFunction rapid() { return {Rapid{}}; }

  double operator()(double t) const;
  /// log g(t), finite wherever g(t) underflows.
  double log_value(double t) const;
  /// beta such that g is in RV_-beta; empty for the rapidly varying variant.
  std::optional<double> rv_index() const;
  const Variant& variant() const noexcept { return v_; }
  std::string name() const;

 private:
  Variant v_;
};

/// Shape vector a and driving function g of L_d[g; a_1, ..., a_d].
///
/// Construction checks a_i > 0 and the integrability of t^(sum a - 1) g(t) on
/// (0, inf), throwing IntegrabilityError otherwise, and caches the radial
/// integral together with the normalizing constant.
class LiouvilleParams {
 public:
  LiouvilleParams(std::vector<double> a, DrivingFunction g);

  std::size_t dim() const noexcept { return a_.size(); }
  const std::vector<double>& a() const noexcept { return a_; }
  const DrivingFunction& g() const noexcept { return g_; }
  double shape_sum() const noexcept { return shape_sum_; }
  /// int_0^inf t^(sum a - 1) g(t) dt
  double radial_integral() const noexcept { return radial_integral_; }
  /// Gamma(sum a) / (prod Gamma(a_i) * radial_integral)
  double normalizing_constant() const noexcept { return c_f_; }
  /// kappa_i with f_i(x) = kappa_i W^{a^(i)} g(x) x^(a_i - 1).
  double marginal_constant(std::size_t i) const { return marginal_constants_.at(i); }
  /// sum_{j != i} a_j, the order of the Weyl integral for margin i.
  double complementary_shape(std::size_t i) const { return shape_sum_ - a_.at(i); }

 private:
  std::vector<double> a_;
  DrivingFunction g_;
  double shape_sum_ = 0.0;
  double radial_integral_ = 0.0;
  double c_f_ = 0.0;
  std::vector<double> marginal_constants_;
};

double normalizing_constant(const LiouvilleParams& p);

/// c_f g(sum x) prod x_i^(a_i - 1). On the boundary x_i = 0 this is the
/// continuous extension when a_i >= 1 and +inf when a_i < 1.
double joint_density(const LiouvilleParams& p, std::span<const double> x);

// Radial part R = sum X_i, density proportional to t^(sum a - 1) g(t).
double radial_cdf(const LiouvilleParams& p, double r);
double radial_survival(const LiouvilleParams& p, double r);
double radial_quantile(const LiouvilleParams& p, double q);
/// Inverse of the survival function; accurate for tail probabilities s << 1.
double radial_upper_quantile(const LiouvilleParams& p, double s);

struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::vector<double> column(std::size_t j) const;
};

/// n i.i.d. rows X = R * D, D ~ Dirichlet(a), R by quantile inversion. Row i
/// draws from CounterRng(seed, i), so output is independent of `jobs`.
SampleMatrix sample(const LiouvilleParams& p, std::size_t n, std::uint64_t seed, unsigned jobs = 1);

/// Weyl fractional integral (1/Gamma(order)) int_x^inf (s - x)^(order-1) g(s) ds.
/// order == 0 returns g(x).
double weyl_integral(const DrivingFunction& g, double order, double x);

double marginal_density(const LiouvilleParams& p, std::size_t i, double x);
double marginal_cdf(const LiouvilleParams& p, std::size_t i, double x);
double marginal_survival(const LiouvilleParams& p, std::size_t i, double x);
double marginal_quantile(const LiouvilleParams& p, std::size_t i, double q);
/// x with marginal_survival(x) = s; accurate for s << 1.
double marginal_upper_quantile(const LiouvilleParams& p, std::size_t i, double s);

/// Operator limit c_f (sum_{i in (lambda)} x_i)^-beta prod x_i^(a_i - 1) of
/// f(t^E x) / (t^-tr(E) V(t)).
double limiting_density(const LiouvilleParams& p, const DiagExponent& e, std::span<const double> x);

/// V(t) = g(t^lambda_max) t^(sum lambda_i a_i), the normalizer paired with
/// limiting_density.
double operator_normalizer(const LiouvilleParams& p, const DiagExponent& e, double t);

/// rho = lambda_max beta - sum lambda_i a_i; V is in RV_-rho.
double operator_rho(const LiouvilleParams& p, const DiagExponent& e);

}  // namespace opertail
