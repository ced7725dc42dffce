#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opertail {

/// Parametric regularly varying function V(t) = c * t^rho * log(e + t)^gamma.
///
/// gamma is the exponent of the slowly varying log factor, so V is in RV_rho
/// by construction. The same type represents functions regularly varying at
/// zero through r(u) = V(1/u); see eval_rv_at_zero().
struct RVSpec {
  double c = 1.0;
  double rho = 0.0;
  double gamma = 0.0;

  RVSpec() = default;
  RVSpec(double scale, double index, double log_power = 0.0);

  /// r(u) = c * u^index * log(e + 1/u)^gamma, i.e. r in RV_index(0).
  static RVSpec at_zero(double scale, double index, double log_power = 0.0) {
    return {scale, -index, log_power};
  }
  double index_at_zero() const noexcept { return -rho; }

  double operator()(double t) const;
};

/// Pointwise product; indices and log powers add.
RVSpec operator*(const RVSpec& lhs, const RVSpec& rhs);

double eval_rv(const RVSpec& v, double t);
double eval_rv_at_zero(const RVSpec& v, double u);

using ScalarFunction = std::function<double(double)>;

struct RatioDefect {
  std::vector<double> defects;
  bool regularly_varying = false;
  std::string verdict;
};

/// |V(t x)/V(t) - x^rho| along an increasing t grid. The verdict is
/// "consistent with RV_rho" when the last three defects are non-increasing and
/// the final one is below `tolerance`; any zero or non-finite value of V gives
/// "not RV".
RatioDefect ratio_limit_defect(const ScalarFunction& v, double rho, double x,
                               std::span<const double> t_grid, double tolerance = 0.05);

/// Finite-t defect of the Karamata relation  survival(t) ~ t density(t) / alpha.
double karamata_defect(const ScalarFunction& density, const ScalarFunction& survival,
                       double alpha, double t);

struct TailIndexEstimate {
  double alpha = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
};

/// Hill estimator over the k largest order statistics. k defaults to
/// ceil(n^0.6).
TailIndexEstimate hill_estimate(std::span<const double> sample,
                                std::optional<std::size_t> k = std::nullopt);

}  // namespace opertail
