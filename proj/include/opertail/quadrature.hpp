#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace opertail::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
};

/// Integrand on the open unit interval, called as f(u, 1 - u). Both arguments
/// are accurate near their respective endpoints, which matters for the
/// compactifying maps x = w + u/(1-u).
using UnitIntegrand = std::function<double(double, double)>;

/// Double-exponential (tanh-sinh) rule on (0, 1); tolerates integrable
/// endpoint singularities.
Result integrate_unit(const UnitIntegrand& f, double rel_tol = 1e-10);

/// Integral of f over [a, b] (finite) by tanh-sinh.
Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10);

/// Integral of f over [a, inf) through x = a + scale * u / (1 - u).
Result integrate_to_infinity(const std::function<double(double)>& f, double a, double scale,
                             double rel_tol = 1e-10);

/// Iterated tanh-sinh over [0,1]^d. The integrand receives u and 1 - u.
using CubeIntegrand = std::function<double(std::span<const double>, std::span<const double>)>;
Result cubature_unit(const CubeIntegrand& f, std::size_t dim, double rel_tol = 1e-9);

/// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi),
/// bracketed TOMS 748 iterations until the bracket is below x_tol (relative).
double solve_increasing(const std::function<double(double)>& f, double lo, double hi,
                        double x_tol = 1e-14);

}  // namespace opertail::quad
