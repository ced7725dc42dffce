#include "opertail/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "opertail/error.hpp"

namespace opertail::quad {
namespace {

boost::math::quadrature::tanh_sinh<double>& rule() {  // non-const: boost 1.74 lacks const on the two-argument overload
  thread_local boost::math::quadrature::tanh_sinh<double> instance(12);
  return instance;
}

// Maps boost's (x, distance-to-nearest-endpoint) convention onto (u, 1-u).
double unit_call(const UnitIntegrand& f, double x, double xc) {
  if (xc <= 0.0) {
    const double u = x;  // left half: xc = 0 - x
    return f(u, 1.0 - u);
  }
  return f(1.0 - xc, xc);
}

}  // namespace

Result integrate_unit(const UnitIntegrand& f, double rel_tol) {
  Result r;
  double l1 = 0.0;
  r.value = rule().integrate([&](double x, double xc) { return unit_call(f, x, xc); }, 0.0, 1.0,
                             rel_tol, &r.error, &l1);
  if (!std::isfinite(r.value)) throw NumericalError("quadrature produced a non-finite value");
  return r;
}

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return {};
  const double width = b - a;
  Result r = integrate_unit(
      [&](double u, double uc) { return f(u < 0.5 ? a + width * u : b - width * uc); }, rel_tol);
  r.value *= width;
  r.error *= width;
  return r;
}

Result integrate_to_infinity(const std::function<double(double)>& f, double a, double scale,
                             double rel_tol) {
  return integrate_unit(
      [&](double u, double uc) {
        if (uc <= 0.0) return 0.0;
        const double x = a + scale * u / uc;
        if (!std::isfinite(x)) return 0.0;
        const double v = f(x) * scale / (uc * uc);
        return std::isfinite(v) ? v : 0.0;
      },
      rel_tol);
}

namespace {

Result cube_level(const CubeIntegrand& f, std::size_t level, std::vector<double>& u,
                  std::vector<double>& uc, double rel_tol, double& worst_inner_rel) {
  const std::size_t dim = u.size();
  return integrate_unit(
      [&](double x, double xc) {
        u[level] = x;
        uc[level] = xc;
        if (level + 1 == dim) return f(u, uc);
        Result inner = cube_level(f, level + 1, u, uc, rel_tol, worst_inner_rel);
        if (inner.value != 0.0)
          worst_inner_rel = std::max(worst_inner_rel, std::abs(inner.error / inner.value));
        return inner.value;
      },
      rel_tol);
}

}  // namespace

Result cubature_unit(const CubeIntegrand& f, std::size_t dim, double rel_tol) {
  if (dim == 0) throw DomainError("cubature_unit: dimension must be >= 1");
  std::vector<double> u(dim), uc(dim);
  double worst_inner_rel = 0.0;
  Result r = cube_level(f, 0, u, uc, rel_tol, worst_inner_rel);
  r.error += worst_inner_rel * std::abs(r.value);
  return r;
}

double solve_increasing(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0)
    throw NumericalError("solve_increasing: root not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol * std::max(std::abs(a), std::abs(b)); };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace opertail::quad
