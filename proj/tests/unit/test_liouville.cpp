#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "opertail/error.hpp"
#include "opertail/liouville.hpp"
#include "opertail/quadrature.hpp"

using namespace opertail;

namespace {

LiouvilleParams id2() { return LiouvilleParams({1.0, 1.0}, DrivingFunction::inverted_dirichlet(3.0)); }

// Integral of the joint density over [0, inf)^d through the triangular map
// x_i = (1 + x_1 + ... + x_(i-1)) u_i / (1 - u_i).
double total_mass(const LiouvilleParams& p, double tol) {
  const std::size_t d = p.dim();
  return quad::cubature_unit(
             [&](std::span<const double> u, std::span<const double> uc) {
               std::vector<double> x(d);
               double jac = 1.0;
               for (std::size_t i = 0; i < d; ++i) {
                 if (uc[i] <= 0.0) return 0.0;
                 const double scale = 1.0 + std::accumulate(x.begin(), x.begin() + i, 0.0);
                 x[i] = scale * u[i] / uc[i];
                 if (!std::isfinite(x[i])) return 0.0;
                 jac *= scale / (uc[i] * uc[i]);
               }
               const double v = joint_density(p, x) * jac;
               return std::isfinite(v) ? v : 0.0;
             },
             d, tol)
      .value;
}

}  // namespace

TEST_CASE("normalizing_constant examples") {
  CHECK(normalizing_constant(id2()) == doctest::Approx(2.0).epsilon(1e-14));
  const LiouvilleParams rapid1({1.0}, DrivingFunction::rapid());
  CHECK(normalizing_constant(rapid1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(LiouvilleParams({1.0, 1.0}, DrivingFunction::inverted_dirichlet(2.0)),
                       doctest::Contains("integrability violated"), IntegrabilityError);
  CHECK_THROWS_AS(LiouvilleParams({1.0, 1.0}, DrivingFunction::inverted_dirichlet(1.5)), IntegrabilityError);
  CHECK_THROWS_AS(LiouvilleParams({1.0, 0.0}, DrivingFunction::inverted_dirichlet(3.0)), DomainError);
  CHECK_THROWS_AS(LiouvilleParams({}, DrivingFunction::inverted_dirichlet(3.0)), DomainError);
  CHECK_THROWS_AS(DrivingFunction::inverted_dirichlet(-1.0), DomainError);

  // Generic RV: quadrature agrees with the Beta-function closed form at gamma = 0.
  const LiouvilleParams gen({0.7, 1.3}, DrivingFunction::generic_rv(3.5));
  const LiouvilleParams idv({0.7, 1.3}, DrivingFunction::inverted_dirichlet(3.5));
  CHECK(gen.normalizing_constant() == doctest::Approx(idv.normalizing_constant()).epsilon(1e-10));
  // beta == sum(a) is integrable only with a log power below -1.
  // int_0^inf t (1+t)^-2 log(e+t)^-2.5 dt: [0,1] in t, then t = e^y piecewise up
  // to y = 1e8 plus the analytic remainder int_Y^inf y^-2.5 dy (reference value
  // 0.58439607978452 from 30-digit quadrature).
  const LiouvilleParams edge({1.0, 1.0}, DrivingFunction::generic_rv(2.0, -2.5));
  const auto kern = [](double t) { return t * std::pow(1 + t, -2.0) * std::pow(std::log(std::exp(1.0) + t), -2.5); };
  const auto kern_y = [](double y) {
    return std::pow(1 + std::exp(-y), -2.0) * std::pow(y + std::log1p(std::exp(1.0 - y)), -2.5);
  };
  double oracle = quad::integrate(kern, 0.0, 1.0, 1e-12).value + quad::integrate(kern_y, 0.0, 1.0, 1e-12).value;
  for (double lo = 1.0; lo < 1e8; lo *= 10) oracle += quad::integrate(kern_y, lo, lo * 10, 1e-12).value;
  oracle += std::pow(1e8, -1.5) / 1.5;
  CHECK(oracle == doctest::Approx(0.58439607978452).epsilon(1e-10));
  CHECK(edge.radial_integral() == doctest::Approx(oracle).epsilon(1e-9));
  CHECK_THROWS_AS(LiouvilleParams({1.0, 1.0}, DrivingFunction::generic_rv(2.0, -1.0)), IntegrabilityError);
  CHECK_THROWS_AS(LiouvilleParams({1.0, 1.0}, DrivingFunction::generic_rv(1.9, 5.0)), IntegrabilityError);
}

TEST_CASE("driving functions") {
  CHECK(DrivingFunction::inverted_dirichlet(3.0)(1.0) == doctest::Approx(0.125));
  CHECK(DrivingFunction::rapid()(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(*DrivingFunction::generic_rv(2.5, 1.0).rv_index() == 2.5);
  CHECK(*DrivingFunction::inverted_dirichlet(3.0).rv_index() == 3.0);
  CHECK_FALSE(DrivingFunction::rapid().rv_index().has_value());
}

TEST_CASE("joint_density examples") {
  const auto p = id2();
  const double zero[] = {0.0, 0.0};
  CHECK(joint_density(p, zero) == doctest::Approx(2.0));
  const double one[] = {1.0, 1.0};
  CHECK(joint_density(p, one) == doctest::Approx(2.0 / 27.0).epsilon(1e-14));
  const LiouvilleParams a21({2.0, 1.0}, DrivingFunction::inverted_dirichlet(4.0));
  double prev = INFINITY;
  for (double x1 : {1e-1, 1e-3, 1e-6}) {
    const double x[] = {x1, 1.0};
    const double v = joint_density(a21, x);
    CHECK(v < prev);
    prev = v;
  }
  const double edge[] = {0.0, 1.0};
  CHECK(joint_density(a21, edge) == 0.0);
  const LiouvilleParams half({0.5, 1.0}, DrivingFunction::inverted_dirichlet(4.0));
  CHECK(std::isinf(joint_density(half, edge)));
  const double three[] = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(joint_density(p, three), DomainError);
  const double neg[] = {-1.0, 1.0};
  CHECK_THROWS_AS(joint_density(p, neg), DomainError);
}

TEST_CASE("joint density integrates to one") {
  CHECK(total_mass(id2(), 1e-9) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(total_mass(LiouvilleParams({1.0, 1.0, 1.0}, DrivingFunction::inverted_dirichlet(4.0)), 1e-7) ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK(total_mass(LiouvilleParams({0.6, 2.0}, DrivingFunction::generic_rv(4.0, 0.5)), 1e-9) ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK(total_mass(LiouvilleParams({1.5, 0.8, 1.2}, DrivingFunction::rapid()), 1e-7) ==
        doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("radial distribution") {
  const auto p = id2();
  CHECK(radial_cdf(p, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(radial_quantile(p, 0.25) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(radial_cdf(p, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
  for (double r : {1e-3, 0.1, 0.7, 3.0, 40.0, 1e5}) {
    const double oracle = std::pow(r / (1.0 + r), 2.0);
    CHECK(std::abs(radial_cdf(p, r) - oracle) < 1e-10);
    CHECK(radial_survival(p, r) == doctest::Approx(1.0 - oracle).epsilon(1e-9));
  }
  CHECK_THROWS_AS(radial_quantile(p, 0.0), DomainError);
  CHECK_THROWS_AS(radial_quantile(p, 1.0), DomainError);
  CHECK_THROWS_AS(radial_quantile(p, -0.2), DomainError);

  const LiouvilleParams gen({0.7, 1.3}, DrivingFunction::generic_rv(3.2, 1.5));
  for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(radial_cdf(gen, radial_quantile(gen, q)) == doctest::Approx(q).epsilon(1e-9));
  for (double s : {1e-3, 1e-6, 1e-9})
    CHECK(radial_survival(gen, radial_upper_quantile(gen, s)) == doctest::Approx(s).epsilon(1e-8));
  // Radial density by differencing the CDF against the kernel t^(A-1) g(t) / I.
  const double t = 2.0, h = 1e-4;
  const double numeric = (radial_cdf(gen, t + h) - radial_cdf(gen, t - h)) / (2 * h);
  const double kernel = std::pow(t, gen.shape_sum() - 1.0) * gen.g()(t) / gen.radial_integral();
  CHECK(numeric == doctest::Approx(kernel).epsilon(1e-6));
  const LiouvilleParams rapid({2.0, 1.0}, DrivingFunction::rapid());
  CHECK(radial_cdf(rapid, 1.5) == doctest::Approx(1.0 - std::exp(-1.5) * (1 + 1.5 + 1.125)).epsilon(1e-13));
}

TEST_CASE("sampler determinism and margins") {
  const auto p = id2();
  const auto a = sample(p, 10, 7);
  const auto b = sample(p, 10, 7);
  const auto c = sample(p, 10, 7, 4);
  CHECK(a.data == b.data);
  CHECK(a.data == c.data);
  CHECK(sample(p, 10, 8).data != a.data);
  CHECK(a.rows == 10);
  CHECK(a.cols == 2);
  for (double v : a.data) CHECK(v > 0.0);

  const auto big = sample(p, 1000000, 20240917);
  auto col = big.column(0);
  std::nth_element(col.begin(), col.begin() + 500000, col.end());
  CHECK(col[500000] == doctest::Approx(1.0).epsilon(0.02));
  CHECK_THROWS_AS(sample(p, 0, 1), DomainError);
}

TEST_CASE("sampler chi-square on a 20x20 grid over [0,2]^2") {
  const auto p = id2();
  const std::size_t n = 1000000;
  const int m = 20;
  const double width = 2.0 / m;
  const auto xs = sample(p, n, 20240917);
  std::vector<double> counts(m * m + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = xs.row(r);
    if (x[0] < 2.0 && x[1] < 2.0)
      counts[static_cast<int>(x[0] / width) * m + static_cast<int>(x[1] / width)] += 1.0;
    else
      counts[m * m] += 1.0;
  }
  double inside = 0.0, chi2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double prob = quad::cubature_unit(
                              [&](std::span<const double> u, std::span<const double>) {
                                const double x[] = {(i + u[0]) * width, (j + u[1]) * width};
                                return joint_density(p, x);
                              },
                              2, 1e-10)
                              .value *
                          width * width;
      inside += prob;
      const double expected = prob * n;
      chi2 += std::pow(counts[i * m + j] - expected, 2) / expected;
    }
  const double expected_out = (1.0 - inside) * n;
  chi2 += std::pow(counts[m * m] - expected_out, 2) / expected_out;
  // Independent check of the cell total: P(X1 < 2, X2 < 2) = 1 - 2/3 - 2/3 + 1/5.
  const double f_x2 = 2.0 / 3.0;  // P(X_1 < 2)
  CHECK(inside == doctest::Approx(2 * f_x2 - 1.0 + 0.2).epsilon(1e-9));
  const boost::math::chi_squared dist(m * m);  // m*m + 1 bins, no fitted parameters
  const double critical = boost::math::quantile(boost::math::complement(dist, 0.001));
  INFO("chi2 = " << chi2 << ", critical = " << critical);
  CHECK(chi2 < critical);
}

TEST_CASE("Weyl integral and marginal density") {
  const auto p = id2();
  CHECK(p.marginal_constant(0) == doctest::Approx(2.0));
  CHECK(marginal_density(p, 0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(marginal_density(p, 0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  double worst = 0.0;
  for (double x = 0.0; x <= 50.0; x += 0.25)
    worst = std::max(worst, std::abs(marginal_density(p, 0, x) - std::pow(1.0 + x, -2.0)));
  CHECK(worst < 1e-8);
  for (double x : {0.01, 0.5, 3.0, 20.0}) CHECK(marginal_density(p, 0, x) == marginal_density(p, 1, x));
  CHECK(weyl_integral(p.g(), 1.0, 2.0) == doctest::Approx(0.5 / 9.0).epsilon(1e-12));
  CHECK(weyl_integral(p.g(), 0.0, 2.0) == doctest::Approx(1.0 / 27.0).epsilon(1e-15));
  // Order 1/2 against the Beta-function closed form Gamma(theta - 1/2)/Gamma(theta) (1+x)^(1/2 - theta).
  const double x = 1.5;
  const double closed = std::tgamma(2.5) / std::tgamma(3.0) * std::pow(1.0 + x, 0.5 - 3.0);
  CHECK(weyl_integral(p.g(), 0.5, x) == doctest::Approx(closed).epsilon(1e-10));
  CHECK_THROWS_AS(marginal_density(p, 2, 1.0), DomainError);
}

TEST_CASE("marginal densities integrate to one; marginal CDF matches nested quadrature") {
  const LiouvilleParams gen({0.6, 1.4, 2.0}, DrivingFunction::generic_rv(4.5, 0.7));
  for (std::size_t i = 0; i < gen.dim(); ++i) {
    const double mass =
        quad::integrate_to_infinity([&](double s) { return marginal_density(gen, i, s); }, 0.0, 1.0, 1e-9).value;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    for (double xv : {0.2, 1.0, 5.0}) {
      const double nested = quad::integrate([&](double s) { return marginal_density(gen, i, s); }, 0.0, xv, 1e-10).value;
      CHECK(marginal_cdf(gen, i, xv) == doctest::Approx(nested).epsilon(1e-7));
      CHECK(marginal_cdf(gen, i, xv) + marginal_survival(gen, i, xv) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("marginal CDF and quantiles") {
  const auto p = id2();
  CHECK(marginal_cdf(p, 0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(marginal_quantile(p, 0, 0.9) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(marginal_cdf(p, 0, marginal_quantile(p, 0, 0.5)) == doctest::Approx(0.5).epsilon(1e-9));
  for (double u : {0.001, 0.2, 0.77, 0.999}) CHECK(marginal_quantile(p, 1, u) == doctest::Approx(u / (1 - u)).epsilon(1e-12));
  CHECK(marginal_upper_quantile(p, 0, 1e-9) == doctest::Approx(1e9 - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(marginal_quantile(p, 0, 1.0), DomainError);
  CHECK_THROWS_AS(marginal_quantile(p, 0, 0.0), DomainError);

  const LiouvilleParams gen({0.6, 1.4}, DrivingFunction::generic_rv(3.0, -0.5));
  for (double q : {1e-4, 0.1, 0.5, 0.95}) {
    CHECK(marginal_cdf(gen, 0, marginal_quantile(gen, 0, q)) == doctest::Approx(q).epsilon(1e-9));
    CHECK(marginal_survival(gen, 1, marginal_upper_quantile(gen, 1, q * 1e-3)) == doctest::Approx(q * 1e-3).epsilon(1e-8));
  }
}

TEST_CASE("Landau: marginal density ultimately non-increasing") {
  const LiouvilleParams gen({1.5, 2.0}, DrivingFunction::generic_rv(5.0, 1.0));
  double prev = INFINITY;
  for (double x = 10.0; x < 1e8; x *= 1.5) {
    const double v = marginal_density(gen, 0, x);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("limiting_density examples and density-limit convergence") {
  const auto p = id2();
  const DiagExponent id({1.0, 1.0});
  const DiagExponent e12({1.0, 2.0});
  const double one[] = {1.0, 1.0};
  CHECK(limiting_density(p, id, one) == doctest::Approx(0.25));
  const double x51[] = {5.0, 1.0};
  CHECK(limiting_density(p, e12, x51) == doctest::Approx(2.0));
  CHECK(operator_rho(p, id) == doctest::Approx(1.0));
  CHECK(operator_rho(p, e12) == doctest::Approx(3.0));

  // x -> t^E x multiplies the value by t^(-beta lambda_max + sum lambda_i (a_i - 1)).
  const LiouvilleParams q({0.5, 2.0}, DrivingFunction::generic_rv(4.0, 1.0));
  const DiagExponent e({0.5, 1.5});
  const double xq[] = {0.7, 1.9};
  for (double t : {0.5, 2.0, 10.0}) {
    const double tx[] = {std::pow(t, 0.5) * xq[0], std::pow(t, 1.5) * xq[1]};
    const double power = -4.0 * 1.5 + 0.5 * (0.5 - 1.0) + 1.5 * (2.0 - 1.0);
    CHECK(limiting_density(q, e, tx) == doctest::Approx(std::pow(t, power) * limiting_density(q, e, xq)).epsilon(1e-12));
  }

  // f(t^E x) / (t^-trE V(t)) -> lambda(x) at t = 1e4 (log factor: slow, within 1% only for gamma = 0 at this t).
  for (const auto& [params, ex] : {std::pair{p, id}, std::pair{p, e12},
                                   std::pair{LiouvilleParams({0.5, 2.0}, DrivingFunction::generic_rv(4.0)), e}}) {
    const double t = 1e4;
    for (double a : {0.5, 1.0, 2.0})
      for (double b : {0.5, 1.0, 2.0}) {
        const double x[] = {a, b};
        const double tx[] = {std::pow(t, ex[0]) * a, std::pow(t, ex[1]) * b};
        const double ratio = joint_density(params, tx) / (std::pow(t, -ex.trace()) * operator_normalizer(params, ex, t));
        CHECK(ratio == doctest::Approx(limiting_density(params, ex, x)).epsilon(0.01));
      }
  }

  const LiouvilleParams rapid({1.0, 1.0}, DrivingFunction::rapid());
  CHECK_THROWS_WITH_AS(limiting_density(rapid, id, one), doctest::Contains("not operator-regularly varying"),
                       NotRegularlyVaryingError);
  const double off[] = {1.0, 0.0};
  CHECK_THROWS_AS(limiting_density(p, e12, off), DivergenceError);
}
