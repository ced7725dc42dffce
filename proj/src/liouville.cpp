#include "opertail/liouville.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "opertail/error.hpp"
#include "opertail/quadrature.hpp"
#include "opertail/rng.hpp"

namespace opertail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRadialTol = 1e-10;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_probability(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError(std::string(what) + ": probability must lie in (0, 1)");
}

// Solves F(x) = target for an increasing F on (0, inf) by bracketing in log x.
double invert_on_half_line(const std::function<double(double)>& increasing, double target) {
  auto f = [&](double logx) { return increasing(std::exp(logx)) - target; };
  double lo = 0.0, hi = 0.0;
  while (f(lo) > 0.0) {
    lo -= 4.0;
    if (lo < -700.0) throw NumericalError("quantile: lower bracket not found");
  }
  while (f(hi) < 0.0) {
    hi += 4.0;
    if (hi > 700.0) throw NumericalError("quantile: upper bracket not found");
  }
  if (lo == hi) return std::exp(lo);
  return std::exp(quad::solve_increasing(f, lo, hi, 1e-15));
}

}  // namespace

DrivingFunction::DrivingFunction(Variant v) : v_(v) {
  std::visit(overloaded{
                 [](const InvertedDirichlet& d) {
                   if (!(d.theta > 0.0) || !std::isfinite(d.theta))
                     throw DomainError("inverted_dirichlet: theta must be finite and > 0");
                 },
                 [](const GenericRV& d) {
                   if (!(d.beta > 0.0) || !std::isfinite(d.beta) || !std::isfinite(d.gamma))
                     throw DomainError("generic_rv: beta must be finite and > 0");
                 },
                 [](const Rapid&) {},
             },
             v_);
}

double DrivingFunction::operator()(double t) const {
  return std::visit(overloaded{
                        [t](const InvertedDirichlet& d) { return std::pow(1.0 + t, -d.theta); },
                        [t](const GenericRV& d) {
                          double v = std::pow(1.0 + t, -d.beta);
                          if (d.gamma != 0.0) v *= std::pow(std::log(std::numbers::e + t), d.gamma);
                          return v;
                        },
                        [t](const Rapid&) { return std::exp(-t); },
                    },
                    v_);
}

double DrivingFunction::log_value(double t) const {
  return std::visit(overloaded{
                        [t](const InvertedDirichlet& d) { return -d.theta * std::log1p(t); },
                        [t](const GenericRV& d) {
                          double v = -d.beta * std::log1p(t);
                          if (d.gamma != 0.0) v += d.gamma * std::log(std::log(std::numbers::e + t));
                          return v;
                        },
                        [t](const Rapid&) { return -t; },
                    },
                    v_);
}

std::optional<double> DrivingFunction::rv_index() const {
  return std::visit(overloaded{
                        [](const InvertedDirichlet& d) -> std::optional<double> { return d.theta; },
                        [](const GenericRV& d) -> std::optional<double> { return d.beta; },
                        [](const Rapid&) -> std::optional<double> { return std::nullopt; },
                    },
                    v_);
}

std::string DrivingFunction::name() const {
  return std::visit(overloaded{
                        [](const InvertedDirichlet&) { return std::string("inverted_dirichlet"); },
                        [](const GenericRV&) { return std::string("generic_rv"); },
                        [](const Rapid&) { return std::string("rapid"); },
                    },
                    v_);
}

namespace {

// int_{e^y0}^inf t^(A-1) g(t) dt for the generic driving function. With t = e^y
// and y = y0 + e^z - 1 the tail, which for beta = A decays only like
// t^-1 log(t)^gamma, becomes exponentially small in z; (A - beta) y is formed
// as one product so nothing cancels at large y.
quad::Result generic_radial_tail(const GenericRV& d, double total, double y0) {
  auto log_kernel = [&](double y) {
    double v = (total - d.beta) * y - d.beta * std::log1p(std::exp(-y));
    if (d.gamma != 0.0) v += d.gamma * std::log(y + std::log1p(std::exp(1.0 - y)));
    return v;
  };
  return quad::integrate_to_infinity(
      [&](double z) {
        const double y = y0 + std::expm1(z);
        return std::isfinite(y) ? std::exp(log_kernel(y) + z) : 0.0;
      },
      0.0, 1.0, kRadialTol);
}

}  // namespace

LiouvilleParams::LiouvilleParams(std::vector<double> a, DrivingFunction g) : a_(std::move(a)), g_(g) {
  if (a_.empty()) throw DomainError("LiouvilleParams: need at least one shape parameter");
  for (double ai : a_)
    if (!(ai > 0.0) || !std::isfinite(ai)) throw DomainError("LiouvilleParams: shape parameters must be > 0");
  for (double ai : a_) shape_sum_ += ai;
  const double total = shape_sum_;

  radial_integral_ = std::visit(
      overloaded{
          [total](const InvertedDirichlet& d) {
            if (!(d.theta > total))
              throw IntegrabilityError("theta = " + std::to_string(d.theta) +
                                       " must exceed sum(a) = " + std::to_string(total));
            return boost::math::beta(total, d.theta - total);
          },
          [total, this](const GenericRV& d) {
            if (d.beta < total || (d.beta == total && !(d.gamma < -1.0)))
              throw IntegrabilityError("beta = " + std::to_string(d.beta) + " with sum(a) = " +
                                       std::to_string(total));
            // [0, 1] directly, [1, inf) through the log-domain tail integral.
            const auto head = quad::integrate(
                [&](double t) { return std::pow(t, total - 1.0) * g_(t); }, 0.0, 1.0, kRadialTol);
            const auto tail = generic_radial_tail(d, total, 0.0);
            quad::Result r{head.value + tail.value, head.error + tail.error};
            if (!(r.value > 0.0) || r.error > 1e-8 * r.value)
              throw NumericalError("radial integral did not converge (error " + std::to_string(r.error) + ")");
            return r.value;
          },
          [total](const Rapid&) { return std::tgamma(total); },
      },
      g_.variant());

  double log_prod_gamma = 0.0;
  for (double ai : a_) log_prod_gamma += std::lgamma(ai);
  c_f_ = std::exp(std::lgamma(total) - log_prod_gamma) / radial_integral_;

  // Integrating out the other coordinates over the simplex gives
  // f_i(x) = c_f prod_{j != i} Gamma(a_j) W^{a^(i)} g(x) x^(a_i - 1).
  marginal_constants_.resize(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i)
    marginal_constants_[i] = c_f_ * std::exp(log_prod_gamma - std::lgamma(a_[i]));
}

double normalizing_constant(const LiouvilleParams& p) { return p.normalizing_constant(); }

double joint_density(const LiouvilleParams& p, std::span<const double> x) {
  if (x.size() != p.dim()) throw DomainError("joint_density: dimension mismatch");
  double sum = 0.0;
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !std::isfinite(x[i])) throw DomainError("joint_density: x must be >= 0");
    sum += x[i];
    const double ai = p.a()[i];
    if (x[i] == 0.0) {
      if (ai < 1.0) return kInf;
      if (ai > 1.0) prod = 0.0;
    } else if (ai != 1.0) {
      prod *= std::pow(x[i], ai - 1.0);
    }
  }
  return p.normalizing_constant() * p.g()(sum) * prod;
}

// ------------------------------------------------------------------- radial

double radial_cdf(const LiouvilleParams& p, double r) {
  if (!(r > 0.0)) throw DomainError("radial_cdf: r must be > 0");
  if (std::isinf(r)) return 1.0;
  const double total = p.shape_sum();
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          return boost::math::ibeta(total, d.theta - total, r / (1.0 + r));
                        },
                        [&](const GenericRV&) {
                          if (r > 1.0) return 1.0 - radial_survival(p, r);
                          auto f = [&](double t) { return std::pow(t, total - 1.0) * p.g()(t); };
                          return quad::integrate(f, 0.0, r, kRadialTol).value / p.radial_integral();
                        },
                        [&](const Rapid&) { return boost::math::gamma_p(total, r); },
                    },
                    p.g().variant());
}

double radial_survival(const LiouvilleParams& p, double r) {
  if (!(r > 0.0)) throw DomainError("radial_survival: r must be > 0");
  if (std::isinf(r)) return 0.0;
  const double total = p.shape_sum();
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          return boost::math::ibeta(d.theta - total, total, 1.0 / (1.0 + r));
                        },
                        [&](const GenericRV& d) {
                          if (r <= 1.0) return 1.0 - radial_cdf(p, r);
                          return generic_radial_tail(d, total, std::log(r)).value / p.radial_integral();
                        },
                        [&](const Rapid&) { return boost::math::gamma_q(total, r); },
                    },
                    p.g().variant());
}

double radial_quantile(const LiouvilleParams& p, double q) {
  check_probability(q, "radial_quantile");
  if (q > 0.5) return radial_upper_quantile(p, 1.0 - q);
  const double total = p.shape_sum();
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          const double z = boost::math::ibeta_inv(total, d.theta - total, q);
                          return z / (1.0 - z);
                        },
                        [&](const GenericRV&) {
                          return invert_on_half_line([&](double r) { return radial_cdf(p, r); }, q);
                        },
                        [&](const Rapid&) { return boost::math::gamma_p_inv(total, q); },
                    },
                    p.g().variant());
}

double radial_upper_quantile(const LiouvilleParams& p, double s) {
  check_probability(s, "radial_upper_quantile");
  if (s > 0.5) return radial_quantile(p, 1.0 - s);
  const double total = p.shape_sum();
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          const double y = boost::math::ibeta_inv(d.theta - total, total, s);
                          return (1.0 - y) / y;
                        },
                        [&](const GenericRV&) {
                          return invert_on_half_line([&](double r) { return -radial_survival(p, r); }, -s);
                        },
                        [&](const Rapid&) { return boost::math::gamma_q_inv(total, s); },
                    },
                    p.g().variant());
}

// ------------------------------------------------------------------ sampling

std::vector<double> SampleMatrix::column(std::size_t j) const {
  if (j >= cols) throw DomainError("SampleMatrix::column: index out of range");
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = data[i * cols + j];
  return out;
}

SampleMatrix sample(const LiouvilleParams& p, std::size_t n, std::uint64_t seed, unsigned jobs) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  const std::size_t d = p.dim();
  SampleMatrix out{n, d, std::vector<double>(n * d)};

  auto fill = [&](std::size_t begin, std::size_t end) {
    std::vector<std::gamma_distribution<double>> gammas;
    for (double ai : p.a()) gammas.emplace_back(ai, 1.0);
    for (std::size_t row = begin; row < end; ++row) {
      CounterRng rng(seed, row);
      double* x = out.data.data() + row * d;
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        gammas[i].reset();
        x[i] = gammas[i](rng);
        total += x[i];
      }
      const double radius = radial_quantile(p, rng.uniform_open());
      for (std::size_t i = 0; i < d; ++i) x[i] = radius * (x[i] / total);
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::size_t>(n, 256))));
  if (jobs == 1) {
    fill(0, n);
    return out;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (unsigned w = 0; w < jobs; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) workers.emplace_back(fill, begin, end);
  }
  return out;
}

// ----------------------------------------------------------------- marginals

namespace {

// log of the Weyl integral. With s = x + (1 + x) u / (1 - u),
//   W = (1+x)^order g(x) / Gamma(order) * int_0^1 (u/(1-u))^(order-1) g(s)/g(x) (1-u)^-2 du,
// and the ratio g(s)/g(x) <= 1 is formed in log space, so nothing underflows
// before the final exponential. The (s - x)^(order-1) endpoint singularity at
// u = 0 is absorbed by the double-exponential rule.
double log_weyl_integral(const DrivingFunction& g, double order, double x) {
  const double scale = 1.0 + x;
  const double log_gx = g.log_value(x);
  const auto r = quad::integrate_unit(
      [&](double u, double uc) {
        if (uc <= 0.0 || u <= 0.0) return 0.0;
        const double ratio = u / uc;
        const double s = x + scale * ratio;
        if (!std::isfinite(s)) return 0.0;
        const double val = std::exp((order - 1.0) * std::log(ratio) + g.log_value(s) - log_gx) / (uc * uc);
        return std::isfinite(val) ? val : 0.0;
      },
      1e-12);
  if (!(r.value > 0.0) || r.error > 1e-8 * r.value)
    throw NumericalError("weyl_integral: quadrature reached only " + std::to_string(r.error / r.value) +
                         " relative accuracy");
  return order * std::log(scale) + log_gx + std::log(r.value) - std::lgamma(order);
}

}  // namespace

double weyl_integral(const DrivingFunction& g, double order, double x) {
  if (!(x >= 0.0)) throw DomainError("weyl_integral: x must be >= 0");
  if (order < 0.0) throw DomainError("weyl_integral: order must be >= 0");
  if (order == 0.0) return g(x);
  return std::exp(log_weyl_integral(g, order, x));
}

double marginal_density(const LiouvilleParams& p, std::size_t i, double x) {
  if (i >= p.dim()) throw DomainError("marginal_density: coordinate out of range");
  if (!(x >= 0.0)) throw DomainError("marginal_density: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  const double ai = p.a()[i];
  double log_power = 0.0;
  if (x == 0.0) {
    if (ai < 1.0) return kInf;
    if (ai > 1.0) return 0.0;
  } else if (ai != 1.0) {
    log_power = (ai - 1.0) * std::log(x);
  }
  const double order = p.complementary_shape(i);
  const double log_w = order == 0.0 ? p.g().log_value(x) : log_weyl_integral(p.g(), order, x);
  return std::exp(std::log(p.marginal_constant(i)) + log_w + log_power);
}

namespace {

// With X = R D, D_i ~ Beta(a_i, a^(i)) independent of R:
//   P(X_i > x) = int_x^inf f_R(s) P(D_i > x/s) ds.
double generic_marginal_survival(const LiouvilleParams& p, std::size_t i, double x) {
  const double ai = p.a()[i];
  const double b = p.complementary_shape(i);
  if (b == 0.0) return radial_survival(p, x);
  const double total = p.shape_sum();
  const double scale = 1.0 + x;
  const auto r = quad::integrate_unit(
      [&](double u, double uc) {
        if (uc <= 0.0 || u <= 0.0) return 0.0;
        const double v = scale * u / uc;  // s - x
        const double s = x + v;
        if (!std::isfinite(s)) return 0.0;
        const double tail = boost::math::ibeta(b, ai, v / s);
        const double val = std::pow(s, total - 1.0) * p.g()(s) * tail * scale / (uc * uc);
        return std::isfinite(val) ? val : 0.0;
      },
      kRadialTol);
  return r.value / p.radial_integral();
}

double generic_marginal_cdf(const LiouvilleParams& p, std::size_t i, double x) {
  const double ai = p.a()[i];
  const double b = p.complementary_shape(i);
  if (b == 0.0) return radial_cdf(p, x);
  const double total = p.shape_sum();
  const double scale = 1.0 + x;
  const auto r = quad::integrate_unit(
      [&](double u, double uc) {
        if (uc <= 0.0 || u <= 0.0) return 0.0;
        const double v = scale * u / uc;
        const double s = x + v;
        if (!std::isfinite(s)) return 0.0;
        const double head = boost::math::ibeta(ai, b, x / s);
        const double val = std::pow(s, total - 1.0) * p.g()(s) * head * scale / (uc * uc);
        return std::isfinite(val) ? val : 0.0;
      },
      kRadialTol);
  return radial_cdf(p, x) + r.value / p.radial_integral();
}

}  // namespace

double marginal_survival(const LiouvilleParams& p, std::size_t i, double x) {
  if (i >= p.dim()) throw DomainError("marginal_survival: coordinate out of range");
  if (!(x >= 0.0)) throw DomainError("marginal_survival: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double ai = p.a()[i];
  return std::visit(overloaded{
                        // X_i / (1 + X_i) ~ Beta(a_i, theta - sum a)
                        [&](const InvertedDirichlet& d) {
                          return boost::math::ibeta(d.theta - p.shape_sum(), ai, 1.0 / (1.0 + x));
                        },
                        [&](const GenericRV&) { return generic_marginal_survival(p, i, x); },
                        // exponential generator: independent Gamma(a_i) margins
                        [&](const Rapid&) { return boost::math::gamma_q(ai, x); },
                    },
                    p.g().variant());
}

double marginal_cdf(const LiouvilleParams& p, std::size_t i, double x) {
  if (i >= p.dim()) throw DomainError("marginal_cdf: coordinate out of range");
  if (!(x >= 0.0)) throw DomainError("marginal_cdf: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double ai = p.a()[i];
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          return boost::math::ibeta(ai, d.theta - p.shape_sum(), x / (1.0 + x));
                        },
                        [&](const GenericRV&) { return generic_marginal_cdf(p, i, x); },
                        [&](const Rapid&) { return boost::math::gamma_p(ai, x); },
                    },
                    p.g().variant());
}

double marginal_quantile(const LiouvilleParams& p, std::size_t i, double q) {
  check_probability(q, "marginal_quantile");
  if (i >= p.dim()) throw DomainError("marginal_quantile: coordinate out of range");
  if (q > 0.5) return marginal_upper_quantile(p, i, 1.0 - q);
  const double ai = p.a()[i];
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          const double z = boost::math::ibeta_inv(ai, d.theta - p.shape_sum(), q);
                          return z / (1.0 - z);
                        },
                        [&](const GenericRV&) {
                          return invert_on_half_line([&](double x) { return marginal_cdf(p, i, x); }, q);
                        },
                        [&](const Rapid&) { return boost::math::gamma_p_inv(ai, q); },
                    },
                    p.g().variant());
}

double marginal_upper_quantile(const LiouvilleParams& p, std::size_t i, double s) {
  check_probability(s, "marginal_upper_quantile");
  if (i >= p.dim()) throw DomainError("marginal_upper_quantile: coordinate out of range");
  if (s > 0.5) return marginal_quantile(p, i, 1.0 - s);
  const double ai = p.a()[i];
  return std::visit(overloaded{
                        [&](const InvertedDirichlet& d) {
                          const double y = boost::math::ibeta_inv(d.theta - p.shape_sum(), ai, s);
                          return (1.0 - y) / y;
                        },
                        [&](const GenericRV&) {
                          return invert_on_half_line([&](double x) { return -marginal_survival(p, i, x); }, -s);
                        },
                        [&](const Rapid&) { return boost::math::gamma_q_inv(ai, s); },
                    },
                    p.g().variant());
}

// ------------------------------------------------------------ operator limit

namespace {
double require_rv_index(const LiouvilleParams& p) {
  const auto beta = p.g().rv_index();
  if (!beta) throw NotRegularlyVaryingError("driving function '" + p.g().name() + "' is rapidly varying");
  return *beta;
}
}  // namespace

double limiting_density(const LiouvilleParams& p, const DiagExponent& e, std::span<const double> x) {
  const double beta = require_rv_index(p);
  if (x.size() != p.dim() || e.dim() != p.dim()) throw DomainError("limiting_density: dimension mismatch");
  double lead = 0.0;
  for (std::size_t i : e.argmax()) lead += x[i];
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0)) throw DomainError("limiting_density: x must be >= 0");
    const double ai = p.a()[i];
    if (x[i] == 0.0) {
      if (ai < 1.0) return kInf;
      if (ai > 1.0) prod = 0.0;
    } else if (ai != 1.0) {
      prod *= std::pow(x[i], ai - 1.0);
    }
  }
  if (!(lead > 0.0))
    throw DivergenceError("limiting_density: all coordinates in the argmax set of E vanish");
  return p.normalizing_constant() * std::pow(lead, -beta) * prod;
}

double operator_normalizer(const LiouvilleParams& p, const DiagExponent& e, double t) {
  require_rv_index(p);
  if (!(t > 0.0)) throw DomainError("operator_normalizer: t must be > 0");
  double exponent = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) exponent += e[i] * p.a()[i];
  return p.g()(std::pow(t, e.max())) * std::pow(t, exponent);
}

double operator_rho(const LiouvilleParams& p, const DiagExponent& e) {
  const double beta = require_rv_index(p);
  if (e.dim() != p.dim()) throw DomainError("operator_rho: dimension mismatch");
  double weighted = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) weighted += e[i] * p.a()[i];
  return e.max() * beta - weighted;
}

}  // namespace opertail
