#include "opertail/copulatail.hpp"

#include <cmath>
#include <string>

#include "opertail/error.hpp"

namespace opertail {

TailOrder::TailOrder(std::vector<double> k) : kappa(std::move(k)) {
  if (kappa.empty()) throw DomainError("TailOrder: dimension must be >= 1");
  for (double v : kappa)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("TailOrder: entries must be finite and > 0");
}

double TailOrder::sum() const noexcept {
  double s = 0.0;
  for (double v : kappa) s += v;
  return s;
}

// ------------------------------------------------------------ MarginalFrame

namespace {
void check_alpha(const std::vector<double>& alpha) {
  if (alpha.empty()) throw DomainError("MarginalFrame: dimension must be >= 1");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("MarginalFrame: alpha_i must be finite and > 0");
}
}  // namespace

MarginalFrame::MarginalFrame(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  check_alpha(alpha_);
  for (double a : alpha_) {
    survival_.emplace_back([a](double x) { return x <= 1.0 ? 1.0 : std::pow(x, -a); });
    quantile_.emplace_back([a](double q) { return std::pow(1.0 - q, -1.0 / a); });
  }
}

MarginalFrame::MarginalFrame(std::vector<double> alpha, std::vector<ScalarFunction> survival,
                             std::vector<ScalarFunction> quantile)
    : alpha_(std::move(alpha)), survival_(std::move(survival)), quantile_(std::move(quantile)) {
  check_alpha(alpha_);
  if (survival_.size() != alpha_.size() || quantile_.size() != alpha_.size())
    throw DomainError("MarginalFrame: need one survival and quantile evaluator per margin");
}

MarginalFrame MarginalFrame::liouville(const LiouvilleParams& p, const DiagExponent& e) {
  const double rho = operator_rho(p, e);
  if (!(rho > 0.0))
    throw DomainError("operator exponent not regularly varying with negative index (rho = " +
                      std::to_string(rho) + ")");
  std::vector<double> alpha;
  std::vector<ScalarFunction> survival, quantile;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    alpha.push_back(rho / e[i]);
    survival.emplace_back([p, i](double x) { return marginal_survival(p, i, x); });
    quantile.emplace_back([p, i](double q) { return marginal_quantile(p, i, q); });
  }
  return {std::move(alpha), std::move(survival), std::move(quantile)};
}

// ---------------------------------------------------------- copula density

double LiouvilleCopula::quantile(std::size_t i, double u, double s) {
  const auto key = std::make_pair(i, u > 0.5 ? -s : u);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double x = u > 0.5 ? marginal_upper_quantile(p_, i, s) : marginal_quantile(p_, i, u);
  cache_.emplace(key, x);
  return x;
}

double LiouvilleCopula::density_at(const std::vector<double>& x) {
  double value = joint_density(p_, x);
  for (std::size_t i = 0; i < x.size(); ++i) value /= marginal_density(p_, i, x[i]);
  return value;
}

double LiouvilleCopula::density(std::span<const double> u) {
  if (u.size() != p_.dim()) throw DomainError("copula_density: dimension mismatch");
  for (double ui : u)
    if (!(ui > 0.0 && ui < 1.0)) throw DomainError("copula_density: u must lie in the open unit cube");
  if (p_.dim() == 1) return 1.0;
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = quantile(i, u[i], 1.0 - u[i]);
  return density_at(x);
}

double LiouvilleCopula::upper_density(std::span<const double> s) {
  if (s.size() != p_.dim()) throw DomainError("copula_density: dimension mismatch");
  for (double si : s)
    if (!(si > 0.0 && si < 1.0)) throw DomainError("copula_density: u must lie in the open unit cube");
  if (p_.dim() == 1) return 1.0;
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = quantile(i, 1.0 - s[i], s[i]);
  return density_at(x);
}

double copula_density(const LiouvilleParams& p, std::span<const double> u) {
  LiouvilleCopula c(p);
  return c.density(u);
}

// ------------------------------------------------------------- closed forms

namespace {

struct OperatorData {
  double beta;
  double rho;
  std::vector<double> alpha;
};

OperatorData operator_data(const LiouvilleParams& p, const DiagExponent& e) {
  if (e.dim() != p.dim()) throw DomainError("operator tail: dimension mismatch between a and E");
  const double beta = *p.g().rv_index();  // operator_rho already rejects the rapid variant
  const double rho = operator_rho(p, e);
  if (!(rho > 0.0))
    throw DomainError("operator exponent not regularly varying with negative index (rho = " +
                      std::to_string(rho) + ")");
  OperatorData d{beta, rho, {}};
  for (std::size_t i = 0; i < p.dim(); ++i) d.alpha.push_back(rho / e[i]);
  return d;
}

}  // namespace

TailDensityForm liouville_limit_form(const LiouvilleParams& p, const DiagExponent& e) {
  const double rho = operator_rho(p, e);
  const double beta = *p.g().rv_index();
  if (e.dim() != p.dim()) throw DomainError("liouville_limit_form: dimension mismatch");
  std::vector<Expr> lead;
  for (std::size_t i : e.argmax()) lead.push_back(Expr::var(i));
  std::vector<Expr> factors{Expr::constant(p.normalizing_constant()), Expr::pow(Expr::sum(lead), -beta)};
  for (std::size_t i = 0; i < p.dim(); ++i)
    if (p.a()[i] != 1.0) factors.push_back(Expr::pow(Expr::var(i), p.a()[i] - 1.0));

  TailDensityForm f;
  f.frame = Frame::kOriginal;
  f.expr = Expr::prod(std::move(factors));
  f.dim = p.dim();
  f.scaling = e.eigenvalues();
  f.degree = -rho - e.trace();
  f.formula_tag = "liouville_operator_limit";
  f.normalization_note = "c_f (sum_{argmax E} x_i)^-beta prod x_i^(a_i-1); c_f included, V(t) = g(t^lambda_max) t^(sum lambda_i a_i)";
  return f;
}

double liouville_copula_tail_density(const LiouvilleParams& p, const DiagExponent& e, std::span<const double> w) {
  const OperatorData d = operator_data(p, e);
  if (w.size() != p.dim()) throw DomainError("liouville_copula_tail_density: dimension mismatch");
  for (double wi : w)
    if (!(wi > 0.0)) throw DomainError("liouville_copula_tail_density: w must be > 0");
  double lead = 0.0;
  for (std::size_t i : e.argmax()) lead += std::pow(w[i], -1.0 / d.alpha[i]);
  double value = p.normalizing_constant() * std::pow(lead, -d.beta);
  for (std::size_t i = 0; i < p.dim(); ++i)
    value *= std::pow(w[i], -(d.alpha[i] + p.a()[i]) / d.alpha[i]) / d.alpha[i];
  return value;
}

TailDensityForm liouville_copula_tail_form(const LiouvilleParams& p, const DiagExponent& e) {
  const OperatorData d = operator_data(p, e);
  double constant = p.normalizing_constant();
  for (double a : d.alpha) constant /= a;
  std::vector<Expr> lead;
  for (std::size_t i : e.argmax()) lead.push_back(Expr::pow(Expr::var(i), -1.0 / d.alpha[i]));
  std::vector<Expr> factors{Expr::constant(constant), Expr::pow(Expr::sum(lead), -d.beta)};
  for (std::size_t i = 0; i < p.dim(); ++i)
    factors.push_back(Expr::pow(Expr::var(i), -(d.alpha[i] + p.a()[i]) / d.alpha[i]));

  TailDensityForm f;
  f.frame = Frame::kCopula;
  f.expr = Expr::prod(std::move(factors));
  f.dim = p.dim();
  f.scaling = std::vector<double>(p.dim(), 1.0);
  f.degree = 1.0 - static_cast<double>(p.dim());
  f.formula_tag = "liouville_copula_upper_tail";
  f.normalization_note =
      "c_f included; alpha_i = (lambda_max beta - sum lambda_j a_j) / lambda_i (positive reading)";
  return f;
}

// --------------------------------------------------------------- transforms

double density_to_copula_tail(const TailDensityForm& lambda, const MarginalFrame& frame, std::span<const double> w) {
  if (lambda.frame != Frame::kOriginal) throw DomainError("density_to_copula_tail: expected an original-frame form");
  if (w.size() != frame.dim() || lambda.dim != frame.dim()) throw DomainError("density_to_copula_tail: dimension mismatch");
  std::vector<double> y(w.size());
  double jacobian = 1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw DomainError("density_to_copula_tail: w must be > 0");
    const double a = frame.alpha()[i];
    y[i] = std::pow(w[i], -1.0 / a);
    jacobian *= std::pow(w[i], -(a + 1.0) / a) / a;
  }
  return lambda(y) * jacobian;
}

double copula_tail_to_density(const TailDensityForm& lambda_c, const MarginalFrame& frame, std::span<const double> x) {
  if (lambda_c.frame != Frame::kCopula) throw DomainError("copula_tail_to_density: expected a copula-frame form");
  if (x.size() != frame.dim() || lambda_c.dim != frame.dim()) throw DomainError("copula_tail_to_density: dimension mismatch");
  std::vector<double> w(x.size());
  double jacobian = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw DomainError("copula_tail_to_density: x must be > 0");
    const double a = frame.alpha()[i];
    w[i] = std::pow(x[i], -a);
    jacobian *= a * std::pow(x[i], -a - 1.0);
  }
  return lambda_c(w) * jacobian;
}

TailDensityForm density_to_copula_tail_form(const TailDensityForm& lambda, const MarginalFrame& frame) {
  if (lambda.frame != Frame::kOriginal) throw DomainError("density_to_copula_tail: expected an original-frame form");
  if (lambda.dim != frame.dim()) throw DomainError("density_to_copula_tail: dimension mismatch");
  std::vector<Expr> subs;
  double constant = 1.0;
  std::vector<Expr> factors;
  for (std::size_t i = 0; i < frame.dim(); ++i) {
    const double a = frame.alpha()[i];
    subs.push_back(Expr::pow(Expr::var(i), -1.0 / a));
    factors.push_back(Expr::pow(Expr::var(i), -(a + 1.0) / a));
    constant /= a;
  }
  factors.insert(factors.begin(), Expr::constant(constant));
  factors.push_back(lambda.expr.substitute(subs));

  TailDensityForm f;
  f.frame = Frame::kCopula;
  f.expr = Expr::prod(std::move(factors));
  f.dim = lambda.dim;
  f.scaling = std::vector<double>(f.dim, 1.0);
  f.degree = 1.0 - static_cast<double>(f.dim);
  f.formula_tag = lambda.formula_tag + "|to_copula";
  f.normalization_note = lambda.normalization_note;
  return f;
}

TailDensityForm copula_tail_to_density_form(const TailDensityForm& lambda_c, const MarginalFrame& frame) {
  if (lambda_c.frame != Frame::kCopula) throw DomainError("copula_tail_to_density: expected a copula-frame form");
  if (lambda_c.dim != frame.dim()) throw DomainError("copula_tail_to_density: dimension mismatch");
  std::vector<Expr> subs;
  double constant = 1.0;
  std::vector<Expr> factors;
  TailDensityForm f;
  f.frame = Frame::kOriginal;
  f.dim = lambda_c.dim;
  // Scaling with lambda_i = 1/alpha_i, i.e. the representative with rho = 1.
  double trace = 0.0;
  for (std::size_t i = 0; i < frame.dim(); ++i) {
    const double a = frame.alpha()[i];
    subs.push_back(Expr::pow(Expr::var(i), -a));
    factors.push_back(Expr::pow(Expr::var(i), -a - 1.0));
    constant *= a;
    f.scaling.push_back(1.0 / a);
    trace += 1.0 / a;
  }
  factors.insert(factors.begin(), Expr::constant(constant));
  factors.push_back(lambda_c.expr.substitute(subs));
  f.expr = Expr::prod(std::move(factors));
  f.degree = -1.0 - trace;
  f.formula_tag = lambda_c.formula_tag + "|to_density";
  f.normalization_note = lambda_c.normalization_note;
  return f;
}

// -------------------------------------------------------------- estimation

EmpiricalTailResult empirical_tail_density(const CopulaDensityFn& c, const std::vector<RVSpec>& r,
                                           const RVSpec& ell, const TailOrder& kappa,
                                           std::span<const double> w, std::span<const double> u_grid,
                                           TailSide side) {
  const std::size_t d = w.size();
  if (r.size() != d || kappa.dim() != d) throw DomainError("empirical_tail_density: dimension mismatch");
  if (u_grid.size() < 2) throw DomainError("empirical_tail_density: need at least two u values");
  for (std::size_t j = 1; j < u_grid.size(); ++j)
    if (!(u_grid[j] < u_grid[j - 1]) || !(u_grid[j] > 0.0))
      throw DomainError("empirical_tail_density: u grid must be positive and decreasing");

  EmpiricalTailResult out;
  std::vector<double> point(d);
  for (double u : u_grid) {
    for (std::size_t i = 0; i < d; ++i) {
      const double shift = eval_rv_at_zero(r[i], u) * w[i];
      if (!(shift > 0.0 && shift < 1.0))
        throw DomainError("empirical_tail_density: r_i(u) w_i leaves (0, 1) at u = " + std::to_string(u));
      point[i] = side == TailSide::kUpper ? 1.0 - shift : shift;
    }
    const double value = c(point);
    if (!std::isfinite(value)) throw NumericalError("empirical_tail_density: copula density is not finite");
    out.u.push_back(u);
    out.estimates.push_back(value / (std::pow(u, 1.0 - kappa.sum()) * eval_rv_at_zero(ell, u)));
  }

  const std::size_t n = out.estimates.size();
  const double u1 = out.u[n - 2], u2 = out.u[n - 1];
  const double e1 = out.estimates[n - 2], e2 = out.estimates[n - 1];
  out.limit = (u1 * e2 - u2 * e1) / (u1 - u2);
  out.converged = std::abs(e2 - e1) < 0.005 * std::abs(e2) && e2 > 0.0;

  // Estimates behaving like a power of u mean the normalization has the wrong
  // order: the log-log slope over the last two points is far from zero.
  double slope = 0.0;
  if (e1 > 0.0 && e2 > 0.0) slope = std::log(e2 / e1) / std::log(u2 / u1);
  if (out.converged)
    out.verdict = "converged";
  else if (e1 <= 0.0 || e2 <= 0.0 || std::abs(slope) > 0.5)
    out.verdict = "tail order mismatch";
  else
    out.verdict = "not converged";
  return out;
}

double quasihomogeneity_defect(const TailDensityForm& lambda, double t, std::span<const double> w) {
  if (!(t > 0.0)) throw DomainError("quasihomogeneity_defect: t must be > 0");
  if (w.size() != lambda.dim) throw DomainError("quasihomogeneity_defect: dimension mismatch");
  std::vector<double> scaled(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) scaled[i] = std::pow(t, lambda.scaling[i]) * w[i];
  const double base = lambda(w);
  return std::abs(lambda(scaled) - std::pow(t, lambda.degree) * base) / base;
}

CompatibilityResult compatibility_defect(const RVSpec& r, const ScalarFunction& survival, double rho_i,
                                         double alpha_i, std::span<const double> t_grid, double tolerance) {
  if (!(rho_i > 0.0) || !(alpha_i > 0.0)) throw DomainError("compatibility_defect: rho_i and alpha_i must be > 0");
  for (std::size_t j = 1; j < t_grid.size(); ++j)
    if (!(t_grid[j] > t_grid[j - 1])) throw DomainError("compatibility_defect: t grid must increase");
  CompatibilityResult out;
  std::vector<double> ratios;
  for (double t : t_grid) {
    // r is an at-zero spec, so r(1/t) is the underlying function at t.
    const double ratio = eval_rv(r, t) / survival(std::pow(t, rho_i / alpha_i));
    ratios.push_back(ratio);
    out.defects.push_back(std::abs(ratio - 1.0));
  }
  if (out.defects.empty()) throw DomainError("compatibility_defect: empty t grid");
  out.compatible = std::isfinite(out.defects.back()) && out.defects.back() < tolerance;
  if (out.compatible) {
    out.verdict = "compatible";
  } else if (ratios.size() >= 2 && std::isfinite(ratios.back()) && ratios.back() > 0.0 &&
             std::abs(ratios.back() / ratios[ratios.size() - 2] - 1.0) < tolerance) {
    out.verdict = "incompatible (constant != 1)";
  } else {
    out.verdict = "incompatible";
  }
  return out;
}

}  // namespace opertail
