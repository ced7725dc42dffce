#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opertail/liouville.hpp"
#include "opertail/opscale.hpp"
#include "opertail/regvar.hpp"
#include "opertail/tail_form.hpp"

namespace opertail {

/// Tail orders kappa = (kappa_1, ..., kappa_d), all positive.
struct TailOrder {
  std::vector<double> kappa;

  explicit TailOrder(std::vector<double> k);
  static TailOrder ones(std::size_t d) { return TailOrder(std::vector<double>(d, 1.0)); }
  std::size_t dim() const noexcept { return kappa.size(); }
  double sum() const noexcept;
};

/// Marginal tail indices alpha_i with optional survival/quantile evaluators.
/// The two-argument constructor uses exact Pareto margins x^-alpha_i on x >= 1.
class MarginalFrame {
 public:
  explicit MarginalFrame(std::vector<double> alpha);
  MarginalFrame(std::vector<double> alpha, std::vector<ScalarFunction> survival,
                std::vector<ScalarFunction> quantile);

  /// alpha_i = rho / lambda_i with the margins of p.
  static MarginalFrame liouville(const LiouvilleParams& p, const DiagExponent& e);

  std::size_t dim() const noexcept { return alpha_.size(); }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double survival(std::size_t i, double x) const { return survival_.at(i)(x); }
  double quantile(std::size_t i, double q) const { return quantile_.at(i)(q); }

 private:
  std::vector<double> alpha_;
  std::vector<ScalarFunction> survival_;
  std::vector<ScalarFunction> quantile_;
};

/// Copula density of a Liouville distribution,
///   c(u) = f(F_1^-1(u_1), ..., F_d^-1(u_d)) / prod_i f_i(F_i^-1(u_i)).
///
/// The evaluator memoizes marginal quantiles in a private cache, so each
/// instance should be owned by one caller.
class LiouvilleCopula {
 public:
  explicit LiouvilleCopula(LiouvilleParams p) : p_(std::move(p)) {}

  const LiouvilleParams& params() const noexcept { return p_; }
  double density(std::span<const double> u);
  /// c(1 - s_1, ..., 1 - s_d) without forming 1 - s_i.
  double upper_density(std::span<const double> s);

 private:
  double quantile(std::size_t i, double u, double s);
  double density_at(const std::vector<double>& x);

  LiouvilleParams p_;
  std::map<std::pair<std::size_t, double>, double> cache_;
};

double copula_density(const LiouvilleParams& p, std::span<const double> u);

/// Operator limit density of p with exponent E, as a closed form in the
/// original frame.
TailDensityForm liouville_limit_form(const LiouvilleParams& p, const DiagExponent& e);

/// Upper tail density of the Liouville copula,
///   c_f (sum_{i in (lambda)} w_i^(-1/alpha_i))^-beta prod alpha_i^-1 prod w_i^(-(alpha_i + a_i)/alpha_i)
/// with alpha_i = rho / lambda_i and rho = lambda_max beta - sum lambda_i a_i.
/// Throws DomainError when rho <= 0.
double liouville_copula_tail_density(const LiouvilleParams& p, const DiagExponent& e, std::span<const double> w);
TailDensityForm liouville_copula_tail_form(const LiouvilleParams& p, const DiagExponent& e);

/// lambda_C(w) = lambda(w_1^(-1/alpha_1), ...) prod alpha_i^-1 w_i^(-(alpha_i+1)/alpha_i).
double density_to_copula_tail(const TailDensityForm& lambda, const MarginalFrame& frame, std::span<const double> w);
/// lambda(x) = lambda_C(x_1^(-alpha_1), ...) prod alpha_i x_i^(-alpha_i-1).
double copula_tail_to_density(const TailDensityForm& lambda_c, const MarginalFrame& frame, std::span<const double> x);

/// The same two transforms carried out symbolically on the expression tree.
TailDensityForm density_to_copula_tail_form(const TailDensityForm& lambda, const MarginalFrame& frame);
TailDensityForm copula_tail_to_density_form(const TailDensityForm& lambda_c, const MarginalFrame& frame);

enum class TailSide { kUpper, kLower };

using CopulaDensityFn = std::function<double(std::span<const double>)>;

struct EmpiricalTailResult {
  std::vector<double> u;
  std::vector<double> estimates;
  double limit = 0.0;  // first-order Richardson step on the two smallest u
  bool converged = false;
  std::string verdict;  // "converged", "not converged" or "tail order mismatch"
};

/// Finite-u estimates c(1 - r(u) w) / (u^(1 - sum kappa) l(u)) along a
/// decreasing u grid (c(r(u) w) for the lower tail). The scaling functions
/// r_i and l are RV-at-zero specs (see RVSpec::at_zero).
EmpiricalTailResult empirical_tail_density(const CopulaDensityFn& c, const std::vector<RVSpec>& r,
                                           const RVSpec& ell, const TailOrder& kappa,
                                           std::span<const double> w, std::span<const double> u_grid,
                                           TailSide side = TailSide::kUpper);

/// |lambda(t^s w) - t^degree lambda(w)| / lambda(w) with s and degree taken
/// from the form.
double quasihomogeneity_defect(const TailDensityForm& lambda, double t, std::span<const double> w);

struct CompatibilityResult {
  std::vector<double> defects;
  bool compatible = false;
  std::string verdict;
};

/// |r(1/t) / survival(t^(rho_i/alpha_i)) - 1| along an increasing t grid;
/// compatible when the final defect is below `tolerance`.
CompatibilityResult compatibility_defect(const RVSpec& r, const ScalarFunction& survival, double rho_i,
                                         double alpha_i, std::span<const double> t_grid,
                                         double tolerance = 1e-2);

}  // namespace opertail
