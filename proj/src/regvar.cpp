#include "opertail/regvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "opertail/error.hpp"

namespace opertail {

RVSpec::RVSpec(double scale, double index, double log_power) : c(scale), rho(index), gamma(log_power) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("RVSpec: scale c must be finite and > 0");
  if (!std::isfinite(rho) || !std::isfinite(gamma))
    throw DomainError("RVSpec: rho and gamma must be finite");
}

double RVSpec::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("eval_rv: t must be > 0");
  double v = c * std::pow(t, rho);
  if (gamma != 0.0) v *= std::pow(std::log(std::numbers::e + t), gamma);
  return v;
}

RVSpec operator*(const RVSpec& lhs, const RVSpec& rhs) {
  return {lhs.c * rhs.c, lhs.rho + rhs.rho, lhs.gamma + rhs.gamma};
}

double eval_rv(const RVSpec& v, double t) { return v(t); }

double eval_rv_at_zero(const RVSpec& v, double u) {
  if (!(u > 0.0)) throw DomainError("eval_rv_at_zero: u must be > 0");
  return v(1.0 / u);
}

RatioDefect ratio_limit_defect(const ScalarFunction& v, double rho, double x,
                               std::span<const double> t_grid, double tolerance) {
  if (!(x > 0.0)) throw DomainError("ratio_limit_defect: x must be > 0");
  for (std::size_t j = 1; j < t_grid.size(); ++j)
    if (!(t_grid[j] > t_grid[j - 1])) throw DomainError("ratio_limit_defect: t grid must increase");

  RatioDefect out;
  const double target = std::pow(x, rho);
  bool valid = true;
  for (double t : t_grid) {
    const double num = v(t * x);
    const double den = v(t);
    if (!(den > 0.0) || !(num > 0.0) || !std::isfinite(num) || !std::isfinite(den)) {
      valid = false;
      out.defects.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    out.defects.push_back(std::abs(num / den - target));
  }
  const auto& d = out.defects;
  bool tail_decreasing = !d.empty();
  for (std::size_t j = d.size() >= 3 ? d.size() - 2 : 1; j < d.size(); ++j)
    tail_decreasing = tail_decreasing && (d[j] <= d[j - 1] || d[j] < 1e-12);  // rounding plateaus count
  out.regularly_varying = valid && tail_decreasing && d.back() < tolerance;
  out.verdict = out.regularly_varying ? "consistent with RV_rho" : "not RV";
  return out;
}

double karamata_defect(const ScalarFunction& density, const ScalarFunction& survival, double alpha,
                       double t) {
  if (!(alpha > 0.0)) throw DomainError("karamata_defect: alpha must be > 0");
  const double s = survival(t);
  if (!(s > 0.0)) throw DomainError("karamata_defect: survival is zero at t (domain exhaustion)");
  return std::abs(t * density(t) / (alpha * s) - 1.0);
}

TailIndexEstimate hill_estimate(std::span<const double> sample, std::optional<std::size_t> k_opt) {
  const std::size_t n = sample.size();
  const std::size_t k =
      k_opt.value_or(static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6))));
  if (k < 1 || n < k + 1) throw DomainError("hill_estimate: need 1 <= k < n");
  for (double v : sample)
    if (!(v > 0.0)) throw DomainError("hill_estimate: sample values must be > 0");

  std::vector<double> sorted(sample.begin(), sample.end());
  // sorted[n-k-1] is X_(n-k); everything after it is the top k.
  auto pivot = sorted.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(sorted.begin(), pivot, sorted.end());
  const double threshold = *pivot;
  std::sort(pivot + 1, sorted.end());  // fixed summation order: result independent of input order
  double sum = 0.0;
  for (auto it = pivot + 1; it != sorted.end(); ++it) sum += std::log(*it / threshold);
  if (!(sum > 0.0)) throw DomainError("hill_estimate: degenerate sample (tied order statistics)");
  return {static_cast<double>(k) / sum, k, n};
}

}  // namespace opertail
