#include "opertail/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "opertail/error.hpp"
#include "opertail/quadrature.hpp"

namespace opertail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_threshold(const std::vector<double>& w, const char* what) {
  if (w.empty()) throw DomainError(std::string(what) + ": empty threshold vector");
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + ": thresholds must be finite and >= 0");
}

// Enumerates the 2^d cells (0, w_i] / (w_i, inf) per coordinate; `keep`
// decides which combinations (bit i set = upper interval) belong to the region.
template <class Keep>
std::vector<Rectangle> split_at_thresholds(const std::vector<double>& w, Keep keep) {
  const std::size_t d = w.size();
  std::vector<Rectangle> cells;
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    if (!keep(mask)) continue;
    Rectangle r{std::vector<double>(d), std::vector<double>(d)};
    bool empty = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask & (std::size_t{1} << i)) {
        r.lo[i] = w[i];
        r.hi[i] = kInf;
      } else {
        r.lo[i] = 0.0;
        r.hi[i] = w[i];
        empty = empty || w[i] == 0.0;
      }
    }
    if (!empty) cells.push_back(std::move(r));
  }
  return cells;
}

std::string vec_to_string(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

std::size_t region_dim(const Region& b) {
  return std::visit(overloaded{[](const Rectangle& r) { return r.lo.size(); },
                               [](const auto& r) { return r.w.size(); }},
                    b);
}

bool region_contains(const Region& b, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const Box& r) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (x[i] > r.w[i]) return false;
            return true;
          },
          [&](const UpperOrthant& r) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (!(x[i] > r.w[i])) return false;
            return true;
          },
          [&](const LowerUnion& r) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (x[i] < r.w[i]) return true;
            return false;
          },
          [&](const BoxComplement& r) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (x[i] > r.w[i]) return true;
            return false;
          },
          [&](const Rectangle& r) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (!(x[i] > r.lo[i] && x[i] <= r.hi[i])) return false;
            return true;
          },
      },
      b);
}

std::vector<Rectangle> region_cells(const Region& b) {
  return std::visit(
      overloaded{
          [](const Box& r) {
            check_threshold(r.w, "Box");
            const std::size_t all_lower = 0;
            return split_at_thresholds(r.w, [&](std::size_t m) { return m == all_lower; });
          },
          [](const UpperOrthant& r) {
            check_threshold(r.w, "UpperOrthant");
            const std::size_t all_upper = (std::size_t{1} << r.w.size()) - 1;
            return split_at_thresholds(r.w, [&](std::size_t m) { return m == all_upper; });
          },
          [](const LowerUnion& r) {
            check_threshold(r.w, "LowerUnion");
            const std::size_t all_upper = (std::size_t{1} << r.w.size()) - 1;
            return split_at_thresholds(r.w, [&](std::size_t m) { return m != all_upper; });
          },
          [](const BoxComplement& r) {
            check_threshold(r.w, "BoxComplement");
            return split_at_thresholds(r.w, [](std::size_t m) { return m != 0; });
          },
          [](const Rectangle& r) {
            if (r.lo.size() != r.hi.size() || r.lo.empty()) throw DomainError("Rectangle: lo/hi size mismatch");
            for (std::size_t i = 0; i < r.lo.size(); ++i)
              if (!(r.lo[i] >= 0.0) || !std::isfinite(r.lo[i]) || std::isnan(r.hi[i]))
                throw DomainError("Rectangle: need finite lo_i >= 0");
            for (std::size_t i = 0; i < r.lo.size(); ++i)
              if (!(r.hi[i] > r.lo[i])) return std::vector<Rectangle>{};
            return std::vector<Rectangle>{r};
          },
      },
      b);
}

std::string describe(const Region& b) {
  return std::visit(overloaded{
                        [](const Box& r) { return "box" + vec_to_string(r.w); },
                        [](const UpperOrthant& r) { return "upper_orthant" + vec_to_string(r.w); },
                        [](const LowerUnion& r) { return "lower_union" + vec_to_string(r.w); },
                        [](const BoxComplement& r) { return "box_complement" + vec_to_string(r.w); },
                        [](const Rectangle& r) {
                          return "rectangle" + vec_to_string(r.lo) + "-" + vec_to_string(r.hi);
                        },
                    },
                    b);
}

nlohmann::json region_to_json(const Region& b) {
  return std::visit(overloaded{
                        [](const Box& r) { return nlohmann::json{{"type", "box"}, {"w", r.w}}; },
                        [](const UpperOrthant& r) { return nlohmann::json{{"type", "upper_orthant"}, {"w", r.w}}; },
                        [](const LowerUnion& r) { return nlohmann::json{{"type", "lower_union"}, {"w", r.w}}; },
                        [](const BoxComplement& r) {
                          return nlohmann::json{{"type", "box_complement"}, {"w", r.w}};
                        },
                        [](const Rectangle& r) {
                          nlohmann::json hi = nlohmann::json::array();
                          for (double h : r.hi) hi.push_back(std::isinf(h) ? nlohmann::json("inf") : nlohmann::json(h));
                          return nlohmann::json{{"type", "rectangle"}, {"lo", r.lo}, {"hi", hi}};
                        },
                    },
                    b);
}

Region region_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "rectangle") {
      Rectangle r{j.at("lo").get<std::vector<double>>(), {}};
      for (const auto& h : j.at("hi")) r.hi.push_back(h.is_string() && h.get<std::string>() == "inf" ? kInf : h.get<double>());
      return r;
    }
    auto w = j.at("w").get<std::vector<double>>();
    if (type == "box") return Box{w};
    if (type == "upper_orthant") return UpperOrthant{w};
    if (type == "lower_union") return LowerUnion{w};
    if (type == "box_complement") return BoxComplement{w};
    throw ConfigError("region.type: unknown region '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
}

// -------------------------------------------------------------- integrals

std::string cell_divergence(const TailDensityForm& lambda, const Rectangle& cell) {
  const std::size_t d = cell.lo.size();
  // Allowed ray directions per coordinate: towards 0 needs lo_i = 0, towards
  // infinity needs hi_i = inf. Rates {1/2, 1, 2} cover anisotropic corners.
  static constexpr double kRates[] = {0.5, 1.0, 2.0};
  std::vector<std::vector<double>> options(d);
  for (std::size_t i = 0; i < d; ++i) {
    options[i].push_back(0.0);
    for (double r : kRates) {
      if (cell.lo[i] == 0.0) options[i].push_back(-r);
      if (std::isinf(cell.hi[i])) options[i].push_back(r);
    }
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> s(d);
  while (true) {
    bool any = false;
    double volume = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = options[i][idx[i]];
      any = any || s[i] != 0.0;
      volume += s[i];
    }
    if (any) {
      const double growth = lambda.expr.scaling_exponent(s) + volume;
      if (growth >= -1e-12) {
        std::ostringstream os;
        os << "non-integrable along x_i ~ t^s_i with s = " << vec_to_string(s) << " (exponent "
           << growth << " >= 0) on cell " << describe(cell);
        return os.str();
      }
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] == options[k].size()) idx[k++] = 0;
    if (k == d) break;
  }
  return {};
}

IntensityResult intensity_measure(const TailDensityForm& lambda, const Region& b, double rel_tol) {
  const std::size_t d = region_dim(b);
  if (d != lambda.dim) throw DomainError("intensity_measure: region and density dimensions differ");
  const auto cells = region_cells(b);
  IntensityResult out;
  for (const auto& cell : cells) {
    if (auto why = cell_divergence(lambda, cell); !why.empty()) {
      out.divergent = true;
      out.reason = why;
      out.value = kInf;
      return out;
    }
  }
  std::vector<double> x(d);
  for (const auto& cell : cells) {
    auto integrand = [&](std::span<const double> u, std::span<const double> uc) {
      double jac = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (std::isinf(cell.hi[i])) {
          if (uc[i] <= 0.0) return 0.0;
          const double scale = cell.lo[i] > 0.0 ? cell.lo[i] : 1.0;
          x[i] = cell.lo[i] + scale * u[i] / uc[i];
          jac *= scale / (uc[i] * uc[i]);
        } else {
          const double width = cell.hi[i] - cell.lo[i];
          x[i] = u[i] < 0.5 ? cell.lo[i] + width * u[i] : cell.hi[i] - width * uc[i];
          jac *= width;
        }
        if (!(x[i] > 0.0) || !std::isfinite(x[i])) return 0.0;
      }
      const double v = lambda.expr.eval(x) * jac;
      return std::isfinite(v) ? v : 0.0;
    };
    const auto r = quad::cubature_unit(integrand, d, rel_tol);
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

double exponent_function(const TailDensityForm& lambda_c, std::span<const double> w, double rel_tol) {
  if (w.size() != lambda_c.dim) throw DomainError("exponent_function: dimension mismatch");
  bool positive = false;
  for (double v : w) {
    if (!(v >= 0.0)) throw DomainError("exponent_function: w must be >= 0");
    positive = positive || v > 0.0;
  }
  if (!positive) throw DomainError("exponent_function: some w_i must be > 0");
  const auto r = intensity_measure(lambda_c, LowerUnion{{w.begin(), w.end()}}, rel_tol);
  if (r.divergent) throw DivergenceError(r.reason);
  return r.value;
}

MixedDerivativeResult exponent_mixed_derivative_defect(const TailDensityForm& lambda_c, std::span<const double> w,
                                                       double h) {
  const std::size_t d = w.size();
  if (d != lambda_c.dim) throw DomainError("exponent_mixed_derivative_defect: dimension mismatch");
  if (!(h > 0.0)) throw DomainError("exponent_mixed_derivative_defect: h must be > 0");
  for (double v : w)
    if (!(v > h)) throw DomainError("exponent_mixed_derivative_defect: need w_i > h");

  double sum = 0.0;
  double noise = 0.0;
  std::vector<double> point(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    int sign = 1;
    for (std::size_t i = 0; i < d; ++i) {
      const bool plus = mask & (std::size_t{1} << i);
      point[i] = w[i] + (plus ? h : -h);
      if (!plus) sign = -sign;
    }
    constexpr double kTol = 1e-11;
    const auto r = intensity_measure(lambda_c, LowerUnion{point}, kTol);
    if (r.divergent) throw DivergenceError(r.reason);
    sum += sign * r.value;
    // tanh-sinh's own error figure is the last level difference and far too pessimistic
    noise += kTol * std::abs(r.value);
  }
  const double scale = std::pow(2.0 * h, static_cast<double>(d));
  MixedDerivativeResult out;
  const double diff = sum / scale;
  out.magnitude = std::abs(diff);
  out.sign = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
  const double target = lambda_c(w);
  out.defect = std::abs(out.magnitude - target) / target;
  out.step_too_small = noise / scale > 0.1 * out.magnitude;
  return out;
}

// ------------------------------------------------------------- Monte Carlo

std::vector<OrthantRow> orthant_convergence(const LiouvilleParams& p, const DiagExponent& e, const Region& b,
                                            std::span<const double> t_grid, std::size_t n, std::uint64_t seed,
                                            unsigned jobs) {
  const std::size_t d = p.dim();
  if (e.dim() != d || region_dim(b) != d) throw DomainError("orthant_convergence: dimension mismatch");
  if (n == 0) throw DomainError("orthant_convergence: n must be >= 1");

  std::vector<OrthantRow> rows;
  if (region_cells(b).empty()) {
    for (double t : t_grid) rows.push_back({t, 0.0, 0.0, 0.0, 0, "empty region"});
    return rows;
  }
  const TailDensityForm limit = liouville_limit_form(p, e);
  const IntensityResult target = intensity_measure(limit, b);
  if (target.divergent) throw DivergenceError("orthant_convergence: " + target.reason);

  const SampleMatrix xs = sample(p, n, seed, jobs);
  std::vector<double> scaled(d);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("orthant_convergence: t must be > 0");
    std::vector<double> inv_scale(d);
    for (std::size_t i = 0; i < d; ++i) inv_scale[i] = std::pow(t, -e[i]);
    std::size_t hits = 0;
    for (std::size_t row = 0; row < n; ++row) {
      const auto x = xs.row(row);
      for (std::size_t i = 0; i < d; ++i) scaled[i] = x[i] * inv_scale[i];
      if (region_contains(b, scaled)) ++hits;
    }
    const double u = operator_normalizer(p, e, t);
    const double phat = static_cast<double>(hits) / static_cast<double>(n);
    OrthantRow row{t, phat / u, std::sqrt(phat * (1.0 - phat) / static_cast<double>(n)) / u, target.value, hits, ""};
    if (hits == 0) {
      row.verdict = "increase n or decrease t";
    } else {
      row.verdict = std::abs(row.estimate - row.target) <= 3.0 * row.stderr_ ? "within 3 stderr" : "outside 3 stderr";
    }
    rows.push_back(row);
  }
  return rows;
}

MarginalTailCheck marginal_tail_check(const LiouvilleParams& p, const DiagExponent& e, std::size_t i,
                                      std::size_t n, std::size_t k, std::uint64_t seed, unsigned jobs) {
  if (i >= p.dim()) throw DomainError("marginal_tail_check: coordinate out of range");
  MarginalTailCheck out;
  const SampleMatrix xs = sample(p, n, seed, jobs);
  const auto column = xs.column(i);
  out.hill = hill_estimate(column, k);
  out.expected_alpha = operator_rho(p, e) / e[i];
  std::vector<double> w(p.dim(), 0.0);
  w[i] = 1.0;
  out.slab = intensity_measure(liouville_limit_form(p, e), UpperOrthant{w});
  return out;
}

}  // namespace opertail
