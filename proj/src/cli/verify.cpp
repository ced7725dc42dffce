#include <algorithm>
#include <cmath>
#include <sstream>

#include "opertail/cli.hpp"
#include "opertail/copulatail.hpp"
#include "opertail/error.hpp"
#include "opertail/exponent.hpp"
#include "opertail/quadrature.hpp"
#include "opertail/rng.hpp"

namespace opertail::cli {
namespace {

using nlohmann::json;

LiouvilleParams params_or_default(const RunConfig& cfg) {
  if (cfg.distribution) return *cfg.distribution;
  return LiouvilleParams({1.0, 1.0}, DrivingFunction::inverted_dirichlet(3.0));
}

DiagExponent exponent_for(const RunConfig& cfg, std::size_t d) {
  if (cfg.exponent) return *cfg.exponent;
  return DiagExponent(std::vector<double>(d, 1.0));
}

double tol(const RunConfig& cfg, const char* key, double fallback) { return cfg.tolerances.value(key, fallback); }

// 5 x 5 geometric points of [0.5, 2]^2 in the first two coordinates, the rest fixed at 1.
std::vector<std::vector<double>> w_grid(std::size_t d) {
  std::vector<std::vector<double>> pts;
  const double axis[] = {0.5, std::sqrt(0.5), 1.0, std::sqrt(2.0), 2.0};
  for (double a : axis)
    for (double b : axis) {
      std::vector<double> w(d, 1.0);
      w[0] = a;
      if (d > 1) w[1] = b;
      pts.push_back(std::move(w));
      if (d == 1) break;
    }
  return pts;
}

std::string point_str(std::span<const double> w) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

Check max_check(std::string name, double measured, double threshold, std::string detail = {}) {
  const bool ok = std::isfinite(measured) && measured < threshold;
  return {std::move(name), ok, measured, threshold, std::move(detail)};
}

void suite_quasihom(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const double threshold = tol(cfg, "quasihom", 1e-10);
  const TailDensityForm limit = liouville_limit_form(p, e);
  const TailDensityForm tail = liouville_copula_tail_form(p, e);
  const MarginalFrame frame = MarginalFrame::liouville(p, e);
  const std::vector<std::pair<std::string, TailDensityForm>> forms{
      {"limiting_density", limit},
      {"copula_tail_density", tail},
      {"density_to_copula_tail(limit)", density_to_copula_tail_form(limit, frame)},
      {"copula_tail_to_density(tail)", copula_tail_to_density_form(tail, frame)}};
  const auto grid = w_grid(p.dim());
  for (const auto& [name, form] : forms) {
    double worst = 0.0;
    for (double t : {0.5, 2.0, 10.0})
      for (const auto& w : grid) worst = std::max(worst, quasihomogeneity_defect(form, t, w));
    rep.checks.push_back(max_check("quasihom " + name, worst, threshold, "t in {0.5,2,10}, 25 points"));
  }
  // Negative control: a perturbed degree must be detected.
  TailDensityForm corrupted = tail;
  corrupted.degree += 0.5;
  double smallest = INFINITY;
  for (const auto& w : grid) smallest = std::min(smallest, quasihomogeneity_defect(corrupted, 2.0, w));
  rep.checks.push_back({"quasihom negative control (degree + 0.5)", smallest > 0.1, smallest, 0.1,
                        "passes when every defect exceeds the threshold"});
}

void suite_roundtrip(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const std::size_t d = p.dim();
  const double threshold = tol(cfg, "roundtrip", 1e-12);
  const TailDensityForm limit = liouville_limit_form(p, e);
  const TailDensityForm tail = liouville_copula_tail_form(p, e);
  const MarginalFrame frame = MarginalFrame::liouville(p, e);
  const TailDensityForm as_density = copula_tail_to_density_form(tail, frame);

  CounterRng rng(cfg.seed, 0);
  double worst_round = 0.0, worst_pair_c = 0.0, worst_pair_x = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> w(d);
    for (auto& wi : w) wi = std::exp(std::log(0.1) + (std::log(10.0) - std::log(0.1)) * rng.uniform_open());
    const double back = density_to_copula_tail(as_density, frame, w);
    const double ref = tail(w);
    worst_round = std::max(worst_round, std::abs(back - ref) / ref);
    const double via_limit = density_to_copula_tail(limit, frame, w);
    worst_pair_c = std::max(worst_pair_c, std::abs(via_limit - ref) / ref);
    const double x_back = copula_tail_to_density(tail, frame, w);
    const double x_ref = limiting_density(p, e, w);
    worst_pair_x = std::max(worst_pair_x, std::abs(x_back - x_ref) / x_ref);
  }
  rep.checks.push_back(max_check("density_to_copula_tail o copula_tail_to_density = id", worst_round, threshold,
                                 "100 log-uniform points in [0.1,10]^d"));
  rep.checks.push_back(max_check("limit density -> closed-form copula tail density", worst_pair_c, threshold));
  rep.checks.push_back(max_check("closed-form copula tail density -> limit density", worst_pair_x, threshold));
}

void suite_empirical(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const std::size_t d = p.dim();
  const double threshold = tol(cfg, "empirical", 0.01);
  std::vector<double> u_grid = cfg.task.value("u_grid", std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  LiouvilleCopula copula(p);
  const CopulaDensityFn c = [&copula](std::span<const double> u) { return copula.density(u); };
  const std::vector<RVSpec> r(d, RVSpec::at_zero(1.0, 1.0));
  const RVSpec ell = RVSpec::at_zero(1.0, 0.0);
  double worst = 0.0;
  std::string where;
  int converged = 0;
  const auto grid = w_grid(d);
  for (const auto& w : grid) {
    const auto res = empirical_tail_density(c, r, ell, TailOrder::ones(d), w, u_grid);
    const double ref = liouville_copula_tail_density(p, e, w);
    const double err = std::abs(res.limit - ref) / ref;
    converged += res.converged ? 1 : 0;
    if (!(err <= worst)) {
      worst = err;
      where = point_str(w);
    }
  }
  rep.checks.push_back(max_check("empirical tail density vs closed form (max rel. error)", worst, threshold,
                                 "worst at w=" + where + ", " + std::to_string(converged) + "/" +
                                     std::to_string(grid.size()) + " converged"));
}

// P(X_1 > x, X_2 > y) by cubature of the joint density.
double joint_survival_2d(const LiouvilleParams& p, double x, double y) {
  return quad::cubature_unit(
             [&](std::span<const double> u, std::span<const double> uc) {
               if (uc[0] <= 0.0 || uc[1] <= 0.0) return 0.0;
               const double s[2] = {x + (1.0 + x) * u[0] / uc[0], y + (1.0 + y) * u[1] / uc[1]};
               const double jac = (1.0 + x) / (uc[0] * uc[0]) * (1.0 + y) / (uc[1] * uc[1]);
               const double v = joint_density(p, s) * jac;
               return std::isfinite(v) ? v : 0.0;
             },
             2, 1e-10)
      .value;
}

void suite_exponent(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const std::size_t d = p.dim();
  const TailDensityForm tail = liouville_copula_tail_form(p, e);
  const std::vector<double> ones(d, 1.0), twos(d, 2.0);
  const double a1 = exponent_function(tail, ones);
  const double a2 = exponent_function(tail, twos);

  if (d == 2) {
    // 2 - lim P(U_1 > 1-u, U_2 > 1-u)/u, Richardson on u = 1e-3, 1e-4.
    auto joint = [&](double u) {
      const double x = marginal_upper_quantile(p, 0, u), y = marginal_upper_quantile(p, 1, u);
      return joint_survival_2d(p, x, y) / u;
    };
    const double u1 = 1e-3, u2 = 1e-4;
    const double j1 = joint(u1), j2 = joint(u2);
    const double oracle = 2.0 - (u1 * j2 - u2 * j1) / (u1 - u2);
    rep.checks.push_back(max_check("a_C(1,1) vs probability oracle", std::abs(a1 - oracle),
                                   tol(cfg, "exponent", 0.003),
                                   "a_C=" + format_double(a1) + " oracle=" + format_double(oracle)));
  } else {
    rep.checks.push_back({"a_C(1,...,1) finite", std::isfinite(a1), a1, 0.0, "probability oracle needs d = 2"});
  }
  rep.checks.push_back(max_check("homogeneity a_C(2w) = 2 a_C(w)", std::abs(a2 - 2.0 * a1),
                                 tol(cfg, "homogeneity", 0.01), "a_C(2,..,2)=" + format_double(a2)));

  const double h = cfg.task.value("h", 1e-2);
  std::vector<std::vector<double>> points{ones};
  if (d >= 2) {
    std::vector<double> w = ones;
    w[1] = 2.0;
    points.push_back(w);
  }
  for (const auto& w : points) {
    const auto md = exponent_mixed_derivative_defect(tail, w, h);
    rep.checks.push_back(max_check("|mixed difference of a_C| = lambda_C at " + point_str(w), md.defect,
                                   tol(cfg, "mixed_derivative", 0.03),
                                   "sign " + std::to_string(md.sign) + (md.step_too_small ? ", step too small" : "")));
  }

  const IntensityResult bc = intensity_measure(tail, BoxComplement{ones});
  rep.checks.push_back({"box complement in copula frame is divergent", bc.divergent, bc.divergent ? 1.0 : 0.0, 1.0,
                        bc.reason});
}

void suite_orthant(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const std::size_t d = p.dim();
  const auto t_grid = cfg.task.value("t_grid", std::vector<double>{100.0});
  const std::size_t n = cfg.task.value("n", std::size_t{1000000});
  const Region b = cfg.task.contains("region") ? region_from_json(cfg.task.at("region"))
                                               : Region{UpperOrthant{std::vector<double>(d, 1.0)}};
  const double sigmas = tol(cfg, "orthant_sigmas", 3.0);
  for (const auto& row : orthant_convergence(p, e, b, t_grid, n, cfg.seed, cfg.jobs)) {
    const double z = row.stderr_ > 0.0 ? std::abs(row.estimate - row.target) / row.stderr_ : INFINITY;
    rep.checks.push_back(max_check("orthant t=" + format_double(row.t) + " " + describe(b), z, sigmas,
                                   "estimate=" + format_double(row.estimate) + " target=" +
                                       format_double(row.target) + " stderr=" + format_double(row.stderr_) +
                                       " hits=" + std::to_string(row.hits) + " " + row.verdict));
  }
}

void suite_hill(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const std::size_t n = cfg.task.value("n", std::size_t{1000000});
  const std::size_t k = cfg.task.value("k", std::size_t{1000});
  const std::size_t i = cfg.task.value("coordinate", std::size_t{0});
  const auto res = marginal_tail_check(p, e, i, n, k, cfg.seed, cfg.jobs);
  const double rel = std::abs(res.hill.alpha - res.expected_alpha) / res.expected_alpha;
  rep.checks.push_back(max_check("Hill estimate vs rho/lambda_i", rel, tol(cfg, "hill", 0.1),
                                 "alpha_hat=" + format_double(res.hill.alpha) +
                                     " expected=" + format_double(res.expected_alpha) + " k=" + std::to_string(k)));
  if (res.slab.divergent) {
    rep.checks.push_back({"marginal slab mass", true, INFINITY, 0.0, "divergent: " + res.slab.reason});
    return;
  }
  // Slab mass vs the finite-t marginal ratio P(X_i > t^lambda_i) / V(t).
  const double t = 1e6;
  const double ratio = marginal_survival(p, i, std::pow(t, e[i])) / operator_normalizer(p, e, t);
  rep.checks.push_back(max_check("slab mass Lambda(x_i > 1) vs marginal ratio at t=1e6",
                                 std::abs(ratio - res.slab.value) / res.slab.value, tol(cfg, "slab", 1e-3),
                                 "slab=" + format_double(res.slab.value) + " ratio=" + format_double(ratio)));
}

void suite_karamata(const RunConfig& cfg, VerifyReport& rep) {
  const LiouvilleParams p = params_or_default(cfg);
  const DiagExponent e = exponent_for(cfg, p.dim());
  const double rho = operator_rho(p, e);
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double alpha = rho / e[i];
    const ScalarFunction dens = [&p, i](double x) { return marginal_density(p, i, x); };
    const ScalarFunction surv = [&p, i](double x) { return marginal_survival(p, i, x); };
    std::vector<double> defects;
    for (double t : {1e2, 1e4, 1e6}) defects.push_back(karamata_defect(dens, surv, alpha, t));
    const bool decreasing = defects[1] <= defects[0] && defects[2] <= defects[1];
    rep.checks.push_back({"Karamata survival ~ t f(t)/alpha, margin " + std::to_string(i + 1),
                          decreasing && defects.back() < tol(cfg, "karamata", 1e-2), defects.back(),
                          tol(cfg, "karamata", 1e-2),
                          "defects at t=1e2,1e4,1e6: " + format_double(defects[0]) + ", " +
                              format_double(defects[1]) + ", " + format_double(defects[2])});
  }
  // Compatibility of r(u) = u with margin 1; r(u) = u^2 must be rejected.
  const ScalarFunction surv0 = [&p](double x) { return marginal_survival(p, 0, x); };
  const std::vector<double> t_grid{1e2, 1e4, 1e6, 1e8};
  const double alpha0 = rho / e[0];
  const auto good = compatibility_defect(RVSpec::at_zero(1.0, 1.0), surv0, rho, alpha0, t_grid);
  const auto bad = compatibility_defect(RVSpec::at_zero(1.0, 2.0), surv0, rho, alpha0, t_grid);
  rep.checks.push_back({"r(u)=u compatible with margin 1", good.compatible, good.defects.back(), 1e-2, good.verdict});
  rep.checks.push_back({"r(u)=u^2 rejected", !bad.compatible && bad.verdict.rfind("incompatible", 0) == 0,
                        bad.defects.back(), 1e-2, bad.verdict});
}

}  // namespace

VerifyReport run_suite(const std::string& suite, const RunConfig& cfg) {
  VerifyReport rep;
  rep.suite = suite;
  if (suite == "quasihom") suite_quasihom(cfg, rep);
  else if (suite == "transform-roundtrip") suite_roundtrip(cfg, rep);
  else if (suite == "empirical-vs-closed") suite_empirical(cfg, rep);
  else if (suite == "exponent-consistency") suite_exponent(cfg, rep);
  else if (suite == "orthant-mc") suite_orthant(cfg, rep);
  else if (suite == "marginal-hill") suite_hill(cfg, rep);
  else if (suite == "karamata") suite_karamata(cfg, rep);
  else throw ConfigError("field 'task.suite': unknown suite '" + suite + "'");
  return rep;
}

}  // namespace opertail::cli
