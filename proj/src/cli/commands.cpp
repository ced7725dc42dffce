#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "opertail/cli.hpp"
#include "opertail/copulatail.hpp"
#include "opertail/error.hpp"
#include "opertail/exponent.hpp"

namespace opertail::cli {
namespace {

using nlohmann::json;

std::vector<std::vector<double>> parse_grid(const json& task, std::size_t default_dim) {
  if (!task.contains("grid")) throw ConfigError("field 'task.grid' is missing");
  const json& g = task.at("grid");
  try {
    if (g.contains("points")) {
      auto pts = g.at("points").get<std::vector<std::vector<double>>>();
      if (pts.empty()) throw ConfigError("field 'task.grid.points': empty");
      return pts;
    }
    std::vector<std::vector<double>> axes;
    if (g.contains("axes")) {
      axes = g.at("axes").get<std::vector<std::vector<double>>>();
    } else if (g.contains("lo") && g.contains("hi")) {
      auto lo = g.at("lo").get<std::vector<double>>();
      auto hi = g.at("hi").get<std::vector<double>>();
      if (lo.size() != hi.size()) throw ConfigError("field 'task.grid': lo/hi sizes differ");
      std::vector<std::size_t> counts;
      if (g.contains("n") && g.at("n").is_array())
        counts = g.at("n").get<std::vector<std::size_t>>();
      else
        counts.assign(lo.size(), g.value("n", std::size_t{5}));
      if (counts.size() != lo.size()) throw ConfigError("field 'task.grid.n': one count per axis");
      for (std::size_t i = 0; i < lo.size(); ++i) {
        std::vector<double> axis;
        for (std::size_t k = 0; k < counts[i]; ++k)
          axis.push_back(counts[i] == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) / static_cast<double>(counts[i] - 1));
        axes.push_back(axis);
      }
    } else {
      throw ConfigError("field 'task.grid': expected 'points', 'axes' or 'lo'/'hi'/'n'");
    }
    if (axes.empty()) throw ConfigError("field 'task.grid': no axes");
    (void)default_dim;
    std::vector<std::vector<double>> pts{{}};
    for (const auto& axis : axes) {
      std::vector<std::vector<double>> next;
      for (const auto& p : pts)
        for (double v : axis) {
          auto q = p;
          q.push_back(v);
          next.push_back(std::move(q));
        }
      pts = std::move(next);
    }
    return pts;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field 'task.grid': ") + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  return out;
}

struct Evaluator {
  std::string formula;
  std::string normalization;
  std::optional<TailDensityForm> form;
  std::function<double(const std::vector<double>&)> fn;
  std::size_t arity = 0;
  bool thread_safe = true;
};

Evaluator make_evaluator(const RunConfig& cfg, const std::string& name) {
  const json& task = cfg.task;
  Evaluator ev;
  if (name == "gauge") {
    const DiagExponent e = cfg.exponent ? *cfg.exponent : cfg.exponent_or_identity();
    ev.arity = e.dim();
    ev.formula = "gauge: sum_i x_i^(1/lambda_i)";
    ev.fn = [e](const std::vector<double>& x) { return gauge(e, x); };
    return ev;
  }
  const LiouvilleParams& p = cfg.require_distribution();
  const std::size_t coordinate = task.value("coordinate", std::size_t{0});
  if (coordinate >= p.dim()) throw ConfigError("field 'task.coordinate': out of range");
  ev.arity = p.dim();
  if (name == "joint_density") {
    ev.formula = "c_f g(sum x) prod x_i^(a_i-1)";
    ev.normalization = "c_f = " + format_double(p.normalizing_constant());
    ev.fn = [p](const std::vector<double>& x) { return joint_density(p, x); };
  } else if (name == "limiting_density") {
    const DiagExponent e = cfg.exponent_or_identity();
    ev.form = liouville_limit_form(p, e);
    ev.fn = [p, e](const std::vector<double>& x) { return limiting_density(p, e, x); };
  } else if (name == "liouville_copula_tail_density") {
    const DiagExponent e = cfg.exponent_or_identity();
    ev.form = liouville_copula_tail_form(p, e);
    ev.fn = [p, e](const std::vector<double>& w) { return liouville_copula_tail_density(p, e, w); };
  } else if (name == "exponent_function") {
    const DiagExponent e = cfg.exponent_or_identity();
    ev.form = liouville_copula_tail_form(p, e);
    const double tol = cfg.tolerances.value("cubature", 1e-10);
    ev.fn = [form = *ev.form, tol](const std::vector<double>& w) { return exponent_function(form, w, tol); };
  } else if (name == "intensity_measure") {
    // Grid points are the region's corner w; task.region names the shape.
    const DiagExponent e = cfg.exponent_or_identity();
    const std::string frame = task.value("frame", std::string("copula"));
    if (frame == "copula") ev.form = liouville_copula_tail_form(p, e);
    else if (frame == "original") ev.form = liouville_limit_form(p, e);
    else throw ConfigError("field 'task.frame': expected 'copula' or 'original', got '" + frame + "'");
    const std::string shape = task.value("region", std::string("lower_union"));
    if (shape != "box" && shape != "upper_orthant" && shape != "lower_union" && shape != "box_complement")
      throw ConfigError("field 'task.region': unknown region '" + shape + "'");
    const double tol = cfg.tolerances.value("cubature", 1e-10);
    ev.fn = [form = *ev.form, shape, tol](const std::vector<double>& w) {
      const auto r = intensity_measure(form, region_from_json(json{{"type", shape}, {"w", w}}), tol);
      if (r.divergent) throw DivergenceError("divergent: " + r.reason);
      return r.value;
    };
  } else if (name == "copula_density") {
    ev.formula = "f(F^-1(u)) / prod f_i(F_i^-1(u_i))";
    ev.fn = [p](const std::vector<double>& u) { return copula_density(p, u); };
  } else if (name == "marginal_density" || name == "marginal_cdf" || name == "marginal_survival" ||
             name == "radial_cdf") {
    ev.arity = 1;
    ev.formula = name == "radial_cdf" ? "P(sum X_i <= r)" : name + " of coordinate " + std::to_string(coordinate + 1);
    if (name == "marginal_density") {
      ev.normalization = "kappa_i = " + format_double(p.marginal_constant(coordinate));
      ev.fn = [p, coordinate](const std::vector<double>& x) { return marginal_density(p, coordinate, x[0]); };
    } else if (name == "marginal_cdf") {
      ev.fn = [p, coordinate](const std::vector<double>& x) { return marginal_cdf(p, coordinate, x[0]); };
    } else if (name == "marginal_survival") {
      ev.fn = [p, coordinate](const std::vector<double>& x) { return marginal_survival(p, coordinate, x[0]); };
    } else {
      ev.fn = [p](const std::vector<double>& x) { return radial_cdf(p, x[0]); };
    }
  } else {
    throw ConfigError("field 'task.evaluator': unknown evaluator '" + name + "'");
  }
  if (ev.form) {
    ev.formula = ev.form->formula_tag;
    ev.normalization = ev.form->normalization_note;
  }
  return ev;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> parallel_map(std::size_t n, unsigned jobs, const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w)
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += jobs) out[i] = fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

int cmd_eval(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  if (!cfg.task.contains("evaluator") || !cfg.task.at("evaluator").is_string())
    throw ConfigError("field 'task.evaluator' is missing");
  const std::string name = cfg.task.at("evaluator").get<std::string>();
  const Evaluator ev = make_evaluator(cfg, name);
  const auto points = parse_grid(cfg.task, ev.arity);
  for (std::size_t k = 0; k < points.size(); ++k)
    if (points[k].size() != ev.arity)
      throw ConfigError("field 'task.grid': point " + std::to_string(k) + " has dimension " +
                        std::to_string(points[k].size()) + ", evaluator expects " + std::to_string(ev.arity));

  const auto values = parallel_map(points.size(), cfg.jobs, [&](std::size_t k) { return ev.fn(points[k]); });

  auto csv = open_output(out / "eval.csv");
  for (std::size_t i = 0; i < ev.arity; ++i) csv << (i ? "," : "") << (ev.arity == 1 ? "x" : "x" + std::to_string(i + 1));
  csv << ",value,formula,normalization\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (std::size_t i = 0; i < points[k].size(); ++i) csv << (i ? "," : "") << format_double(points[k][i]);
    csv << "," << format_double(values[k]) << "," << csv_quote(ev.formula) << "," << csv_quote(ev.normalization) << "\n";
  }

  json meta{{"command", "eval"}, {"evaluator", name}, {"points", points.size()}, {"formula", ev.formula},
            {"normalization", ev.normalization}, {"config", cfg.raw}};
  if (ev.form) meta["form"] = ev.form->to_json();
  open_output(out / "eval.json") << meta.dump(2) << "\n";
  log << "eval " << name << ": " << points.size() << " points -> " << (out / "eval.csv").string() << "\n";
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const LiouvilleParams& p = cfg.require_distribution();
  if (!cfg.task.contains("n") || !cfg.task.at("n").is_number_unsigned())
    throw ConfigError("field 'task.n' is missing or not a positive integer");
  const std::size_t n = cfg.task.at("n").get<std::size_t>();
  if (n == 0) throw ConfigError("field 'task.n': must be >= 1");
  const SampleMatrix xs = sample(p, n, cfg.seed, cfg.jobs);

  auto csv = open_output(out / "sample.csv");
  csv << "# seed=" << cfg.seed << " distribution=" << to_json(p).dump() << "\n";
  for (std::size_t i = 0; i < p.dim(); ++i) csv << (i ? "," : "") << "x" << i + 1;
  csv << "\n";
  std::string line;
  for (std::size_t r = 0; r < xs.rows; ++r) {
    line.clear();
    const auto row = xs.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += format_double(row[i]);
    }
    line += '\n';
    csv << line;
  }
  log << "sample: " << n << " rows (seed " << cfg.seed << ") -> " << (out / "sample.csv").string() << "\n";
  return kExitOk;
}

bool VerifyReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"measured", std::isfinite(c.measured) ? json(c.measured) : json(format_double(c.measured))},
                   {"threshold", c.threshold},
                   {"detail", c.detail}});
  return {{"suite", suite}, {"passed", passed()}, {"checks", arr}};
}

int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  if (!cfg.task.contains("suite") || !cfg.task.at("suite").is_string())
    throw ConfigError("field 'task.suite' is missing");
  const std::string suite = cfg.task.at("suite").get<std::string>();
  const VerifyReport report = run_suite(suite, cfg);
  json doc = report.to_json();
  doc["config"] = cfg.raw;
  open_output(out / ("verify_" + suite + ".json")) << doc.dump(2) << "\n";
  for (const auto& c : report.checks)
    log << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured=" << format_double(c.measured)
        << " threshold=" << format_double(c.threshold) << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  log << "verify " << suite << ": " << (report.passed() ? "passed" : "FAILED") << "\n";
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Operator tail densities of copulas: evaluation, sampling and verification"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  for (const char* name : {"eval", "sample", "verify"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " command");
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "RNG seed (overrides config)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    const std::filesystem::path dir(out_dir);
    if (command == "eval") return cmd_eval(cfg, dir, out);
    if (command == "sample") return cmd_sample(cfg, dir, out);
    return cmd_verify(cfg, dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace opertail::cli
