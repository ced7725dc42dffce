#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "opertail/cli.hpp"
#include "opertail/config.hpp"
#include "opertail/copulatail.hpp"
#include "opertail/error.hpp"
#include "opertail/exponent.hpp"
#include "opertail/liouville.hpp"
#include "opertail/regvar.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace opertail;

namespace {

// Python dicts cross the boundary as JSON text; the package wrapper does the dumps/loads.
LiouvilleParams params(const std::string& text) { return liouville_from_json(json::parse(text)); }

DiagExponent exponent(const LiouvilleParams& p, const std::vector<double>& eig) {
  return eig.empty() ? DiagExponent(std::vector<double>(p.dim(), 1.0)) : DiagExponent(eig);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Operator tail densities of Liouville copulas (compiled core)";

  // Later registrations are tried first, so bases go in before subclasses.
  const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  const auto& domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<IntegrabilityError>(m, "IntegrabilityError", domain.ptr());
  py::register_exception<NotRegularlyVaryingError>(m, "NotRegularlyVaryingError", domain.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("validate", [](const std::string& dist) { return to_json(params(dist)).dump(); });
  m.def("normalizing_constant", [](const std::string& dist) { return params(dist).normalizing_constant(); });
  m.def("joint_density", [](const std::string& dist, const std::vector<double>& x) { return joint_density(params(dist), x); });
  m.def("marginal_density", [](const std::string& dist, std::size_t i, double x) { return marginal_density(params(dist), i, x); });
  m.def("marginal_cdf", [](const std::string& dist, std::size_t i, double x) { return marginal_cdf(params(dist), i, x); });
  m.def("marginal_survival",
        [](const std::string& dist, std::size_t i, double x) { return marginal_survival(params(dist), i, x); });
  m.def("radial_cdf", [](const std::string& dist, double r) { return radial_cdf(params(dist), r); });
  m.def("copula_density", [](const std::string& dist, const std::vector<double>& u) { return copula_density(params(dist), u); });

  m.def("sample", [](const std::string& dist, std::size_t n, std::uint64_t seed, unsigned jobs) {
    SampleMatrix xs;
    {
      py::gil_scoped_release release;
      xs = sample(params(dist), n, seed, jobs);
    }
    py::array_t<double> out({xs.rows, xs.cols});
    std::copy(xs.data.begin(), xs.data.end(), out.mutable_data());
    return out;
  }, py::arg("dist"), py::arg("n"), py::arg("seed"), py::arg("jobs") = 1);

  m.def("limiting_density", [](const std::string& dist, const std::vector<double>& eig, const std::vector<double>& x) {
    const auto p = params(dist);
    return limiting_density(p, exponent(p, eig), x);
  });
  m.def("copula_tail_density", [](const std::string& dist, const std::vector<double>& eig, const std::vector<double>& w) {
    const auto p = params(dist);
    return liouville_copula_tail_density(p, exponent(p, eig), w);
  });
  m.def("exponent_function",
        [](const std::string& dist, const std::vector<double>& eig, const std::vector<double>& w, double tol) {
          const auto p = params(dist);
          return exponent_function(liouville_copula_tail_form(p, exponent(p, eig)), w, tol);
        },
        py::arg("dist"), py::arg("eig"), py::arg("w"), py::arg("tol") = 1e-10);
  m.def("intensity_measure",
        [](const std::string& dist, const std::vector<double>& eig, const std::string& region, bool copula_frame) {
          const auto p = params(dist);
          const auto e = exponent(p, eig);
          const auto form = copula_frame ? liouville_copula_tail_form(p, e) : liouville_limit_form(p, e);
          const auto r = intensity_measure(form, region_from_json(json::parse(region)));
          return py::make_tuple(r.divergent, r.value, r.reason);
        });
  m.def("hill_estimate", [](const std::vector<double>& xs, std::optional<std::size_t> k) {
    const auto est = hill_estimate(xs, k);
    return py::make_tuple(est.alpha, est.k);
  }, py::arg("sample"), py::arg("k") = py::none());
  m.def("run_suite", [](const std::string& suite, const std::string& config) {
    const RunConfig cfg = run_config_from_json(json::parse(config));
    return cli::run_suite(suite, cfg).to_json().dump();
  });
  m.def("suite_names", [] { return cli::suite_names(); });
}
