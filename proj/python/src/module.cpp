#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lipext/cli/commands.hpp"
#include "lipext/extension.hpp"
#include "lipext/interpolation.hpp"
#include "lipext/measure_extension.hpp"
#include "lipext/metric.hpp"

namespace py = pybind11;
using namespace lipext;

namespace {

using Rows = std::vector<std::vector<double>>;

FiniteMetricSpace make_space(const Rows& dist) { return FiniteMetricSpace(Matrix::from_rows(dist)); }

SampledMap make_map(const std::vector<std::size_t>& subset, const Rows& values) {
  return SampledMap(subset, Matrix::from_rows(values));
}

Exponent make_exponent(double p) { return std::isinf(p) ? Exponent::infinity() : Exponent(p); }

BfsSpec make_bfs(const Vector& weights, double p, const Vector& scale) {
  return BfsSpec(FiniteMeasureSpace(weights), make_exponent(p), scale);
}

py::dict checks_dict(const std::vector<CheckResult>& checks) {
  py::dict out;
  for (const CheckResult& c : checks) {
    py::dict d;
    d["bound"] = c.bound;
    d["achieved"] = c.achieved;
    d["holds"] = c.holds;
    d["witness"] = c.witness;
    out[py::str(c.name)] = d;
  }
  return out;
}

py::dict extension_dict(const ExtensionResult& r) {
  py::dict d;
  d["values"] = r.extended.values.to_rows();
  d["constant"] = r.constant;
  d["checks"] = checks_dict(r.checks);
  d["ok"] = r.all_hold();
  return d;
}

ExtensionOptions strict_if_missing(const std::optional<double>& K) { return {!K.has_value()}; }

}  // namespace

PYBIND11_MODULE(_lipext, m) {
  m.doc() = "Lipschitz extensions and interpolation checks on finite metric and measure spaces.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", error);
  py::register_exception<ValidationError>(m, "ValidationError", error);

  m.def("lipschitz_constant",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values) {
          return lipschitz_constant(make_space(dist), make_map(subset, values), sup_distance()).value;
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"),
        "Lipschitz constant of a map on `subset` under the sup distance on its rows.");

  m.def("mcshane_extend",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values,
           std::optional<double> K) {
          return extension_dict(
              mcshane_extend(make_space(dist), make_map(subset, values), K.value_or(0.0), strict_if_missing(K)));
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"), py::arg("K") = py::none(),
        "McShane extension of a real map; K defaults to the map's own Lipschitz constant.");

  m.def("whitney_extend",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values,
           std::optional<double> K) {
          return extension_dict(
              whitney_extend(make_space(dist), make_map(subset, values), K.value_or(0.0), strict_if_missing(K)));
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"), py::arg("K") = py::none());

  m.def("pointwise_extend",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values,
           const Vector& weights, std::optional<double> K) {
          return extension_dict(pointwise_extend(make_space(dist), make_map(subset, values), K.value_or(0.0),
                                                 FiniteMeasureSpace(weights), strict_if_missing(K)));
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"), py::arg("weights"), py::arg("K") = py::none());

  m.def("coordinatewise_extend_linf",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values,
           std::optional<double> K) {
          return extension_dict(coordinatewise_extend_linf(make_space(dist), make_map(subset, values),
                                                           K.value_or(0.0), strict_if_missing(K)));
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"), py::arg("K") = py::none());

  m.def("measure_extend",
        [](const Rows& dist, const std::vector<std::size_t>& subset, const Rows& values,
           const Vector& weights, double K) {
          const FiniteMeasureSpace mu(weights);
          const SetFunctionTable phi = indicator_norm_set_function(BfsSpec(mu, Exponent(1.0)), K);
          MeasureExtensionOptions o;
          o.Y = BfsSpec(mu, Exponent(1.0));
          return extension_dict(measure_extend(make_space(dist), make_map(subset, values), phi, o).result);
        },
        py::arg("dist"), py::arg("subset"), py::arg("values"), py::arg("weights"), py::arg("K"),
        "Extension for phi = K mu, checked in L^1(mu).");

  m.def("quotient_classes",
        [](const Rows& dist, const Rows& values, double K) {
          const FiniteMetricSpace space = make_space(dist);
          const SampledMap map = SampledMap::total(Matrix::from_rows(values));
          return quotient(pseudo_metric_from_map(space, map, sup_distance(), K)).classes;
        },
        py::arg("dist"), py::arg("values"), py::arg("K"),
        "Classes of points identified by the pseudo-metric induced by a total map.");

  m.def("norm",
        [](const Vector& f, const Vector& weights, double p, const Vector& scale) {
          return norm(make_bfs(weights, p, scale), f);
        },
        py::arg("f"), py::arg("weights"), py::arg("p"), py::arg("scale") = Vector{});

  m.def("l1_zero_norm", [](const Vector& f, const Vector& weights) {
    return l1_zero_norm(f, FiniteMeasureSpace(weights));
  }, py::arg("f"), py::arg("weights"));

  m.def("calderon_norm",
        [](const Vector& x, const Vector& weights, double p0, double p1, double theta) {
          const CalderonSpace C(make_bfs(weights, p0, {}), make_bfs(weights, p1, {}), theta);
          return calderon_norm(C, x).value;
        },
        py::arg("x"), py::arg("weights"), py::arg("p0"), py::arg("p1"), py::arg("theta"));

  m.def("k_functional",
        [](double t, const Vector& a, const Vector& weights, double p0, double p1) {
          const InterpolationCouple c(make_bfs(weights, p0, {}), make_bfs(weights, p1, {}), 0.5, 1.0);
          return k_functional(t, a, c).value;
        },
        py::arg("t"), py::arg("a"), py::arg("weights"), py::arg("p0"), py::arg("p1"));

  m.def("real_interp_norm",
        [](const Vector& a, const Vector& weights, double p0, double p1, double theta, double q) {
          const InterpolationCouple c(make_bfs(weights, p0, {}), make_bfs(weights, p1, {}), theta, q);
          return real_interp_norm(a, c).value;
        },
        py::arg("a"), py::arg("weights"), py::arg("p0"), py::arg("p1"), py::arg("theta"), py::arg("q"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv{"lipext"};
          for (const std::string& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = cli::kToolVersion;
}
