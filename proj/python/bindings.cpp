#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "weightlab/cli.hpp"
#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"
#include "weightlab/spaces.hpp"
#include "weightlab/verify.hpp"
#include "weightlab/weights.hpp"

namespace py = pybind11;
using namespace weightlab;

namespace {

GridFunction from_array(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != g.size())
    throw ParameterError("array has " + std::to_string(a.size()) + " samples, grid has " + std::to_string(g.size()));
  return GridFunction(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const GridFunction& f) {
  const Grid& g = f.grid();
  std::vector<py::ssize_t> shape{g.N()};
  if (g.n() == 2) shape = {g.N(), g.N()};
  py::array_t<double> out(shape);
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  py::class_<Grid>(m, "Grid")
      .def(py::init([](int n, int N, double L) { return Grid(Box{n, {0.0, 0.0}, L}, N); }), py::arg("n") = 1,
           py::arg("N") = 64, py::arg("L") = 4.0)
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("N", &Grid::N)
      .def_property_readonly("L", &Grid::L)
      .def_property_readonly("h", &Grid::h)
      .def("coords", [](const Grid& g) {
        std::vector<double> x(g.N());
        for (int i = 0; i < g.N(); ++i) x[i] = g.coord(0, i);
        return x;
      });

  py::class_<Weight>(m, "Weight")
      .def_static("one", &Weight::one)
      .def_static("power", [](double beta) { return Weight::power(beta); }, py::arg("beta"))
      .def_static("shifted", [](double gamma) { return Weight::shifted(gamma); }, py::arg("gamma"))
      .def("__call__", [](const Weight& w, double x, double y) { return w({x, y}); }, py::arg("x"), py::arg("y") = 0.0)
      .def("__repr__", &Weight::describe);

  m.def("maximal_hl", [](const Grid& g, py::array_t<double> f) { return to_array(maximal(from_array(g, f), maximal_variants::HL{})); },
        py::arg("grid"), py::arg("f"));
  m.def("lebesgue_norm", [](const Grid& g, py::array_t<double> f, double p, const Weight& w) {
    return lebesgue_norm(from_array(g, f), p, w);
  }, py::arg("grid"), py::arg("f"), py::arg("p"), py::arg("weight") = Weight::one());
  m.def("lorentz_norm", [](const Grid& g, py::array_t<double> f, double p, double q, const Weight& w) {
    return lorentz_norm(from_array(g, f), p, q, w);
  }, py::arg("grid"), py::arg("f"), py::arg("p"), py::arg("q"), py::arg("weight") = Weight::one());
  m.def("bmo_norm", [](const Grid& g, py::array_t<double> f) { return bmo_norm(from_array(g, f)).value; },
        py::arg("grid"), py::arg("f"));

  m.def("ap_trend", [](const Weight& w, double p, const Grid& g, int g_max) {
    auto r = classify(w, classes::Ap{p}, dyadic_family_ladder(g, g_max));
    return py::make_tuple(to_string(r.trend), r.constants);
  }, py::arg("weight"), py::arg("p"), py::arg("grid"), py::arg("g_max") = 8);

  m.def("probe_tags", &probe_tags);
  m.def("probe", [](const std::string& tag, const std::map<std::string, std::string>& overrides) {
    py::gil_scoped_release release;
    return to_json_text(boundedness_probe(ExperimentSpec::make(tag, overrides)));
  }, py::arg("theorem"), py::arg("overrides") = std::map<std::string, std::string>{});

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "weightlab");
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
