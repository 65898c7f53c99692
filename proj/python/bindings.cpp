#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rieszlab/experiments.hpp"

namespace py = pybind11;
using namespace rieszlab;

namespace {

GroupPoint point(double x1, double x2, double a) { return GroupPoint(x1, x2, a); }

RunOptions run_options(std::uint64_t seed, std::optional<double> tol, double budget) {
  return RunOptions{seed, tol, budget};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core of rieszlab: group geometry, kernels and experiment runners";

  py::register_exception<Error>(m, "RieszlabError", PyExc_RuntimeError);

  m.def("radius", [](double x1, double x2, double a) { return radius(point(x1, x2, a)); });
  m.def("distance", [](std::array<double, 3> p, std::array<double, 3> q) {
    return distance(point(p[0], p[1], p[2]), point(q[0], q[1], q[2]));
  });
  m.def("multiply", [](std::array<double, 3> p, std::array<double, 3> q) {
    const GroupPoint r = multiply(point(p[0], p[1], p[2]), point(q[0], q[1], q[2]));
    return std::array<double, 3>{r.x1(), r.x2(), r.a()};
  });
  m.def("ball_volume", [](double r) { return ball_volume(r); });
  m.def("heat_kernel", [](double t, double x1, double x2, double a) { return heat_kernel(t, point(x1, x2, a)); });
  m.def("kernel_U", [](double x1, double x2, double a) { return kernel_U(point(x1, x2, a)); });
  m.def("kernel_W", [](double x1, double x2, double a) { return kernel_W(point(x1, x2, a)); });
  m.def("kernel_k", [](int i, double x1, double x2, double a) { return kernel_k(FieldIndex{i}, point(x1, x2, a)); });
  m.def("kernel_kij", [](int i, int j, double x1, double x2, double a) {
    return kernel_kij(FieldIndex{i}, FieldIndex{j}, point(x1, x2, a));
  });
  m.def("kernel_gij", [](int i, int j, double x1, double x2, double a) {
    return kernel_gij(FieldIndex{i}, FieldIndex{j}, point(x1, x2, a));
  });
  m.def("psi", [](int i, int j, double x1, double x2) { return psi_ij(FieldIndex{i}, FieldIndex{j})(x1, x2); });
  m.def("classify_integrability", [](std::array<int, 3> mexp, int p, bool upper) {
    return classify_integrability(mexp, p, upper ? HalfSpace::Plus : HalfSpace::Minus);
  }, py::arg("m"), py::arg("p"), py::arg("upper"));
  m.def("expand", [](int i, int j, int order) { return expand_kernel(FieldIndex{i}, FieldIndex{j}, order); },
        py::arg("i") = 0, py::arg("j") = 0, py::arg("order") = 12);

  // Runners return the JSON report text; the Python layer parses it.
  m.def("verify", [](const std::string& suite, std::uint64_t seed, std::optional<double> tol, double budget) {
    py::gil_scoped_release release;
    return run_verify(suite, run_options(seed, tol, budget)).to_json();
  }, py::arg("suite"), py::arg("seed") = 1, py::arg("tol") = py::none(), py::arg("budget") = 1.0);
  m.def("unbounded", [](const std::string& kind, int i, int j, double tmax, std::uint64_t seed, double budget) {
    py::gil_scoped_release release;
    return run_unbounded(kind, FieldIndex{i}, FieldIndex{j}, tmax, run_options(seed, std::nullopt, budget)).to_json();
  }, py::arg("kind"), py::arg("i") = 0, py::arg("j") = 0, py::arg("tmax") = 1e8, py::arg("seed") = 1,
        py::arg("budget") = 1.0);
  m.def("hn", [](std::vector<int> N_list, double L, int p, int q, int draws, int grid, int samples,
                 std::uint64_t seed) {
    HnOptions h;
    h.N_list = std::move(N_list);
    h.L = L;
    h.p = p;
    h.q = q;
    h.draws = draws;
    h.grid = grid;
    h.mc_samples = samples;
    py::gil_scoped_release release;
    return run_hn(h, run_options(seed, std::nullopt, 1.0)).to_json();
  }, py::arg("N_list") = std::vector<int>{2, 3, 4}, py::arg("L") = 60.0, py::arg("p") = 4, py::arg("q") = 1,
        py::arg("draws") = 20, py::arg("grid") = 4, py::arg("samples") = 40000, py::arg("seed") = 1);
  m.def("bounded", [](const std::string& check, std::uint64_t seed, std::optional<double> tol, double budget) {
    py::gil_scoped_release release;
    return run_bounded(check, run_options(seed, tol, budget)).to_json();
  }, py::arg("check"), py::arg("seed") = 1, py::arg("tol") = py::none(), py::arg("budget") = 1.0);
}
