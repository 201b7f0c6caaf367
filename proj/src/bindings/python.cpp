#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nvzeno/cli.hpp"
#include "nvzeno/error.hpp"
#include "nvzeno/experiments.hpp"
#include "nvzeno/zeno.hpp"

namespace py = pybind11;
using namespace nvzeno;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const CArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::DimensionMismatch, "expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  return ComplexMatrix(r, c, std::vector<Complex>(a.data(), a.data() + r * c));
}

CArray to_array(const ComplexMatrix& m) {
  CArray out({m.rows(), m.cols()});
  std::copy(m.entries().begin(), m.entries().end(), out.mutable_data());
  return out;
}

py::dict sweep_dict(const SweepResult& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["columns"] = r.columns;
  d["rows"] = r.rows;
  py::dict meta;
  for (const auto& [k, v] : r.metadata) meta[py::str(k)] = v;
  d["metadata"] = meta;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeno-subspace NV/nuclear spin simulator";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<Frame>(m, "Frame")
      .value("rotating", Frame::Rotating)
      .value("explicit_time", Frame::ExplicitTime);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("g_list", &SystemParams::g_list)
      .def_readwrite("omega", &SystemParams::omega)
      .def_readwrite("delta", &SystemParams::delta)
      .def_readwrite("gamma_nv", &SystemParams::gamma_nv)
      .def_readwrite("gamma_n", &SystemParams::gamma_n)
      .def_readwrite("gamma_nv_aux", &SystemParams::gamma_nv_aux)
      .def_readwrite("gamma_nv_dephasing", &SystemParams::gamma_nv_dephasing)
      .def_readwrite("frame", &SystemParams::frame)
      .def("validate", &SystemParams::validate);

  py::class_<GateResult>(m, "GateResult")
      .def_readonly("fidelities", &GateResult::fidelities)
      .def_readonly("phases", &GateResult::phases)
      .def_readonly("fidelity_superposition", &GateResult::fidelity_superposition)
      .def_readonly("fidelity_avg", &GateResult::fidelity_avg)
      .def_readonly("duration", &GateResult::duration)
      .def_readonly("used_lindblad", &GateResult::used_lindblad);

  py::class_<TruthRow>(m, "TruthRow")
      .def_readonly("input", &TruthRow::input)
      .def_readonly("output", &TruthRow::output)
      .def_readonly("population", &TruthRow::population)
      .def_readonly("phase", &TruthRow::phase)
      .def_readonly("nv_purity", &TruthRow::nv_purity);

  py::class_<QstResult>(m, "QstResult")
      .def_readonly("alpha", &QstResult::alpha)
      .def_readonly("beta", &QstResult::beta)
      .def_readonly("fidelity", &QstResult::fidelity)
      .def_readonly("z0_survival_min", &QstResult::z0_survival_min)
      .def_readonly("duration", &QstResult::duration)
      .def_property_readonly("times", [](const QstResult& r) { return r.trajectory.times; })
      .def_property_readonly("observables",
                             [](const QstResult& r) { return r.trajectory.observables; });

  m.def("run_gate", [](const SystemParams& p, bool superposition) {
    GateOptions o;
    o.superposition = superposition;
    return run_gate(p, o);
  }, py::arg("params"), py::arg("superposition") = true);
  m.def("gate_truth_table", [](const SystemParams& p) { return gate_truth_table(p); });
  m.def("gate_detuning_fidelity", [](const SystemParams& p) { return gate_detuning_fidelity(p); });
  m.def("run_qst", [](Complex alpha, Complex beta, const SystemParams& p, bool reverse,
                      double dg, double domega, double dt, std::size_t points) {
    QstOptions o;
    o.direction = reverse ? QstDirection::TwoToOne : QstDirection::OneToTwo;
    o.dg_over_g = dg;
    o.domega_over_omega = domega;
    o.dt_over_t = dt;
    o.time_points = points;
    return run_qst(alpha, beta, p, o);
  }, py::arg("alpha"), py::arg("beta"), py::arg("params"), py::arg("reverse") = false,
        py::arg("dg_over_g") = 0.0, py::arg("domega_over_omega") = 0.0,
        py::arg("dt_over_t") = 0.0, py::arg("time_points") = 201);
  m.def("zeno_convergence_report", [](const std::vector<double>& k) {
    return zeno_convergence_report(k);
  });
  m.def("survival_probability", &survival_probability, py::arg("g"), py::arg("omega"),
        py::arg("t"));

  m.def("system_hamiltonian", [](const SystemParams& p) {
    return to_array(system_hamiltonian(build_space(p.n_nuclei()), p).at(0.0));
  });
  m.def("eig_hermitian", [](const CArray& a) {
    const HermitianEig e = eig_hermitian(to_matrix(a));
    return py::make_tuple(e.eigenvalues, to_array(e.eigenvectors));
  });
  m.def("propagator", [](const CArray& h, double t) { return to_array(propagator(to_matrix(h), t)); });

  m.def("list_experiments", [] {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& e : list_experiments()) out.emplace_back(e.name, e.figure, e.description);
    return out;
  });
  m.def("run_config", [](const std::string& text) {
    return sweep_dict(sweep(to_sweep_spec(parse_config(text))));
  }, py::arg("config_json"));
  m.def("format_csv", [](const std::string& text) {
    return format_csv(sweep(to_sweep_spec(parse_config(text))));
  }, py::arg("config_json"));
}
