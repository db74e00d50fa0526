#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "procmat/cli.hpp"
#include "procmat/constructors.hpp"
#include "procmat/serialization.hpp"

namespace py = pybind11;
using namespace procmat;

namespace {

// Documents cross the boundary as JSON text; the Python layer wraps them in dicts.
ProcessMatrix load(const std::string& text) { return process_from_json(parse_json(text)); }

SlotPattern pattern_named(const ProcessLayout& layout, const std::string& name) {
  if (name == "dephase-all") return dephase_all_pattern(layout);
  if (name.size() == 2 && name[0] == 'w') return example_pattern(name[1] - '0');
  throw InputError("", "unknown pattern '" + name + "'");
}

SolveOptions options(bool facial_reduction, double tol) {
  SolveOptions o;
  o.facial_reduction = facial_reduction;
  o.tol = tol;
  return o;
}

ConstraintSystem assemble(const ProcessMatrix& w, const std::string& cls, bool facial_reduction) {
  if (cls == "qcqc") return assemble_qcqc_system(w, facial_reduction);
  if (cls == "qccc") return assemble_qccc_system(w, facial_reduction);
  throw InputError("", "expected class qcqc or qccc, got '" + cls + "'");
}

std::string decompose(const std::string& text, const std::string& method) {
  const Json doc = parse_json(text);
  const ProcessMatrix w = process_from_json(doc);
  if (method == "dephased-all") return dump_json(bundle_to_json(w, qcqc_from_dephased_all(w)));
  if (method == "dephased-inputs") return dump_json(bundle_to_json(w, qcqc_from_dephased_inputs(w)));
  if (method != "qccc-from-qcqc")
    throw InputError("", "expected dephased-all, dephased-inputs or qccc-from-qcqc, got '" + method + "'");
  QcQcDecomposition d;
  if (doc.contains("decomposition")) {
    const Decomposition given = decomposition_from_json(doc, w.layout());
    if (!std::holds_alternative<QcQcDecomposition>(given))
      throw InputError("/decomposition/kind", "qccc-from-qcqc needs a qcqc decomposition");
    d = std::get<QcQcDecomposition>(given);
  } else {
    d = qcqc_from_dephased_all(w);
  }
  return dump_json(bundle_to_json(w, qccc_from_dephased_qcqc(w, d)));
}

std::string verify(const std::string& text, double tol) {
  const Json doc = parse_json(text);
  const ProcessMatrix w = process_from_json(doc);
  if (!doc.contains("decomposition")) throw InputError("", "missing field 'decomposition'");
  const Decomposition d = decomposition_from_json(doc, w.layout());
  const ValidityReport rep = std::holds_alternative<QcQcDecomposition>(d) ? verify_qcqc(w, std::get<QcQcDecomposition>(d), tol)
                                                                          : verify_qccc(w, std::get<QcCcDecomposition>(d), tol);
  return dump_json(report_to_json(rep));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Process matrices, quantum circuit classes and their SDP membership tests";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def("build_switch", [](bool with_decomposition) {
    const ProcessMatrix w = build_quantum_switch();
    return dump_json(with_decomposition ? bundle_to_json(w, switch_decomposition()) : process_to_json(w));
  }, py::arg("with_decomposition") = false);
  m.def("build_example", [](int n) { return dump_json(process_to_json(build_example(n))); }, py::arg("n"));
  m.def("apply_pattern", [](const std::string& process, const std::string& pattern) {
    const ProcessMatrix w = load(process);
    return dump_json(process_to_json(apply_pattern(w, pattern_from_json(parse_json(pattern)))));
  }, py::arg("process"), py::arg("pattern"));
  m.def("apply_builtin_pattern", [](const std::string& process, const std::string& name) {
    const ProcessMatrix w = load(process);
    return dump_json(process_to_json(apply_pattern(w, pattern_named(w.layout(), name))));
  }, py::arg("process"), py::arg("name"));
  m.def("check_validity", [](const std::string& process, double tol) {
    return dump_json(report_to_json(check_validity(load(process), tol)));
  }, py::arg("process"), py::arg("tol") = 1e-10);
  m.def("membership", [](const std::string& process, const std::string& cls, bool facial_reduction, double tol) {
    const ProcessMatrix w = load(process);
    const ConstraintSystem sys = assemble(w, cls, facial_reduction);
    Verdict v;
    {
      py::gil_scoped_release release;
      v = solve_membership(w, sys, options(facial_reduction, tol));
    }
    return dump_json(verdict_to_json(w.layout(), sys, v));
  }, py::arg("process"), py::arg("cls"), py::arg("facial_reduction") = true, py::arg("tol") = 1e-8);
  m.def("dump_system", [](const std::string& process, const std::string& cls, bool facial_reduction) {
    const ProcessMatrix w = load(process);
    return dump_json(system_to_json(assemble(w, cls, facial_reduction), w.layout()));
  }, py::arg("process"), py::arg("cls"), py::arg("facial_reduction") = true);
  m.def("decompose", &decompose, py::arg("process"), py::arg("method"));
  m.def("verify_decomposition", &verify, py::arg("bundle"), py::arg("tol") = 1e-8);
  m.def("process_matrix", [](const std::string& process) -> Eigen::MatrixXcd { return load(process).op().matrix(); },
        py::arg("process"));
  m.def("run_cli", [](const std::vector<std::string>& args, const std::string& input) {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli_main(args, in, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), py::arg("input") = "");

  m.attr("__version__") = "0.1.0";
}
