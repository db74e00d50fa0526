#include "procmat/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "procmat/constructors.hpp"
#include "procmat/serialization.hpp"

namespace procmat {

namespace {

struct Options {
  std::string input = "-";
  std::string output = "-";
  double tol = 1e-8;
  std::string expect;
  std::string pattern_file;
  std::string builtin;
  std::string method;
  std::vector<std::string> bases;
  std::string dump_system;
  bool no_reduction = false;
  bool json = false;
  bool no_sdp = false;
  bool with_decomposition = false;
  int example = 0;
};

class Io {
 public:
  Io(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  Json read(const std::string& path) const {
    std::string body;
    if (path == "-") {
      std::ostringstream ss;
      ss << in_.rdbuf();
      body = ss.str();
    } else {
      std::ifstream f(path);
      if (!f) throw InputError(path, "cannot open file");
      std::ostringstream ss;
      ss << f.rdbuf();
      body = ss.str();
    }
    return parse_json(body, path == "-" ? "stdin" : path);
  }

  void write(const std::string& path, const std::string& text) const {
    if (path == "-") {
      out_ << text << '\n';
      return;
    }
    std::ofstream f(path);
    if (!f) throw InputError(path, "cannot open file for writing");
    f << text << '\n';
  }

 private:
  std::istream& in_;
  std::ostream& out_;
};

std::vector<DephasingBasis> parse_bases(const std::vector<std::string>& specs, const RegistryPtr& reg) {
  std::vector<DephasingBasis> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("--basis", "expected SYSTEM=Z or SYSTEM=X, got '" + s + "'");
    const std::string name = s.substr(0, eq), type = s.substr(eq + 1);
    const auto idx = reg->find(name);
    if (!idx) throw InputError("--basis", "unknown subsystem '" + name + "'");
    if (type != "Z" && type != "X") throw InputError("--basis", "basis must be Z or X, got '" + type + "'");
    out.push_back(basis_of(reg, *idx, type == "Z" ? BasisType::Z : BasisType::X));
  }
  return out;
}

int outcome(bool positive, const std::string& expect, const std::string& actual, std::ostream& err) {
  if (expect.empty()) return positive ? 0 : 1;
  std::string lowered = actual;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lowered == expect) return 0;
  err << "expected " << expect << ", got " << lowered << '\n';
  return 1;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(3) << std::scientific << x;
  return ss.str();
}

void print_report_table(std::ostream& os, const ProcessMatrix& w, const ValidityReport& rep,
                        const std::vector<std::pair<std::string, Verdict>>& verdicts) {
  const auto& reg = *w.registry();
  os << "process on " << reg.describe(reg.all()) << " (side " << w.op().side() << ", " << w.n_slots() << " slots)\n";
  os << "  valid: " << (rep.verdict ? "yes" : "no") << "   max residual " << fmt(rep.max_residual()) << "   min eigenvalue "
     << fmt(rep.psd_min_eig) << "   normalization gap " << fmt(rep.normalization_gap) << '\n';
  for (const auto& [k, v] : rep.residuals) os << "    " << std::left << std::setw(16) << k << fmt(v) << '\n';
  for (const auto& [name, v] : verdicts) {
    os << "  " << std::left << std::setw(6) << name << to_string(v.status);
    if (v.status != VerdictStatus::Undetermined) os << "   margin " << (std::isfinite(v.margin) ? fmt(v.margin) : "inf");
    os << "   " << std::fixed << std::setprecision(2) << v.runtime_s << " s";
    if (!v.note.empty()) os << "   (" << v.note << ")";
    os << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

int run(CLI::App& app, const Options& o, Io& io, std::ostream& err) {
  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  SolveOptions sopt;

  if (cmd == "build-switch") {
    ProcessMatrix w = build_quantum_switch();
    io.write(o.output, dump_json(o.with_decomposition ? bundle_to_json(w, switch_decomposition()) : process_to_json(w)));
    return 0;
  }
  if (cmd == "build-example") {
    io.write(o.output, dump_json(process_to_json(build_example(o.example))));
    return 0;
  }
  const Json doc = io.read(o.input);
  if (cmd == "apply-pattern") {
    ProcessMatrix w = process_from_json(doc);
    SlotPattern p;
    if (!o.builtin.empty()) {
      if (o.builtin == "dephase-all") p = dephase_all_pattern(w.layout());
      else if (o.builtin.size() == 2 && o.builtin[0] == 'w') p = example_pattern(o.builtin[1] - '0');
      else throw InputError("--builtin", "unknown pattern '" + o.builtin + "'");
    } else {
      p = pattern_from_json(io.read(o.pattern_file));
    }
    io.write(o.output, dump_json(process_to_json(apply_pattern(w, p))));
    return 0;
  }
  if (cmd == "validate") {
    ProcessMatrix w = process_from_json(doc);
    ValidityReport rep = check_validity(w, o.tol);
    io.write(o.output, dump_json(report_to_json(rep)));
    return outcome(rep.verdict, o.expect, rep.verdict ? "valid" : "invalid", err);
  }
  if (cmd == "check-qcqc" || cmd == "check-qccc") {
    ProcessMatrix w = process_from_json(doc);
    const bool qc = cmd == "check-qcqc";
    ConstraintSystem sys = qc ? assemble_qcqc_system(w, !o.no_reduction) : assemble_qccc_system(w, !o.no_reduction);
    if (!o.dump_system.empty()) io.write(o.dump_system, dump_json(system_to_json(sys, w.layout())));
    Verdict v = solve_membership(w, sys, sopt);
    io.write(o.output, dump_json(verdict_to_json(w.layout(), sys, v)));
    return outcome(v.status == VerdictStatus::Feasible, o.expect, to_string(v.status), err);
  }
  if (cmd == "decompose") {
    ProcessMatrix w = process_from_json(doc);
    const auto bases = parse_bases(o.bases, w.registry());
    if (o.method == "dephased-all") {
      io.write(o.output, dump_json(bundle_to_json(w, qcqc_from_dephased_all(w, bases))));
    } else if (o.method == "dephased-inputs") {
      io.write(o.output, dump_json(bundle_to_json(w, qcqc_from_dephased_inputs(w, bases))));
    } else {
      QcQcDecomposition d;
      if (doc.is_object() && doc.contains("decomposition")) {
        Decomposition given = decomposition_from_json(doc, w.layout());
        if (!std::holds_alternative<QcQcDecomposition>(given))
          throw InputError("/decomposition/kind", "qccc-from-qcqc needs a qcqc decomposition");
        d = std::get<QcQcDecomposition>(given);
      } else {
        d = qcqc_from_dephased_all(w, bases);
      }
      io.write(o.output, dump_json(bundle_to_json(w, qccc_from_dephased_qcqc(w, d, bases))));
    }
    return 0;
  }
  if (cmd == "check-decomposition") {
    ProcessMatrix w = process_from_json(doc);
    if (!doc.contains("decomposition")) throw InputError("", "missing field 'decomposition'");
    Decomposition d = decomposition_from_json(doc, w.layout());
    ValidityReport rep = std::holds_alternative<QcQcDecomposition>(d) ? verify_qcqc(w, std::get<QcQcDecomposition>(d), o.tol)
                                                                      : verify_qccc(w, std::get<QcCcDecomposition>(d), o.tol);
    io.write(o.output, dump_json(report_to_json(rep)));
    return outcome(rep.verdict, o.expect, rep.verdict ? "valid" : "invalid", err);
  }
  if (cmd == "report") {
    ProcessMatrix w = process_from_json(doc);
    ValidityReport rep = check_validity(w, o.tol);
    std::vector<std::pair<std::string, Verdict>> verdicts;
    Json j{{"validity", report_to_json(rep)}};
    if (!o.no_sdp && rep.verdict) {
      auto qsys = assemble_qcqc_system(w);
      auto csys = assemble_qccc_system(w);
      Verdict q = solve_membership(w, qsys, sopt), c = solve_membership(w, csys, sopt);
      j["qcqc"] = verdict_to_json(w.layout(), qsys, q);
      j["qccc"] = verdict_to_json(w.layout(), csys, c);
      verdicts = {{"QC-QC", q}, {"QC-CC", c}};
    }
    if (o.json) io.write(o.output, dump_json(j));
    else {
      std::ostringstream ss;
      print_report_table(ss, w, rep, verdicts);
      io.write(o.output, ss.str());
    }
    return rep.verdict ? 0 : 1;
  }
  throw InputError("", "unknown subcommand '" + cmd + "'");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Process-matrix toolkit: validity, circuit classes and switch examples"};
  app.name("procmat");
  app.require_subcommand(1, 1);
  Options o;
  auto io_opts = [&](CLI::App* s) {
    s->add_option("-i,--input", o.input, "input JSON file ('-' for stdin)");
    s->add_option("-o,--output", o.output, "output file ('-' for stdout)");
  };
  auto* bs = app.add_subcommand("build-switch", "write the quantum switch process");
  bs->add_option("-o,--output", o.output, "output file ('-' for stdout)");
  bs->add_flag("--with-decomposition", o.with_decomposition, "write a bundle with the QC-QC decomposition");
  auto* be = app.add_subcommand("build-example", "write closed-form example N (1, 2 or 3)");
  be->add_option("n", o.example, "example number")->required()->check(CLI::Range(1, 3));
  be->add_option("-o,--output", o.output, "output file ('-' for stdout)");
  auto* ap = app.add_subcommand("apply-pattern", "inject, trace out and dephase subsystems");
  io_opts(ap);
  auto* pf = ap->add_option("--pattern", o.pattern_file, "pattern JSON file");
  auto* pb = ap->add_option("--builtin", o.builtin, "built-in pattern: w1, w2, w3, dephase-all");
  pf->excludes(pb);
  ap->require_option(1, 1);
  auto* va = app.add_subcommand("validate", "check the process-matrix constraints");
  io_opts(va);
  va->add_option("--expect", o.expect, "valid | invalid")->check(CLI::IsMember({"valid", "invalid"}));
  va->add_option("--tol", o.tol, "tolerance");
  for (const char* name : {"check-qcqc", "check-qccc"}) {
    auto* s = app.add_subcommand(name, std::string(name) == "check-qcqc" ? "SDP membership test for QC-QCs" : "SDP membership test for QC-CCs");
    io_opts(s);
    s->add_option("--expect", o.expect, "feasible | infeasible | undetermined")
        ->check(CLI::IsMember({"feasible", "infeasible", "undetermined"}));
    s->add_option("--dump-system", o.dump_system, "write the assembled constraint system as JSON");
    s->add_flag("--no-reduction", o.no_reduction, "assemble the system without facial reduction");
  }
  auto* de = app.add_subcommand("decompose", "construct a decomposition of a dephased process");
  io_opts(de);
  de->add_option("--method", o.method, "dephased-all | dephased-inputs | qccc-from-qcqc")
      ->required()
      ->check(CLI::IsMember({"dephased-all", "dephased-inputs", "qccc-from-qcqc"}));
  de->add_option("--basis", o.bases, "SYSTEM=Z|X dephasing basis override (repeatable)");
  auto* cd = app.add_subcommand("check-decomposition", "verify a bundled decomposition");
  io_opts(cd);
  cd->add_option("--expect", o.expect, "valid | invalid")->check(CLI::IsMember({"valid", "invalid"}));
  cd->add_option("--tol", o.tol, "tolerance");
  auto* rp = app.add_subcommand("report", "validity and membership summary");
  io_opts(rp);
  rp->add_flag("--json", o.json, "machine-readable output");
  rp->add_flag("--no-sdp", o.no_sdp, "skip the membership programs");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "procmat: " << e.what() << '\n';
    return 2;
  }
  Io io(in, out);
  try {
    return run(app, o, io, err);
  } catch (const InputError& e) {
    err << "procmat: input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "procmat: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "procmat: precondition failed: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    err << "procmat: invalid input: " << e.what() << '\n';
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cin, std::cout, std::cerr);
}

}  // namespace procmat
