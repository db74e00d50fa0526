#include "procmat/serialization.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace procmat {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw InputError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string child(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string child(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where, "expected a number");
  return j.get<double>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw InputError(where, "expected a string");
  return j.get<std::string>();
}

cplx complex_entry(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw InputError(where, "expected [re, im]");
  return {number(j[0], child(where, 0)), number(j[1], child(where, 1))};
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json names_json(const SpaceRegistry& reg, const SubsystemSet& s) {
  Json out = Json::array();
  for (auto i : s) out.push_back(reg[i].name);
  return out;
}

SubsystemSet names_from_json(const Json& j, const SpaceRegistry& reg, const std::string& where, bool ordered) {
  if (!j.is_array()) throw InputError(where, "expected an array of subsystem names");
  SubsystemSet out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = text(j[i], child(where, i));
    auto idx = reg.find(name);
    if (!idx) throw InputError(child(where, i), "unknown subsystem '" + name + "'");
    if (ordered && !out.empty() && *idx <= out.back())
      throw InputError(where, "subsystems must be listed once each, in registry order");
    out.push_back(*idx);
  }
  return normalized(out);
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string role_string(const RoleAssignment& r) {
  switch (r.role) {
    case Role::Past: return "P";
    case Role::Future: return "F";
    case Role::Input: return "I:" + r.slot;
    case Role::Output: return "O:" + r.slot;
  }
  return "P";
}

RoleAssignment role_from_string(const std::string& s, const std::string& where) {
  if (s == "P") return {Role::Past, ""};
  if (s == "F") return {Role::Future, ""};
  if (s.size() > 2 && s[1] == ':' && (s[0] == 'I' || s[0] == 'O'))
    return {s[0] == 'I' ? Role::Input : Role::Output, s.substr(2)};
  throw InputError(where, "role must be \"P\", \"F\", \"I:<slot>\" or \"O:<slot>\", got \"" + s + "\"");
}

Json mask_names(const ProcessLayout& L, SlotMask mask) {
  Json out = Json::array();
  for (std::size_t k = 0; k < L.n_slots(); ++k)
    if (mask >> k & 1u) out.push_back(L.slots()[k].name);
  return out;
}

std::size_t slot_from_json(const Json& j, const ProcessLayout& L, const std::string& where) {
  const std::string name = text(j, where);
  try {
    return L.slot_index(name);
  } catch (const std::out_of_range&) {
    throw InputError(where, "unknown slot '" + name + "'");
  }
}

Json sequence_names(const ProcessLayout& L, const Sequence& s) {
  Json out = Json::array();
  for (auto k : s) out.push_back(L.slots()[k].name);
  return out;
}

}  // namespace

Json parse_json(const std::string& text_in, const std::string& source) {
  try {
    return Json::parse(text_in);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text_in.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text_in[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(source + ": line " + std::to_string(line) + ", column " + std::to_string(col), msg);
  }
}

std::string dump_json(const Json& j, int indent) { return j.dump(indent); }

Json matrix_to_json(const Eigen::MatrixXcd& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(complex_json(m(i, k)));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

Eigen::MatrixXcd matrix_from_json(const Json& j, const std::string& where) {
  const auto rows = static_cast<Eigen::Index>(number(field(j, "rows", where), child(where, "rows")));
  const auto cols = static_cast<Eigen::Index>(number(field(j, "cols", where), child(where, "cols")));
  const Json& e = field(j, "entries", where);
  if (rows < 0 || cols < 0 || !e.is_array() || static_cast<Eigen::Index>(e.size()) != rows * cols)
    throw InputError(child(where, "entries"), "expected rows*cols entries");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto idx = static_cast<std::size_t>(i * cols + k);
      m(i, k) = complex_entry(e[idx], child(child(where, "entries"), idx));
    }
  return m;
}

Json operator_to_json(const LabeledOperator& op) {
  Json entries = Json::array();
  const auto& m = op.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back(complex_json(m(i, k)));
  return Json{{"subsystems", names_json(*op.registry(), op.subsystems())}, {"entries", std::move(entries)}};
}

LabeledOperator operator_from_json(const Json& j, const RegistryPtr& registry, const std::string& where) {
  const SubsystemSet on = names_from_json(field(j, "subsystems", where), *registry, child(where, "subsystems"), true);
  const Json& e = field(j, "entries", where);
  const Eigen::Index d = registry->dimension(on);
  if (!e.is_array() || static_cast<Eigen::Index>(e.size()) != d * d)
    throw InputError(child(where, "entries"), "expected " + std::to_string(d * d) + " entries (side " +
                                                  std::to_string(d) + "), got " + std::to_string(e.is_array() ? e.size() : 0));
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto idx = static_cast<std::size_t>(i * d + k);
      m(i, k) = complex_entry(e[idx], child(child(where, "entries"), idx));
    }
  return {registry, on, std::move(m)};
}

Json layout_to_json(const ProcessLayout& layout) {
  Json out = Json::array();
  const auto& reg = *layout.registry();
  for (std::size_t s = 0; s < reg.size(); ++s)
    out.push_back(Json{{"name", reg[s].name}, {"dim", reg[s].dim}, {"role", role_string(layout.roles()[s])}});
  return out;
}

ProcessLayout layout_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError(where, "expected a non-empty array of subsystems");
  std::vector<SystemLabel> systems;
  std::vector<RoleAssignment> roles;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = child(where, i);
    const std::string name = text(field(j[i], "name", w), child(w, "name"));
    const double dim = number(field(j[i], "dim", w), child(w, "dim"));
    if (dim < 1 || dim != std::floor(dim)) throw InputError(child(w, "dim"), "dimension must be a positive integer");
    systems.push_back({name, static_cast<int>(dim)});
    roles.push_back(role_from_string(text(field(j[i], "role", w), child(w, "role")), child(w, "role")));
  }
  try {
    return {make_registry(std::move(systems)), std::move(roles)};
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
}

Json process_to_json(const ProcessMatrix& w) {
  return Json{{"registry", layout_to_json(w.layout())}, {"operator", operator_to_json(w.op())}};
}

ProcessMatrix process_from_json(const Json& j) {
  const Json& doc = j.is_object() && j.contains("process") ? j["process"] : j;
  const std::string root = &doc == &j ? "" : "/process";
  ProcessLayout layout = layout_from_json(field(doc, "registry", root), root + "/registry");
  LabeledOperator op = operator_from_json(field(doc, "operator", root), layout.registry(), root + "/operator");
  try {
    return {layout, op};
  } catch (const std::exception& e) {
    throw InputError(root + "/operator", e.what());
  }
}

Json decomposition_to_json(const ProcessLayout& L, const Decomposition& d) {
  Json wit = Json::array();
  if (const auto* q = std::get_if<QcQcDecomposition>(&d)) {
    for (const auto& [key, x] : q->witnesses)
      wit.push_back(Json{{"index", Json{{"done", mask_names(L, key.done)}, {"next", L.slots()[key.next].name}}},
                         {"name", key_name(L, key)},
                         {"operator", operator_to_json(x)}});
    return Json{{"kind", "qcqc"}, {"witnesses", std::move(wit)}};
  }
  const auto& c = std::get<QcCcDecomposition>(d);
  for (const auto& [s, x] : c.order_witnesses)
    wit.push_back(Json{{"index", Json{{"sequence", sequence_names(L, s)}, {"terminal", false}}},
                       {"name", sequence_name(L, s)},
                       {"operator", operator_to_json(x)}});
  for (const auto& [s, x] : c.terminal_witnesses)
    wit.push_back(Json{{"index", Json{{"sequence", sequence_names(L, s)}, {"terminal", true}}},
                       {"name", sequence_name(L, s, true)},
                       {"operator", operator_to_json(x)}});
  return Json{{"kind", "qccc"}, {"witnesses", std::move(wit)}};
}

Decomposition decomposition_from_json(const Json& j, const ProcessLayout& L) {
  const Json& doc = j.is_object() && j.contains("decomposition") ? j["decomposition"] : j;
  const std::string root = &doc == &j ? "" : "/decomposition";
  const std::string kind = text(field(doc, "kind", root), root + "/kind");
  const Json& wit = field(doc, "witnesses", root);
  if (!wit.is_array()) throw InputError(root + "/witnesses", "expected an array");
  if (kind == "qcqc") {
    QcQcDecomposition d;
    for (std::size_t i = 0; i < wit.size(); ++i) {
      const std::string w = child(root + "/witnesses", i);
      const Json& idx = field(wit[i], "index", w);
      QcQcKey key;
      const Json& done = field(idx, "done", child(w, "index"));
      if (!done.is_array()) throw InputError(child(w, "index/done"), "expected an array of slot names");
      for (std::size_t k = 0; k < done.size(); ++k)
        key.done |= SlotMask{1} << slot_from_json(done[k], L, child(child(w, "index/done"), k));
      key.next = slot_from_json(field(idx, "next", child(w, "index")), L, child(w, "index/next"));
      if (d.witnesses.count(key)) throw InputError(w, "duplicate witness index");
      d.witnesses.emplace(key, operator_from_json(field(wit[i], "operator", w), L.registry(), child(w, "operator")));
    }
    return d;
  }
  if (kind == "qccc") {
    QcCcDecomposition d;
    for (std::size_t i = 0; i < wit.size(); ++i) {
      const std::string w = child(root + "/witnesses", i);
      const Json& idx = field(wit[i], "index", w);
      const Json& seq = field(idx, "sequence", child(w, "index"));
      if (!seq.is_array()) throw InputError(child(w, "index/sequence"), "expected an array of slot names");
      Sequence s;
      for (std::size_t k = 0; k < seq.size(); ++k) s.push_back(slot_from_json(seq[k], L, child(child(w, "index/sequence"), k)));
      const Json& term = field(idx, "terminal", child(w, "index"));
      if (!term.is_boolean()) throw InputError(child(w, "index/terminal"), "expected a boolean");
      auto& target = term.get<bool>() ? d.terminal_witnesses : d.order_witnesses;
      if (target.count(s)) throw InputError(w, "duplicate witness index");
      target.emplace(s, operator_from_json(field(wit[i], "operator", w), L.registry(), child(w, "operator")));
    }
    return d;
  }
  throw InputError(root + "/kind", "kind must be \"qcqc\" or \"qccc\"");
}

Json bundle_to_json(const ProcessMatrix& w, const Decomposition& d) {
  return Json{{"process", process_to_json(w)}, {"decomposition", decomposition_to_json(w.layout(), d)}};
}

Json pattern_to_json(const SlotPattern& p) {
  Json out = Json::object();
  for (const auto& [name, a] : p) {
    switch (a.kind) {
      case SlotAction::Kind::Keep: out[name] = "keep"; break;
      case SlotAction::Kind::TraceOut: out[name] = "trace_out"; break;
      case SlotAction::Kind::Dephase: out[name] = Json{{"dephase", a.basis == BasisType::Z ? "Z" : "X"}}; break;
      case SlotAction::Kind::Inject: {
        Json v = Json::array();
        for (Eigen::Index i = 0; i < a.state.size(); ++i) v.push_back(complex_json(a.state[i]));
        out[name] = Json{{"inject", std::move(v)}};
        break;
      }
    }
  }
  return out;
}

SlotPattern pattern_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("", "pattern must be an object mapping subsystem names to actions");
  SlotPattern p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string w = "/" + it.key();
    const Json& a = it.value();
    if (a.is_string()) {
      const std::string s = a.get<std::string>();
      if (s == "keep") p[it.key()] = SlotAction::keep();
      else if (s == "trace_out") p[it.key()] = SlotAction::trace_out();
      else throw InputError(w, "unknown action \"" + s + "\"");
      continue;
    }
    if (a.is_object() && a.size() == 1 && a.contains("dephase")) {
      const std::string b = text(a["dephase"], w + "/dephase");
      if (b != "Z" && b != "X") throw InputError(w + "/dephase", "basis must be \"Z\" or \"X\"");
      p[it.key()] = SlotAction::dephase(b == "Z" ? BasisType::Z : BasisType::X);
      continue;
    }
    if (a.is_object() && a.size() == 1 && a.contains("inject")) {
      const Json& v = a["inject"];
      if (!v.is_array() || v.empty()) throw InputError(w + "/inject", "expected a non-empty state vector");
      Eigen::VectorXcd psi(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) psi[static_cast<Eigen::Index>(i)] = complex_entry(v[i], child(w + "/inject", i));
      p[it.key()] = SlotAction::inject(std::move(psi));
      continue;
    }
    throw InputError(w, "action must be \"keep\", \"trace_out\", {\"dephase\": ...} or {\"inject\": [...]}");
  }
  return p;
}

Json report_to_json(const ValidityReport& r) {
  Json res = Json::object(), psd = Json::object();
  for (const auto& [k, v] : r.residuals) res[k] = v;
  for (const auto& [k, v] : r.psd) psd[k] = v;
  return Json{{"verdict", r.verdict},
              {"max_residual", r.max_residual()},
              {"psd_min_eig", r.psd_min_eig},
              {"normalization_gap", r.normalization_gap},
              {"residuals", std::move(res)},
              {"psd", std::move(psd)}};
}

Json verdict_to_json(const ProcessLayout& layout, const ConstraintSystem& sys, const Verdict& v) {
  Json out{{"status", to_string(v.status)},
           {"margin", finite_or_null(v.margin)},
           {"margin_kind", v.status == VerdictStatus::Undetermined ? "none"
                           : std::isfinite(v.margin)                ? "finite"
                                                                    : "unbounded"},
           {"iterations", v.iterations},
           {"runtime_s", v.runtime_s},
           {"note", v.note}};
  if (v.certificate) {
    const auto& c = *v.certificate;
    Json mult = Json::array();
    for (std::size_t e = 0; e < c.multipliers.size() && e < sys.equalities.size(); ++e)
      mult.push_back(Json{{"equality", sys.equalities[e].name}, {"matrix", matrix_to_json(c.multipliers[e])}});
    out["certificate"] = Json{{"kind", c.kind == CertificateKind::Dual ? "dual" : "farkas"},
                              {"bound", finite_or_null(c.bound)},
                              {"residual", c.residual},
                              {"repaired", c.repaired},
                              {"multipliers", std::move(mult)}};
  } else {
    out["certificate"] = nullptr;
  }
  if (v.qcqc_point) out["point"] = decomposition_to_json(layout, *v.qcqc_point);
  else if (v.qccc_point) out["point"] = decomposition_to_json(layout, *v.qccc_point);
  else out["point"] = nullptr;
  return out;
}

Json system_to_json(const ConstraintSystem& sys, const ProcessLayout& layout) {
  const auto& reg = *sys.registry;
  Json blocks = Json::array();
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto& blk = sys.blocks[b];
    Json index;
    if (sys.kind == SystemKind::QcQc)
      index = Json{{"done", mask_names(layout, sys.qcqc_index[b].done)}, {"next", layout.slots()[sys.qcqc_index[b].next].name}};
    else
      index = Json{{"sequence", sequence_names(layout, sys.qccc_index[b])}, {"terminal", static_cast<bool>(sys.qccc_terminal[b])}};
    blocks.push_back(Json{{"name", blk.name},
                          {"index", std::move(index)},
                          {"subsystems", names_json(reg, blk.subsystems)},
                          {"full_side", blk.full_side(reg)},
                          {"side", blk.side(reg)},
                          {"face", blk.face ? matrix_to_json(*blk.face) : Json(nullptr)}});
  }
  Json eqs = Json::array();
  for (const auto& e : sys.equalities) {
    Json terms = Json::array();
    for (const auto& t : e.terms)
      terms.push_back(Json{{"block", t.block},
                           {"coeff", t.coeff},
                           {"trace_over", names_json(reg, t.trace_over)},
                           {"pad", names_json(reg, t.pad)}});
    eqs.push_back(Json{{"name", e.name},
                       {"space", names_json(reg, e.space)},
                       {"terms", std::move(terms)},
                       {"rhs", operator_to_json(e.rhs)},
                       {"range", e.range ? matrix_to_json(*e.range) : Json(nullptr)}});
  }
  return Json{{"kind", sys.kind == SystemKind::QcQc ? "qcqc" : "qccc"},
              {"registry", layout_to_json(layout)},
              {"constraint", "X_b + s 1 ⪰ 0 on every block, Σ terms = rhs for every equality; feasible iff min s ≤ 0"},
              {"blocks", std::move(blocks)},
              {"equalities", std::move(eqs)}};
}

}  // namespace procmat
