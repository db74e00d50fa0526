#include "procmat/process.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace procmat {

ProcessLayout::ProcessLayout(RegistryPtr registry, std::vector<RoleAssignment> roles)
    : registry_(std::move(registry)), roles_(std::move(roles)) {
  if (!registry_) throw std::invalid_argument("layout needs a registry");
  if (roles_.size() != registry_->size())
    throw std::invalid_argument("layout: " + std::to_string(roles_.size()) + " roles for " +
                                std::to_string(registry_->size()) + " subsystems");
  std::vector<std::string> order;
  std::map<std::string, std::pair<long, long>> io;  // slot -> (input, output), -1 = missing
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    const auto& r = roles_[i];
    switch (r.role) {
      case Role::Past: past_.push_back(i); break;
      case Role::Future: future_.push_back(i); break;
      case Role::Input:
      case Role::Output: {
        if (r.slot.empty()) throw std::invalid_argument("subsystem '" + (*registry_)[i].name + "' has no slot name");
        auto [it, fresh] = io.try_emplace(r.slot, -1, -1);
        if (fresh) order.push_back(r.slot);
        long& where = r.role == Role::Input ? it->second.first : it->second.second;
        if (where >= 0)
          throw std::invalid_argument("slot '" + r.slot + "' has more than one " +
                                      (r.role == Role::Input ? "input" : "output") + " subsystem");
        where = static_cast<long>(i);
        break;
      }
    }
  }
  if (past_.empty()) throw std::invalid_argument("layout has no past subsystem (use a dimension-1 placeholder)");
  if (future_.empty()) throw std::invalid_argument("layout has no future subsystem (use a dimension-1 placeholder)");
  if (order.size() > 16) throw std::invalid_argument("layout supports at most 16 slots");
  for (const auto& name : order) {
    auto [in, out] = io.at(name);
    if (in < 0) throw std::invalid_argument("slot '" + name + "' has no input subsystem");
    if (out < 0) throw std::invalid_argument("slot '" + name + "' has no output subsystem");
    slots_.push_back({name, static_cast<std::size_t>(in), static_cast<std::size_t>(out)});
  }
}

std::size_t ProcessLayout::slot_index(const std::string& name) const {
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (slots_[k].name == name) return k;
  throw std::out_of_range("unknown slot '" + name + "'");
}

SubsystemSet ProcessLayout::inputs(SlotMask mask) const {
  SubsystemSet out;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (mask >> k & 1u) out.push_back(slots_[k].input);
  return normalized(std::move(out));
}

SubsystemSet ProcessLayout::outputs(SlotMask mask) const {
  SubsystemSet out;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (mask >> k & 1u) out.push_back(slots_[k].output);
  return normalized(std::move(out));
}

SubsystemSet ProcessLayout::io(SlotMask mask) const { return set_union(inputs(mask), outputs(mask)); }

double ProcessLayout::normalization_target() const {
  return static_cast<double>(d_past()) * static_cast<double>(d_outputs(all_slots()));
}

std::string ProcessLayout::describe_mask(SlotMask mask) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t k = 0; k < slots_.size(); ++k)
    if (mask >> k & 1u) {
      if (!first) out += ",";
      out += slots_[k].name;
      first = false;
    }
  return out + "}";
}

bool ProcessLayout::operator==(const ProcessLayout& other) const {
  return same_registry(registry_, other.registry_) && roles_ == other.roles_;
}

ProcessMatrix::ProcessMatrix(ProcessLayout layout, LabeledOperator op) : layout_(std::move(layout)), op_(std::move(op)) {
  if (!same_registry(op_.registry(), layout_.registry()))
    throw std::invalid_argument("process operator and layout use different registries");
  if (op_.subsystems() != layout_.registry()->all())
    throw std::invalid_argument("process operator must act on every subsystem, got " + op_.describe_space());
  require_hermitian(op_, "process matrix");
}

double ValidityReport::max_residual() const {
  double worst = 0.0;
  for (const auto& [name, r] : residuals) worst = std::max(worst, r);
  return worst;
}

double scaled_min_eig(const LabeledOperator& w) {
  return min_eigenvalue(w.matrix()) / std::max(1.0, max_abs(w));
}

namespace {

LabeledOperator one_minus_each(LabeledOperator x, const SubsystemSet& systems) {
  for (auto s : systems) x = one_minus(x, {s});
  return x;
}

void finish_report(ValidityReport& rep, const ProcessMatrix& w, double tol) {
  const double target = w.layout().normalization_target();
  rep.normalization_gap = w.op().trace().real() - target;
  rep.psd_min_eig = scaled_min_eig(w.op());
  rep.psd["W"] = rep.psd_min_eig;
  rep.verdict = rep.max_residual() <= tol && std::abs(rep.normalization_gap) <= tol * std::max(1.0, target) &&
                rep.psd_min_eig >= -tol;
}

std::string subset_name(const ProcessLayout& layout, SlotMask mask) { return "K=" + layout.describe_mask(mask); }

}  // namespace

ValidityReport check_validity_generic(const ProcessMatrix& w, double tol) {
  const auto& L = w.layout();
  ValidityReport rep;
  auto trF = partial_trace(w.op(), L.future());
  for (SlotMask mask = 1; mask <= L.all_slots(); ++mask) {
    auto reduced = partial_trace(trF, L.io(L.all_slots() & ~mask));
    rep.residuals[subset_name(L, mask)] = max_abs(one_minus_each(reduced, L.outputs(mask)));
  }
  auto marginal = partial_trace(trF, L.io(L.all_slots()));
  rep.residuals["past"] = max_abs(one_minus_each(marginal, L.past()));
  finish_report(rep, w, tol);
  return rep;
}

ValidityReport check_validity(const ProcessMatrix& w, double tol) {
  const auto& L = w.layout();
  if (L.n_slots() != 2) return check_validity_generic(w, tol);
  ValidityReport rep;
  const SubsystemSet AO = L.output(0), BO = L.output(1);
  auto trF = partial_trace(w.op(), L.future());
  rep.residuals[subset_name(L, 0b11)] = max_abs(one_minus(one_minus(trF, AO), BO));
  rep.residuals[subset_name(L, 0b01)] = max_abs(one_minus(partial_trace(trF, L.io(0b10)), AO));
  rep.residuals[subset_name(L, 0b10)] = max_abs(one_minus(partial_trace(trF, L.io(0b01)), BO));
  rep.residuals["past"] = max_abs(one_minus_each(partial_trace(trF, L.io(0b11)), L.past()));
  finish_report(rep, w, tol);
  return rep;
}

LabeledOperator contract(const ProcessMatrix& w, const std::vector<LabeledOperator>& slot_chois) {
  const auto& L = w.layout();
  if (slot_chois.size() != L.n_slots())
    throw std::invalid_argument("contract: expected " + std::to_string(L.n_slots()) + " slot operators, got " +
                                std::to_string(slot_chois.size()));
  std::optional<LabeledOperator> prod;
  for (std::size_t k = 0; k < slot_chois.size(); ++k) {
    const auto& a = slot_chois[k];
    if (!same_registry(a.registry(), w.registry()))
      throw std::invalid_argument("contract: slot operator uses a different registry");
    if (a.subsystems() != L.io(SlotMask{1} << k))
      throw std::invalid_argument("contract: slot '" + L.slots()[k].name + "' operator must act on " +
                                  w.registry()->describe(L.io(SlotMask{1} << k)) + ", got " + a.describe_space());
    prod = prod ? tensor(*prod, transpose(a)) : transpose(a);
  }
  const SubsystemSet all_io = L.io(L.all_slots());
  LabeledOperator full = prod ? extend(*prod, set_difference(w.registry()->all(), all_io))
                              : LabeledOperator::identity(w.registry(), w.registry()->all());
  return partial_trace(product(full, w.op()), all_io);
}

ProcessMatrix white_noise_process(const ProcessLayout& layout) {
  const auto& reg = layout.registry();
  const double scale = 1.0 / (static_cast<double>(layout.d_future()) *
                              static_cast<double>(layout.d_inputs(layout.all_slots())));
  auto op = LabeledOperator::identity(reg, reg->all());
  op *= cplx(scale, 0.0);
  return {layout, std::move(op)};
}

LabeledOperator project_validity_subspace(const ProcessLayout& layout, const LabeledOperator& x) {
  // Each constraint is a projector Q built from commuting trace-and-replace maps;
  // the admissible directions form the common kernel, reached by x <- x - Q(x).
  auto apply_q = [&](const LabeledOperator& y, const SubsystemSet& replaced, const SubsystemSet& complemented) {
    LabeledOperator z = trace_and_replace(y, replaced);
    for (auto s : complemented) z = one_minus(z, {s});
    return z;
  };
  LabeledOperator out = x;
  const SlotMask all = layout.all_slots();
  for (SlotMask mask = 1; mask <= all; ++mask)
    out -= apply_q(out, set_union(layout.io(all & ~mask), layout.future()), layout.outputs(mask));
  out -= apply_q(out, set_union(layout.io(all), layout.future()), layout.past());
  out -= trace_and_replace(out, layout.registry()->all());
  return out;
}

LabeledOperator random_hermitian(const RegistryPtr& registry, const SubsystemSet& on, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const long d = registry->dimension(on);
  Eigen::MatrixXcd m(d, d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < d; ++i) m(i, j) = cplx(g(rng), g(rng));
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  return {registry, on, std::move(h)};
}

ProcessMatrix random_valid_process(const ProcessLayout& layout, const SubsystemSet& dephased, std::uint64_t seed) {
  const auto& reg = layout.registry();
  ProcessMatrix noise = white_noise_process(layout);
  const double w0 = noise.op().matrix()(0, 0).real();
  constexpr double margin = 1e-6;

  LabeledOperator h = random_hermitian(reg, reg->all(), seed);
  for (auto s : dephased) h = dephase(h, DephasingBasis::computational(reg, s));
  LabeledOperator x = hermitian_part(project_validity_subspace(layout, h));
  for (auto s : dephased) x = dephase(x, DephasingBasis::computational(reg, s));

  const double lmin = min_eigenvalue(x.matrix());
  double t = 1.0;
  if (lmin < 0.0) t = std::min(1.0, (w0 - margin) / -lmin);
  LabeledOperator op = noise.op() + x * cplx(t, 0.0);
  return {layout, hermitian_part(op)};
}

}  // namespace procmat
