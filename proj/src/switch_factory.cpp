#include "procmat/switch_factory.hpp"

#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace procmat {

namespace {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;

ProcessLayout switch_layout() {
  auto reg = make_registry({{"P_c", 2}, {"P_t", 2}, {"A_I", 2}, {"A_O", 2}, {"B_I", 2}, {"B_O", 2}, {"F_t", 2}, {"F_c", 2}});
  return {reg,
          {{Role::Past, ""}, {Role::Past, ""}, {Role::Input, "A"}, {Role::Output, "A"}, {Role::Input, "B"},
           {Role::Output, "B"}, {Role::Future, ""}, {Role::Future, ""}}};
}

// Flat index of a computational basis state on the given systems.
Eigen::Index flat_index(const SpaceRegistry& reg, const SubsystemSet& on, const std::map<std::string, int>& bits) {
  Eigen::Index idx = 0;
  for (auto s : on) idx = idx * reg[s].dim + bits.at(reg[s].name);
  return idx;
}

MatrixXcd kron(std::initializer_list<Matrix2cd> factors) {
  MatrixXcd out = MatrixXcd::Ones(1, 1);
  for (const auto& f : factors) {
    MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
    out = std::move(next);
  }
  return out;
}

Matrix2cd mat2(double a, double b, double c, double d) {
  Matrix2cd m;
  m << a, b, c, d;
  return m;
}

const Matrix2cd kP0 = mat2(1, 0, 0, 0);
const Matrix2cd kP1 = mat2(0, 0, 0, 1);
const Matrix2cd kId = mat2(1, 0, 0, 1);
const Matrix2cd kX = mat2(0, 1, 1, 0);
const Matrix2cd kZ = mat2(1, 0, 0, -1);
const Matrix2cd kPlus = mat2(0.5, 0.5, 0.5, 0.5);

ProcessMatrix on_layout(std::vector<SystemLabel> systems, std::vector<RoleAssignment> roles, MatrixXcd m) {
  auto reg = make_registry(std::move(systems));
  ProcessLayout layout(reg, std::move(roles));
  return {layout, LabeledOperator(reg, reg->all(), std::move(m))};
}

Eigen::VectorXcd plus_state() { return Eigen::Vector2cd(M_SQRT1_2, M_SQRT1_2); }
Eigen::VectorXcd zero_state() { return Eigen::Vector2cd(1.0, 0.0); }

}  // namespace

ProcessMatrix build_quantum_switch() {
  ProcessLayout layout = switch_layout();
  const auto& reg = *layout.registry();
  const SubsystemSet all = reg.all();
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(reg.dimension(all));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        w[flat_index(reg, all, {{"P_c", 0}, {"P_t", i}, {"A_I", i}, {"A_O", j}, {"B_I", j}, {"B_O", k}, {"F_t", k}, {"F_c", 0}})] += 1.0;
        w[flat_index(reg, all, {{"P_c", 1}, {"P_t", i}, {"B_I", i}, {"B_O", j}, {"A_I", j}, {"A_O", k}, {"F_t", k}, {"F_c", 1}})] += 1.0;
      }
  return {layout, LabeledOperator::projector(layout.registry(), all, w)};
}

QcQcDecomposition switch_decomposition() {
  ProcessLayout layout = switch_layout();
  const auto& regp = layout.registry();
  const auto& reg = *regp;
  auto branch = [&](const QcQcKey& key, int control, const char* first_in, const char* first_out, const char* second_in) {
    const SubsystemSet on = qcqc_support(layout, key);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(reg.dimension(on));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        std::map<std::string, int> bits{{"P_c", control}, {"P_t", i}, {first_in, i}};
        if (second_in) {
          bits[first_out] = j;
          bits[second_in] = j;
        } else if (j == 1) {
          continue;
        }
        v[flat_index(reg, on, bits)] += 1.0;
      }
    return LabeledOperator::projector(regp, on, v);
  };
  QcQcDecomposition d;
  d.witnesses.emplace(QcQcKey{0b01, 1}, branch({0b01, 1}, 0, "A_I", "A_O", "B_I"));
  d.witnesses.emplace(QcQcKey{0b10, 0}, branch({0b10, 0}, 1, "B_I", "B_O", "A_I"));
  d.witnesses.emplace(QcQcKey{0b00, 0}, branch({0b00, 0}, 0, "A_I", nullptr, nullptr));
  d.witnesses.emplace(QcQcKey{0b00, 1}, branch({0b00, 1}, 1, "B_I", nullptr, nullptr));
  return d;
}

ProcessMatrix build_example(int n) {
  const Matrix2cd proj[2] = {kP0, kP1};
  const RoleAssignment P{Role::Past, ""}, F{Role::Future, ""}, AI{Role::Input, "A"}, AO{Role::Output, "A"},
      BI{Role::Input, "B"}, BO{Role::Output, "B"};
  switch (n) {
    case 1: {
      // P_c A_I A_O B_I B_O F_c
      MatrixXcd t = kron({kX, kP0, kP0, kP0, kP0, 0.5 * kX});
      for (int i = 0; i < 2; ++i)
        t += kron({kP0, kP0, proj[i], proj[i], kId, 0.5 * kId}) + kron({kP1, proj[i], kId, kP0, proj[i], 0.5 * kId});
      return on_layout({{"P_c", 2}, {"A_I", 2}, {"A_O", 2}, {"B_I", 2}, {"B_O", 2}, {"F_c", 2}}, {P, AI, AO, BI, BO, F}, t);
    }
    case 2: {
      // P A_I A_O B_I B_O F_c
      MatrixXcd t = MatrixXcd::Zero(32, 32);
      for (int i = 0; i < 2; ++i)
        t += kron({kPlus, proj[i], proj[i], kId, 0.5 * kId}) + kron({proj[i], kId, 0.5 * kId, proj[i], 0.5 * kId}) +
             kron({proj[i] + 0.5 * kX, proj[i], proj[i], proj[i], 0.5 * kX});
      return on_layout({{"P", 1}, {"A_I", 2}, {"A_O", 2}, {"B_I", 2}, {"B_O", 2}, {"F_c", 2}}, {P, AI, AO, BI, BO, F},
                       0.5 * t);
    }
    case 3: {
      // P A_I A_O B_I B_O F_t F_c
      MatrixXcd t = MatrixXcd::Zero(64, 64);
      for (int i = 0; i < 2; ++i)
        t += kron({kP0, proj[i], proj[i], kId, 0.5 * kId, 0.5 * kId}) +
             0.5 * (kron({proj[i], kId, kP0, proj[i], kId, 0.5 * kId}) + kron({proj[i], kX, kP0, proj[i], kX, 0.5 * kId}));
      t *= 0.5;
      t += 0.25 * (kron({kP0, kId, kP0, kP0, kId, 0.5 * kX}) + kron({kP0, kZ, kP0, kP0, kId, 0.5 * kX}) +
                   kron({kP0, kX, kP0, kP0, kX, 0.5 * kX}));
      return on_layout({{"P", 1}, {"A_I", 2}, {"A_O", 2}, {"B_I", 2}, {"B_O", 2}, {"F_t", 2}, {"F_c", 2}},
                       {P, AI, AO, BI, BO, F, F}, t);
    }
    default: throw std::invalid_argument("build_example: n must be 1, 2 or 3");
  }
}

DephasingBasis basis_of(const RegistryPtr& registry, std::size_t system, BasisType type) {
  return type == BasisType::Z ? DephasingBasis::computational(registry, system)
                              : DephasingBasis::fourier(registry, system);
}

ProcessMatrix apply_pattern(const ProcessMatrix& w, const SlotPattern& pattern) {
  const auto& L = w.layout();
  const auto& reg = w.registry();
  for (const auto& [name, act] : pattern) {
    const auto idx = reg->find(name);
    if (!idx) throw std::invalid_argument("pattern refers to unknown system '" + name + "'");
    const Role role = L.roles()[*idx].role;
    if (act.kind == SlotAction::Kind::Inject) {
      if (role != Role::Past) throw std::invalid_argument("inject is only allowed on past systems, not on '" + name + "'");
      if (act.state.size() != (*reg)[*idx].dim)
        throw std::invalid_argument("state injected into '" + name + "' has dimension " +
                                    std::to_string(act.state.size()) + ", expected " + std::to_string((*reg)[*idx].dim));
      if (std::abs(act.state.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("state injected into '" + name + "' is not normalized");
    }
    if (act.kind == SlotAction::Kind::TraceOut && role != Role::Future)
      throw std::invalid_argument("trace_out is only allowed on future systems, not on '" + name + "'");
  }

  LabeledOperator op = w.op();
  for (const auto& [name, act] : pattern)
    if (act.kind == SlotAction::Kind::Inject) op = sandwich(op, reg->index_of(name), act.state);
  SubsystemSet traced;
  for (const auto& [name, act] : pattern)
    if (act.kind == SlotAction::Kind::TraceOut) traced.push_back(reg->index_of(name));
  if (!traced.empty()) op = partial_trace(op, normalized(traced));
  std::vector<DephasingBasis> bases;
  for (const auto& [name, act] : pattern)
    if (act.kind == SlotAction::Kind::Dephase) bases.push_back(basis_of(reg, reg->index_of(name), act.basis));
  if (!bases.empty()) op = dephase(op, bases);

  // Reduced registry, with placeholders for an emptied past or future.
  std::vector<SystemLabel> systems;
  std::vector<RoleAssignment> roles;
  bool has_past = false, has_future = false;
  for (auto s : op.subsystems()) {
    has_past |= L.roles()[s].role == Role::Past;
    has_future |= L.roles()[s].role == Role::Future;
  }
  if (!has_past) {
    systems.push_back({"P", 1});
    roles.push_back({Role::Past, ""});
  }
  for (auto s : op.subsystems()) {
    systems.push_back((*reg)[s]);
    roles.push_back(L.roles()[s]);
  }
  if (!has_future) {
    systems.push_back({"F", 1});
    roles.push_back({Role::Future, ""});
  }
  auto out_reg = make_registry(std::move(systems));
  ProcessLayout out_layout(out_reg, std::move(roles));
  return {out_layout, LabeledOperator(out_reg, out_reg->all(), op.matrix())};
}

SlotPattern example_pattern(int n) {
  using A = SlotAction;
  switch (n) {
    case 1:
      return {{"P_t", A::inject(zero_state())}, {"F_t", A::trace_out()},          {"A_I", A::dephase(BasisType::Z)},
              {"A_O", A::dephase(BasisType::Z)}, {"B_I", A::dephase(BasisType::Z)}, {"B_O", A::dephase(BasisType::Z)},
              {"F_c", A::dephase(BasisType::X)}};
    case 2:
      return {{"P_c", A::inject(plus_state())},  {"P_t", A::inject(plus_state())},  {"F_t", A::trace_out()},
              {"A_O", A::dephase(BasisType::Z)}, {"B_I", A::dephase(BasisType::Z)}, {"B_O", A::dephase(BasisType::Z)},
              {"F_c", A::dephase(BasisType::X)}};
    case 3:
      return {{"P_c", A::inject(plus_state())},  {"P_t", A::inject(zero_state())},  {"A_I", A::dephase(BasisType::Z)},
              {"B_I", A::dephase(BasisType::Z)}, {"B_O", A::dephase(BasisType::Z)}, {"F_c", A::dephase(BasisType::X)},
              {"F_t", A::dephase(BasisType::X)}};
    default: throw std::invalid_argument("example_pattern: n must be 1, 2 or 3");
  }
}

SlotPattern dephase_all_pattern(const ProcessLayout& layout) {
  SlotPattern p;
  const auto& reg = *layout.registry();
  for (std::size_t s = 0; s < reg.size(); ++s)
    if (layout.roles()[s].role != Role::Future && reg[s].dim > 1) p[reg[s].name] = SlotAction::dephase(BasisType::Z);
  return p;
}

SlotPattern flip_pattern(int n) {
  switch (n) {
    case 1: return {{"P_c", SlotAction::dephase(BasisType::X)}};
    case 2: return {{"A_I", SlotAction::dephase(BasisType::Z)}};
    case 3: return {{"A_O", SlotAction::dephase(BasisType::Z)}};
    default: throw std::invalid_argument("flip_pattern: n must be 1, 2 or 3");
  }
}

}  // namespace procmat
