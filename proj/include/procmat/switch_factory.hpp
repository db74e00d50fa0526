#pragma once

#include <map>
#include <string>

#include "procmat/circuit_classes.hpp"

namespace procmat {

/// Registry P_c, P_t, A_I, A_O, B_I, B_O, F_t, F_c (all qubits), slots "A" and "B".
ProcessMatrix build_quantum_switch();

/// Coherent decomposition of the switch: W_(A,B), W_(B,A) are the projectors on
/// the two control branches, W_(A), W_(B) those on the first-slot wirings.
QcQcDecomposition switch_decomposition();

/// Closed forms of the three partially dephased switches (n = 1, 2, 3).
ProcessMatrix build_example(int n);

enum class BasisType { Z, X };

struct SlotAction {
  enum class Kind { Keep, Dephase, TraceOut, Inject };
  Kind kind = Kind::Keep;
  BasisType basis = BasisType::Z;
  Eigen::VectorXcd state;

  static SlotAction keep() { return {}; }
  static SlotAction dephase(BasisType b) { return {Kind::Dephase, b, {}}; }
  static SlotAction trace_out() { return {Kind::TraceOut, BasisType::Z, {}}; }
  static SlotAction inject(Eigen::VectorXcd psi) { return {Kind::Inject, BasisType::Z, std::move(psi)}; }
};

/// Action per subsystem name; subsystems not listed are kept.
using SlotPattern = std::map<std::string, SlotAction>;

/// Z-type: computational basis. X-type: Fourier basis (|±> for qubits).
DephasingBasis basis_of(const RegistryPtr& registry, std::size_t system, BasisType type);

/// Injects states into past systems, traces out future systems, then dephases.
/// A dimension-1 "P" ("F") placeholder is added when no past (future) remains.
/// Throws std::invalid_argument for unknown systems, role violations and
/// malformed states.
ProcessMatrix apply_pattern(const ProcessMatrix& w, const SlotPattern& pattern);

/// Pipelines producing the three examples from the switch.
SlotPattern example_pattern(int n);

/// Z-dephasing of every past, input and output system.
SlotPattern dephase_all_pattern(const ProcessLayout& layout);

/// Dephases the single system left coherent in example n (P_c in X, A_I in Z, A_O in Z).
SlotPattern flip_pattern(int n);

}  // namespace procmat
