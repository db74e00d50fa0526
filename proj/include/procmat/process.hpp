#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "procmat/labeled_operator.hpp"

namespace procmat {

enum class Role { Past, Future, Input, Output };

/// Role of one registry subsystem; `slot` names the party for Input/Output.
struct RoleAssignment {
  Role role = Role::Past;
  std::string slot;

  bool operator==(const RoleAssignment&) const = default;
};

struct Slot {
  std::string name;
  std::size_t input = 0;
  std::size_t output = 0;
};

/// Bitmask over slot indices (bit k set = slot k belongs to the subset).
using SlotMask = std::uint32_t;

/// Role assignment for a whole registry: global past P, global future F and
/// N slots with one input and one output system each. P and F may be made of
/// several subsystems (e.g. a control and a target qubit); a process without a
/// past or future carries a dimension-1 placeholder instead.
class ProcessLayout {
 public:
  ProcessLayout(RegistryPtr registry, std::vector<RoleAssignment> roles);

  const RegistryPtr& registry() const { return registry_; }
  const std::vector<RoleAssignment>& roles() const { return roles_; }
  const SubsystemSet& past() const { return past_; }
  const SubsystemSet& future() const { return future_; }
  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t n_slots() const { return slots_.size(); }
  SlotMask all_slots() const { return (SlotMask{1} << slots_.size()) - 1; }

  /// Throws std::out_of_range for unknown slot names.
  std::size_t slot_index(const std::string& name) const;

  SubsystemSet inputs(SlotMask mask) const;
  SubsystemSet outputs(SlotMask mask) const;
  /// Inputs and outputs of every slot in mask.
  SubsystemSet io(SlotMask mask) const;
  SubsystemSet input(std::size_t k) const { return {slots_.at(k).input}; }
  SubsystemSet output(std::size_t k) const { return {slots_.at(k).output}; }

  long d_past() const { return registry_->dimension(past_); }
  long d_future() const { return registry_->dimension(future_); }
  long d_outputs(SlotMask mask) const { return registry_->dimension(outputs(mask)); }
  long d_inputs(SlotMask mask) const { return registry_->dimension(inputs(mask)); }
  /// Tr W required by normalization: d_P times the product of output dimensions.
  double normalization_target() const;

  std::string describe_mask(SlotMask mask) const;

  bool operator==(const ProcessLayout& other) const;

 private:
  RegistryPtr registry_;
  std::vector<RoleAssignment> roles_;
  SubsystemSet past_, future_;
  std::vector<Slot> slots_;
};

/// Hermitian operator on the whole registry of a layout.
class ProcessMatrix {
 public:
  ProcessMatrix(ProcessLayout layout, LabeledOperator op);

  const ProcessLayout& layout() const { return layout_; }
  const LabeledOperator& op() const { return op_; }
  const RegistryPtr& registry() const { return layout_.registry(); }
  std::size_t n_slots() const { return layout_.n_slots(); }

  /// Same layout, different operator.
  ProcessMatrix with_operator(LabeledOperator op) const { return {layout_, std::move(op)}; }

 private:
  ProcessLayout layout_;
  LabeledOperator op_;
};

/// Outcome of a validity or decomposition check. Residuals are max-abs norms
/// of the violation of each equality; psd lists λ_min/max(1, ‖X‖) per operator.
struct ValidityReport {
  std::map<std::string, double> residuals;
  std::map<std::string, double> psd;
  double normalization_gap = 0.0;
  double psd_min_eig = 0.0;
  bool verdict = false;

  double max_residual() const;
};

/// Scaled λ_min used in reports: λ_min / max(1, max_abs).
double scaled_min_eig(const LabeledOperator& w);

/// Validity constraints, normalization and positivity. N = 2 uses the
/// bipartite constraint set, any other N the subset family.
ValidityReport check_validity(const ProcessMatrix& w, double tol = 1e-9);
/// Always evaluates the subset family (used to cross-check the bipartite path).
ValidityReport check_validity_generic(const ProcessMatrix& w, double tol = 1e-9);

/// Choi of the induced map P -> F given one Choi operator per slot (on A_I^k A_O^k).
LabeledOperator contract(const ProcessMatrix& w, const std::vector<LabeledOperator>& slot_chois);

/// 1 / (d_F · Π d_{A_I^k}).
ProcessMatrix white_noise_process(const ProcessLayout& layout);

/// Seeded random valid process, exactly diagonal (computational basis) on every
/// subsystem in `dephased`, with λ_min ≥ 1e-6.
ProcessMatrix random_valid_process(const ProcessLayout& layout, const SubsystemSet& dephased, std::uint64_t seed);

/// Orthogonal projector onto the linear span of differences of valid processes.
LabeledOperator project_validity_subspace(const ProcessLayout& layout, const LabeledOperator& x);

/// Seeded Hermitian with i.i.d. Gaussian entries (GUE normalization).
LabeledOperator random_hermitian(const RegistryPtr& registry, const SubsystemSet& on, std::uint64_t seed);

}  // namespace procmat
