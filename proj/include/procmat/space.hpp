#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace procmat {

/// A named finite-dimensional subsystem.
struct SystemLabel {
  std::string name;
  int dim = 1;

  bool operator==(const SystemLabel&) const = default;
};

/// Sorted, duplicate-free list of registry indices. The registry order is the
/// canonical tensor-factor order of every operator built on it.
using SubsystemSet = std::vector<std::size_t>;

/// Ordered collection of subsystems. Every LabeledOperator refers to one.
class SpaceRegistry {
 public:
  explicit SpaceRegistry(std::vector<SystemLabel> systems);

  std::size_t size() const { return systems_.size(); }
  const SystemLabel& operator[](std::size_t i) const { return systems_.at(i); }
  const std::vector<SystemLabel>& systems() const { return systems_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws std::out_of_range for unknown names.
  std::size_t index_of(std::string_view name) const;
  SubsystemSet subsystems(const std::vector<std::string>& names) const;
  SubsystemSet all() const;

  /// Product of the dimensions of `set` (1 for the empty set).
  long dimension(const SubsystemSet& set) const;
  std::vector<std::string> names(const SubsystemSet& set) const;
  std::string describe(const SubsystemSet& set) const;

  bool operator==(const SpaceRegistry&) const = default;

 private:
  std::vector<SystemLabel> systems_;
};

using RegistryPtr = std::shared_ptr<const SpaceRegistry>;

RegistryPtr make_registry(std::vector<SystemLabel> systems);

/// Registries are interchangeable when they list the same systems in the same order.
bool same_registry(const RegistryPtr& a, const RegistryPtr& b);

SubsystemSet normalized(SubsystemSet set);
SubsystemSet set_union(const SubsystemSet& a, const SubsystemSet& b);
SubsystemSet set_difference(const SubsystemSet& a, const SubsystemSet& b);
SubsystemSet set_intersection(const SubsystemSet& a, const SubsystemSet& b);
bool is_subset(const SubsystemSet& inner, const SubsystemSet& outer);
bool disjoint(const SubsystemSet& a, const SubsystemSet& b);

}  // namespace procmat
