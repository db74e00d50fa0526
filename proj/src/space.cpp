#include "procmat/space.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <stdexcept>

namespace procmat {

SpaceRegistry::SpaceRegistry(std::vector<SystemLabel> systems) : systems_(std::move(systems)) {
  std::set<std::string> seen;
  for (const auto& s : systems_) {
    if (s.name.empty()) throw std::invalid_argument("subsystem name must not be empty");
    if (s.dim < 1) throw std::invalid_argument("subsystem '" + s.name + "' has dimension < 1");
    if (!seen.insert(s.name).second) throw std::invalid_argument("duplicate subsystem name '" + s.name + "'");
  }
}

std::optional<std::size_t> SpaceRegistry::find(std::string_view name) const {
  for (std::size_t i = 0; i < systems_.size(); ++i)
    if (systems_[i].name == name) return i;
  return std::nullopt;
}

std::size_t SpaceRegistry::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw std::out_of_range("unknown subsystem '" + std::string(name) + "'");
}

SubsystemSet SpaceRegistry::subsystems(const std::vector<std::string>& names) const {
  SubsystemSet out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index_of(n));
  return normalized(std::move(out));
}

SubsystemSet SpaceRegistry::all() const {
  SubsystemSet out(systems_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

long SpaceRegistry::dimension(const SubsystemSet& set) const {
  long d = 1;
  for (auto i : set) d *= systems_.at(i).dim;
  return d;
}

std::vector<std::string> SpaceRegistry::names(const SubsystemSet& set) const {
  std::vector<std::string> out;
  out.reserve(set.size());
  for (auto i : set) out.push_back(systems_.at(i).name);
  return out;
}

std::string SpaceRegistry::describe(const SubsystemSet& set) const {
  std::string out = "{";
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k) out += ",";
    out += systems_.at(set[k]).name;
  }
  return out + "}";
}

RegistryPtr make_registry(std::vector<SystemLabel> systems) {
  return std::make_shared<const SpaceRegistry>(std::move(systems));
}

bool same_registry(const RegistryPtr& a, const RegistryPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

SubsystemSet normalized(SubsystemSet set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

SubsystemSet set_union(const SubsystemSet& a, const SubsystemSet& b) {
  SubsystemSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SubsystemSet set_difference(const SubsystemSet& a, const SubsystemSet& b) {
  SubsystemSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SubsystemSet set_intersection(const SubsystemSet& a, const SubsystemSet& b) {
  SubsystemSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const SubsystemSet& inner, const SubsystemSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

bool disjoint(const SubsystemSet& a, const SubsystemSet& b) { return set_intersection(a, b).empty(); }

}  // namespace procmat
