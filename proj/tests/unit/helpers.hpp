#pragma once

#include <string>
#include <vector>

#include "procmat/process.hpp"

namespace testing {

inline procmat::ProcessLayout layout(int n_slots, int dp, int dio, int df) {
  using namespace procmat;
  static const char* names[] = {"A", "B", "C"};
  std::vector<SystemLabel> sys{{"P", dp}};
  std::vector<RoleAssignment> roles{{Role::Past, ""}};
  for (int k = 0; k < n_slots; ++k) {
    const std::string s = names[k];
    sys.push_back({s + "_I", dio});
    sys.push_back({s + "_O", dio});
    roles.push_back({Role::Input, s});
    roles.push_back({Role::Output, s});
  }
  sys.push_back({"F", df});
  roles.push_back({Role::Future, ""});
  return ProcessLayout(make_registry(sys), roles);
}

inline procmat::SubsystemSet with_roles(const procmat::ProcessLayout& L, std::initializer_list<procmat::Role> roles) {
  procmat::SubsystemSet out;
  for (std::size_t s = 0; s < L.roles().size(); ++s)
    for (auto r : roles)
      if (L.roles()[s].role == r) out.push_back(s);
  return out;
}

}  // namespace testing
