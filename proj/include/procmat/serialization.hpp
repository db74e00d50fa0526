#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "procmat/sdp.hpp"
#include "procmat/switch_factory.hpp"

namespace procmat {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input document. `where` is a JSON pointer or a
/// "line L, column C" position.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Parses text, reporting syntax errors with line and column.
Json parse_json(const std::string& text, const std::string& source = "input");
/// Round-trip exact number formatting.
std::string dump_json(const Json& j, int indent = 2);

Json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const Json& j, const std::string& where);

Json operator_to_json(const LabeledOperator& op);
LabeledOperator operator_from_json(const Json& j, const RegistryPtr& registry, const std::string& where = "/operator");

Json layout_to_json(const ProcessLayout& layout);
ProcessLayout layout_from_json(const Json& j, const std::string& where = "/registry");

Json process_to_json(const ProcessMatrix& w);
ProcessMatrix process_from_json(const Json& j);

using Decomposition = std::variant<QcQcDecomposition, QcCcDecomposition>;

Json decomposition_to_json(const ProcessLayout& layout, const Decomposition& d);
Decomposition decomposition_from_json(const Json& j, const ProcessLayout& layout);

/// {"process": ..., "decomposition": ...}
Json bundle_to_json(const ProcessMatrix& w, const Decomposition& d);

Json pattern_to_json(const SlotPattern& p);
SlotPattern pattern_from_json(const Json& j);

Json report_to_json(const ValidityReport& r);
Json verdict_to_json(const ProcessLayout& layout, const ConstraintSystem& sys, const Verdict& v);
/// Blocks, equalities, faces and ranges of an assembled system.
Json system_to_json(const ConstraintSystem& sys, const ProcessLayout& layout);

}  // namespace procmat
