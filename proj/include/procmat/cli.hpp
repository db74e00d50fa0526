#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace procmat {

/// Exit codes: 0 verdict as expected (or positive when no --expect is given),
/// 1 mismatch, 2 input error.
int cli_main(int argc, char** argv);
int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace procmat
