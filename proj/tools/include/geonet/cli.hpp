#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geonet::cli {

/// Runs one `geonet` invocation. `args` excludes the program name.
/// Returns 0 on success, 2 on usage or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geonet::cli
