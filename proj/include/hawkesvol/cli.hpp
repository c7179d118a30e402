#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hawkesvol::cli {

/// Run one command line (args[0] is the program name). Returns the exit status:
/// 0 success, 2 configuration error, 3 data error, 4 numerical failure. Failures print one
/// `error=<kind> reason="<text>"` line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hawkesvol::cli
