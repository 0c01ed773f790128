#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stvem {

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_not_converged = 3 };

/// Command-line entry point: `mesh gen`, `solve`, `study`, `export`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace stvem
