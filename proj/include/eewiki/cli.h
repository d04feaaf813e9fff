#pragma once

// Command line driver. Exit codes: 0 success, 1 domain error (diagnostics
// on err), 2 usage error.
//
//   validate <file|id>
//   ask      <file|id> "<sentence>" [--equals v=x] [--min v=x] [--max v=x] [--approx v=text[:n]]
//   explain  <file|id> "<sentence>" [--html]
//   menu     <file|id> [--search text]
//   sql      <file|id> "<sentence>" [--map m.cfg] [--run]
//   ingest   <id> <data> --table t [--heading "..."] [--delimiter ,]
//   serve
//
// Global flags: --limits rounds=N,facts=M  --format text|json  --config c.cfg
// A target that is not a file names a rulebase in the configured workspace.

#include <iosfwd>
#include <string>
#include <vector>

namespace ee {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ee
