// The mcc command-line front end, callable in-process.

#ifndef MCC_CLI_HPP_
#define MCC_CLI_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/error.hpp"

namespace mcc {

// `args` includes the program name. Exit codes: 0 success, 1 failure,
// 2 ambiguity (parse) or malformed test file (test). eval --lang imp exits
// with main's return value when main returns explicitly.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            bool color = false);

// Whether ANSI colors should be used on the error stream: MCC_COLOR=0 turns
// them off, MCC_COLOR=1 on; otherwise only when stderr is a terminal.
bool color_from_environment();

// One diagnostic with the offending source line and a caret when the error
// carries a span into `source`.
void report_error(std::ostream& err, const Error& error, std::string_view source, const std::string& origin,
                  bool color);

}  // namespace mcc

#endif  // MCC_CLI_HPP_
