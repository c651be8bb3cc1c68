// Textual model files (.mcc).
//
//   language <Name> start <Type>
//   ignore "<regex>"
//   abstract <Name> [: <Super>] [{ ... }]
//   basic <Name> [: <Super>] (pattern "<regex>" | matcher <id>) [precedence <n>]
//         [value int|float|string] [priority <n>] [{ ... }]
//   element <Name> [: <Super>] [scope] { ... }
//
// Block items, each ending in ';':
//   assoc left|right|non    priority <n>    composition eager|lazy
//   prefix <pat>   suffix <pat>   freeorder   scope   constraint <id>   tag <id>
//   member <name> : <Type> [optional] [list] [separator <pat>] [min <n>]
//          [max <n>|*] [ref] [id] [value] [position <n>] [prefix <pat>] [suffix <pat>]
//
// A <pat> is "<regex>" or @<matcher-id>, optionally followed by precedence <n>.
// Inside strings \" stands for a quote; every other backslash is kept as is.
// '#' starts a comment.

#ifndef MCC_MODEL_FILE_HPP_
#define MCC_MODEL_FILE_HPP_

#include <string>
#include <string_view>

#include "mcc/model.hpp"

namespace mcc {

// Throws FormatError with the line and column of the offending token.
Model parse_model_text(std::string_view text);

// Parses and validates; throws FormatError or the validation Error.
ValidatedModel load_model_text(std::string_view text, const Registry* registry = nullptr);
ValidatedModel load_model_file(const std::string& path, const Registry* registry = nullptr);

// Canonical .mcc text; parse_model_text(print_model(m)) == m.
std::string print_model(const Model& model);

std::string read_file(const std::string& path);

}  // namespace mcc

#endif  // MCC_MODEL_FILE_HPP_
