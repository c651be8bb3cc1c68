// The two built-in example languages: arithmetic expressions and the small
// imperative language built on top of them.

#ifndef MCC_LANGUAGES_HPP_
#define MCC_LANGUAGES_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/weave.hpp"

namespace mcc {

std::string_view calculator_model_text();
std::string_view imperative_model_text();

// Shortest round-trip decimal; integral values print without a decimal point.
std::string format_number(double value);

Callbacks calculator_callbacks();
Parser calculator_parser();
double eval_calculator(const Parser& parser, std::string_view expression);

// Predefined functions and variables visible to every imperative program.
std::vector<Predefined> imperative_globals();
Parser imperative_parser();

struct RunResult {
  double returnValue = 0;
  bool returned = false;  // main executed an explicit return
};

// Runs main. read() takes one number per line of `in`; print() writes one
// number per line to `out`.
RunResult run_imperative(const Asg& program, const ValidatedModel& model, std::istream& in, std::ostream& out);

}  // namespace mcc

#endif  // MCC_LANGUAGES_HPP_
