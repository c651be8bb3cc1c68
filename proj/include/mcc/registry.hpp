// Host-registered extension points: custom token matchers and custom
// constraint predicates, looked up by identifier.

#ifndef MCC_REGISTRY_HPP_
#define MCC_REGISTRY_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mcc {

class Asg;
struct AsgNode;

// Returns the length in bytes of the longest match at `offset`, if any.
using Matcher = std::function<std::optional<std::size_t>(std::string_view input, std::size_t offset)>;

// Returns false to reject the instantiated node (and with it the candidate tree).
using ConstraintPredicate = std::function<bool(const Asg& asg, const AsgNode& node)>;

struct Registry {
  std::map<std::string, Matcher, std::less<>> matchers;
  std::map<std::string, ConstraintPredicate, std::less<>> constraints;

  bool has_matcher(std::string_view id) const { return matchers.find(id) != matchers.end(); }
  bool has_constraint(std::string_view id) const { return constraints.find(id) != constraints.end(); }
};

}  // namespace mcc

#endif  // MCC_REGISTRY_HPP_
