// Abstract syntax graphs: instantiated model objects plus reference edges.

#ifndef MCC_ASG_HPP_
#define MCC_ASG_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcc/model.hpp"

namespace mcc {

using NodeId = std::size_t;
using Literal = std::variant<std::int64_t, double, std::string>;

std::string literal_text(const Literal& value);

// A symbolic reference by identifier; `target` is set once resolved.
struct Reference {
  std::string lexeme;
  Span span;
  std::optional<NodeId> target;
};

struct AsgValue {
  enum class Kind { absent, node, list, reference, referenceList };

  Kind kind = Kind::absent;
  std::vector<NodeId> nodes;          // node: exactly one; list: every item
  std::vector<Reference> references;  // reference: exactly one; referenceList: every item

  NodeId node() const { return nodes.at(0); }
  const Reference& reference() const { return references.at(0); }
  bool present() const { return kind != Kind::absent; }
};

struct AsgNode {
  NodeId id = 0;
  TypeId type = 0;
  std::string typeName;
  // Members in declaration order.
  std::vector<std::pair<std::string, AsgValue>> members;
  Span span;
  std::optional<Literal> value;
  std::string lexeme;  // basic nodes, and the name of predefined declarations
  std::optional<NodeId> parent;
  bool predefined = false;

  const AsgValue* member(std::string_view name) const;
};

struct ReferenceEdge {
  NodeId from = 0;
  std::string member;
  NodeId to = 0;
  friend bool operator==(const ReferenceEdge&, const ReferenceEdge&) = default;
};

struct Scope {
  std::optional<NodeId> owner;  // none for the global and predefined scopes
  std::optional<std::size_t> parent;
  std::map<std::string, std::vector<NodeId>> bindings;
};

class Asg {
 public:
  std::vector<AsgNode> nodes;
  NodeId root = 0;
  std::vector<ReferenceEdge> referenceEdges;
  std::vector<Scope> scopes;
  std::map<NodeId, std::size_t> scopeOf;  // scope in which a node's references resolve

  const AsgNode& node(NodeId id) const { return nodes.at(id); }
  AsgNode& node(NodeId id) { return nodes.at(id); }

  // Child nodes through members, in member order; references excluded.
  std::vector<NodeId> children(NodeId id) const;

  // Innermost declaration named `lexeme` visible from `scope` whose type is
  // `type` or one of its subtypes.
  std::optional<NodeId> lookup(const ValidatedModel& model, std::size_t scope, std::string_view lexeme,
                               TypeId type) const;
};

}  // namespace mcc

#endif  // MCC_ASG_HPP_
