// From parse trees to abstract syntax graphs: instantiation, custom
// constraints, reference resolution, evaluation and export.

#ifndef MCC_WEAVE_HPP_
#define MCC_WEAVE_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/asg.hpp"
#include "mcc/earley.hpp"
#include "mcc/grammar.hpp"
#include "mcc/lexer.hpp"
#include "mcc/registry.hpp"

namespace mcc {

// Builds the node tree for `tree`. References stay unresolved; no scopes yet.
Asg instantiate(const ParseTree& tree, const Grammar& grammar, const std::vector<Token>& tokens,
                const ValidatedModel& model);

struct ConstraintViolation {
  NodeId node;
  std::string constraint;
};

// Depth-first evaluation of every node's custom predicates. Throws
// ConstraintPredicateError if a predicate is missing or throws.
std::vector<ConstraintViolation> apply_custom_constraints(const Asg& asg, const ValidatedModel& model,
                                                          const Registry& registry);

// A declaration made available before parsing, bound in the outermost scope.
struct Predefined {
  std::string name;
  std::string typeName;
};

// Builds scopes and resolves every reference member in place. Throws
// UnresolvedReferenceError or Error(DuplicateDeclaration).
void resolve_references(Asg& asg, const ValidatedModel& model, const std::vector<Predefined>& globals = {});

using Value = double;

class Evaluator;

// What a callback sees: the node being evaluated and lazy access to the rest.
class EvalContext {
 public:
  EvalContext(Evaluator& evaluator, NodeId node, const std::vector<NodeId>* operands)
      : evaluator_(evaluator), node_(node), operands_(operands) {}

  const Asg& asg() const;
  const AsgNode& node() const;
  NodeId id() const { return node_; }

  Value eval(NodeId id) const;
  // Evaluates the node held by a single-node member.
  Value eval_member(std::string_view name) const;
  const AsgValue& member(std::string_view name) const;

  // Operands passed by apply(); empty otherwise.
  std::size_t operand_count() const { return operands_ ? operands_->size() : 0; }
  NodeId operand_node(std::size_t i) const { return operands_->at(i); }
  Value operand(std::size_t i) const { return eval(operands_->at(i)); }

  // Invokes `op`'s callback with the given operand nodes.
  Value apply(NodeId op, const std::vector<NodeId>& operands) const;

 private:
  Evaluator& evaluator_;
  NodeId node_;
  const std::vector<NodeId>* operands_;
};

using Callback = std::function<Value(EvalContext&)>;

// Callbacks keyed by semantic tag. A node without a callback for its own tag
// falls back to the nearest supertype's tag.
using Callbacks = std::map<std::string, Callback, std::less<>>;

class Evaluator {
 public:
  Evaluator(const Asg& asg, const ValidatedModel& model, const Callbacks& callbacks);

  // Throws MissingCallback naming the first node type without a callback.
  void check() const;
  Value eval(NodeId id, const std::vector<NodeId>* operands = nullptr);
  const Asg& asg() const { return asg_; }

 private:
  const Callback* find(TypeId type) const;

  const Asg& asg_;
  const ValidatedModel& model_;
  const Callbacks& callbacks_;
};

// Checks callbacks for every reachable node, then evaluates the root.
Value evaluate(const Asg& asg, const ValidatedModel& model, const Callbacks& callbacks);

// JSON document {nodes, root, refEdges}.
std::string asg_json(const Asg& asg, int indent = 2);
// Tree edges solid, reference edges dashed.
std::string asg_dot(const Asg& asg);

// Concrete text for the tree under `id`, tokens separated by single spaces.
// Throws InvalidModel if a delimiter pattern has no fixed text.
std::string pretty_print(const Asg& asg, const ValidatedModel& model, NodeId id);
std::string pretty_print(const Asg& asg, const ValidatedModel& model);

// Structural rendering that ignores ids and spans; equal shapes mean
// isomorphic trees.
std::string asg_shape(const Asg& asg, NodeId id);
std::string asg_shape(const Asg& asg);

// The whole pipeline for one model.
class Parser {
 public:
  explicit Parser(ValidatedModel model, Registry registry = {}, LexOptions lex = {},
                  std::vector<Predefined> globals = {});

  const ValidatedModel& model() const { return model_; }
  const Grammar& grammar() const { return *grammar_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const Registry& registry() const { return registry_; }

  TokenGraph tokenize(std::string_view input) const;
  ParseForest forest(std::string_view input, bool prune = true) const;
  std::uint64_t count(std::string_view input, bool prune = true, std::uint64_t cap = UINT64_MAX) const;

  // Every ASG surviving pruning, custom constraints and resolution.
  std::vector<Asg> parse_all(std::string_view input) const;
  // Exactly one ASG; throws Error(AmbiguousParse) when several survive.
  Asg parse(std::string_view input) const;

  // Trees considered per parse before custom constraints are applied.
  static constexpr std::size_t kMaxTrees = 64;

 private:
  ValidatedModel model_;
  Registry registry_;
  std::shared_ptr<const Grammar> grammar_;
  Lexicon lexicon_;
  std::vector<Predefined> globals_;
};

}  // namespace mcc

#endif  // MCC_WEAVE_HPP_
