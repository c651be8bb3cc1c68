// Abstract syntax models: element types, members, and their constraints.
//
// A Model is a plain value that callers assemble either through ModelBuilder
// or by loading a .mcc file. validate_model() checks it and produces a
// ValidatedModel, an immutable, shareable view with all names resolved.

#ifndef MCC_MODEL_HPP_
#define MCC_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/error.hpp"
#include "mcc/registry.hpp"

namespace mcc {

enum class ElementKind { basic, composite, abstract };
enum class Associativity { none, leftToRight, rightToLeft, nonAssociative };
enum class Composition { none, eager, lazy };
enum class ValueKind { none, integer, floating, string };

std::string_view to_string(ElementKind kind);
std::string_view to_string(Associativity assoc);
std::string_view to_string(Composition composition);
std::string_view to_string(ValueKind kind);

struct PatternSpec {
  enum class Form { regularExpression, customMatcher };

  Form form = Form::regularExpression;
  std::string expression;  // regex source, or a matcher id
  std::optional<unsigned> precedence;  // token precedence, lower wins

  static PatternSpec regex(std::string source, std::optional<unsigned> precedence = std::nullopt) {
    return {Form::regularExpression, std::move(source), precedence};
  }
  static PatternSpec matcher(std::string id, std::optional<unsigned> precedence = std::nullopt) {
    return {Form::customMatcher, std::move(id), precedence};
  }

  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

inline constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

struct Multiplicity {
  std::size_t min = 1;
  std::size_t max = 1;  // kUnbounded for no upper limit

  bool unbounded() const { return max == kUnbounded; }
  bool repeatable() const { return max > 1; }
  friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

struct Member {
  std::string name;
  std::string typeName;
  bool optional = false;
  Multiplicity multiplicity;
  std::optional<PatternSpec> separator;
  std::vector<PatternSpec> prefix;
  std::vector<PatternSpec> suffix;
  std::optional<std::size_t> position;
  bool isReference = false;
  bool isValueBinding = false;

  friend bool operator==(const Member&, const Member&) = default;
};

struct ConstraintSet {
  Associativity associativity = Associativity::none;
  Composition composition = Composition::none;
  std::optional<unsigned> priority;  // lower binds tighter
  bool freeOrder = false;
  std::vector<std::string> customConstraints;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

struct ElementType {
  std::string name;
  ElementKind kind = ElementKind::composite;
  std::optional<std::string> supertype;
  std::optional<PatternSpec> pattern;  // basic only
  ValueKind valueKind = ValueKind::none;  // basic only: literal kind of the token value
  std::vector<Member> members;  // composite only
  std::vector<PatternSpec> prefix;
  std::vector<PatternSpec> suffix;
  ConstraintSet constraints;
  bool scopeDefining = false;
  std::optional<std::string> idMember;
  std::optional<std::string> semanticTag;

  // The tag used to look up evaluation callbacks; defaults to the type name.
  const std::string& tag() const { return semanticTag ? *semanticTag : name; }

  friend bool operator==(const ElementType&, const ElementType&) = default;
};

struct Model {
  std::string name;
  std::string startType;
  std::vector<ElementType> elements;  // declaration order is significant
  std::vector<PatternSpec> ignorePatterns;

  const ElementType* find(std::string_view type) const;
  ElementType* find(std::string_view type);

  friend bool operator==(const Model&, const Model&) = default;
};

struct ModelError {
  ErrorCode code;
  std::string message;
};

using TypeId = std::size_t;

struct ValidationResult;

// Immutable, validated model with resolved indices. Cheap to copy.
class ValidatedModel {
 public:
  const Model& model() const { return data_->model; }
  const std::string& name() const { return data_->model.name; }
  std::size_t size() const { return data_->model.elements.size(); }

  const ElementType& type(TypeId id) const { return data_->model.elements[id]; }
  std::optional<TypeId> find(std::string_view name) const;
  TypeId id_of(std::string_view name) const;  // throws UnknownType
  TypeId start() const { return data_->start; }

  std::optional<TypeId> supertype(TypeId id) const { return data_->supertype[id]; }
  // Direct subtypes in declaration order.
  const std::vector<TypeId>& subtypes(TypeId id) const { return data_->subtypes[id]; }
  bool is_subtype_of(TypeId sub, TypeId super) const;  // reflexive

  // Nearest type in the supertype chain (self first) carrying an associativity.
  std::optional<TypeId> associativity_owner(TypeId id) const;
  // Nearest type in the supertype chain (self first) carrying a composition policy.
  std::optional<TypeId> composition_owner(TypeId id) const;

  // Index of the member slot whose type carries operator annotations (priority
  // or associativity), from which a composite lifts its effective priority.
  // Throws AmbiguousPriority if more than one slot qualifies.
  std::optional<std::size_t> priority_slot(TypeId composite) const;

  // Non-fatal findings, such as elements unreachable from the start type.
  const std::vector<std::string>& warnings() const { return data_->warnings; }

  friend bool operator==(const ValidatedModel& a, const ValidatedModel& b) {
    return a.model() == b.model();
  }

 private:
  friend ValidationResult validate_model(const Model&, const Registry*);

  struct Data {
    Model model;
    TypeId start = 0;
    std::map<std::string, TypeId, std::less<>> index;
    std::vector<std::optional<TypeId>> supertype;
    std::vector<std::vector<TypeId>> subtypes;
    std::vector<std::string> warnings;
  };
  std::shared_ptr<const Data> data_;
};

struct ValidationResult {
  std::optional<ValidatedModel> model;
  std::vector<ModelError> errors;

  bool ok() const { return model.has_value(); }
};

// Checks every model invariant. Returns either the validated model or the full
// list of violations, never both. Matcher and constraint ids are checked only
// when a registry is supplied.
ValidationResult validate_model(const Model& model, const Registry* registry = nullptr);

// validate_model() that throws an Error listing every violation.
ValidatedModel validate_or_throw(const Model& model, const Registry* registry = nullptr);

std::vector<TypeId> subtypes_of(const ValidatedModel& model, TypeId type);

// The statically declared priority of a type. Composites without their own
// priority lift it per instance from priority_slot() during pruning; this
// throws AmbiguousPriority when that slot is not unique.
std::optional<unsigned> effective_priority(const ValidatedModel& model, TypeId type);

// Copy of the model with associativity, priority and composition removed.
Model strip_evaluation_order(const Model& model);

// Convenience builder for in-memory models.
class ModelBuilder {
 public:
  ModelBuilder(std::string name, std::string startType);

  ElementType& abstract(std::string name, std::optional<std::string> supertype = std::nullopt);
  ElementType& basic(std::string name, std::string regex,
                     std::optional<std::string> supertype = std::nullopt);
  ElementType& composite(std::string name, std::vector<Member> members,
                         std::optional<std::string> supertype = std::nullopt);
  ModelBuilder& ignore(std::string regex);

  const Model& model() const { return model_; }
  Model build() const { return model_; }

 private:
  Model model_;
};

Member member(std::string name, std::string typeName);
Member list_member(std::string name, std::string typeName, std::size_t min = 1,
                   std::size_t max = kUnbounded, std::optional<std::string> separator = std::nullopt);

}  // namespace mcc

#endif  // MCC_MODEL_HPP_
