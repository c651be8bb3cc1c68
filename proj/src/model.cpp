#include "mcc/model.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "mcc/regex.hpp"

namespace mcc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::CyclicInheritance: return "CyclicInheritance";
    case ErrorCode::PatternCompileError: return "PatternCompileError";
    case ErrorCode::MultiplicityError: return "MultiplicityError";
    case ErrorCode::DanglingReferenceTarget: return "DanglingReferenceTarget";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::AmbiguousPriority: return "AmbiguousPriority";
    case ErrorCode::PermutationLimitExceeded: return "PermutationLimitExceeded";
    case ErrorCode::BoundedExpansionLimit: return "BoundedExpansionLimit";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::LexicalError: return "LexicalError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValueParseError: return "ValueParseError";
    case ErrorCode::ConstraintPredicateError: return "ConstraintPredicateError";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorCode::AmbiguousParse: return "AmbiguousParse";
    case ErrorCode::MissingCallback: return "MissingCallback";
    case ErrorCode::RuntimeEvalError: return "RuntimeEvalError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::OracleBoundExceeded: return "OracleBoundExceeded";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::basic: return "basic";
    case ElementKind::composite: return "composite";
    case ElementKind::abstract: return "abstract";
  }
  return "?";
}

std::string_view to_string(Associativity assoc) {
  switch (assoc) {
    case Associativity::none: return "none";
    case Associativity::leftToRight: return "left";
    case Associativity::rightToLeft: return "right";
    case Associativity::nonAssociative: return "non";
  }
  return "?";
}

std::string_view to_string(Composition composition) {
  switch (composition) {
    case Composition::none: return "none";
    case Composition::eager: return "eager";
    case Composition::lazy: return "lazy";
  }
  return "?";
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::none: return "none";
    case ValueKind::integer: return "int";
    case ValueKind::floating: return "float";
    case ValueKind::string: return "string";
  }
  return "?";
}

const ElementType* Model::find(std::string_view type) const {
  for (const auto& e : elements) {
    if (e.name == type) return &e;
  }
  return nullptr;
}

ElementType* Model::find(std::string_view type) {
  for (auto& e : elements) {
    if (e.name == type) return &e;
  }
  return nullptr;
}

std::optional<TypeId> ValidatedModel::find(std::string_view name) const {
  auto it = data_->index.find(name);
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

TypeId ValidatedModel::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error(ErrorCode::UnknownType, "unknown element type '" + std::string(name) + "'");
}

bool ValidatedModel::is_subtype_of(TypeId sub, TypeId super) const {
  for (std::optional<TypeId> t = sub; t; t = supertype(*t)) {
    if (*t == super) return true;
  }
  return false;
}

std::optional<TypeId> ValidatedModel::associativity_owner(TypeId id) const {
  for (std::optional<TypeId> t = id; t; t = supertype(*t)) {
    if (type(*t).constraints.associativity != Associativity::none) return t;
  }
  return std::nullopt;
}

std::optional<TypeId> ValidatedModel::composition_owner(TypeId id) const {
  for (std::optional<TypeId> t = id; t; t = supertype(*t)) {
    if (type(*t).constraints.composition != Composition::none) return t;
  }
  return std::nullopt;
}

namespace {

// Types a slot of type `id` can hold: the type and all transitive subtypes.
void collect_descendants(const ValidatedModel& m, TypeId id, std::vector<TypeId>& out) {
  out.push_back(id);
  for (TypeId sub : m.subtypes(id)) collect_descendants(m, sub, out);
}

// A slot is operator-like when it can only be filled by tokens.
bool operator_like(const ValidatedModel& m, TypeId id) {
  std::vector<TypeId> family;
  collect_descendants(m, id, family);
  return std::all_of(family.begin(), family.end(),
                     [&](TypeId t) { return m.type(t).kind != ElementKind::composite; });
}

bool carries_operator_annotation(const ValidatedModel& m, TypeId id) {
  std::vector<TypeId> family;
  collect_descendants(m, id, family);
  for (auto t = m.supertype(id); t; t = m.supertype(*t)) family.push_back(*t);
  return std::any_of(family.begin(), family.end(), [&](TypeId t) {
    const auto& c = m.type(t).constraints;
    return c.priority.has_value() || c.associativity != Associativity::none;
  });
}

}  // namespace

std::optional<std::size_t> ValidatedModel::priority_slot(TypeId composite) const {
  const ElementType& t = type(composite);
  std::optional<std::size_t> slot;
  for (std::size_t i = 0; i < t.members.size(); ++i) {
    const Member& m = t.members[i];
    if (m.isReference) continue;
    TypeId mt = id_of(m.typeName);
    if (!operator_like(*this, mt) || !carries_operator_annotation(*this, mt)) continue;
    if (slot) {
      throw Error(ErrorCode::AmbiguousPriority,
                  "element '" + t.name + "' has two priority-bearing members ('" + t.members[*slot].name +
                      "' and '" + m.name + "')");
    }
    slot = i;
  }
  return slot;
}

namespace {

class Validator {
 public:
  Validator(const Model& model, const Registry* registry) : model_(model), registry_(registry) {}

  std::vector<ModelError> errors;
  std::vector<std::string> warnings;

  void error(ErrorCode code, std::string message) { errors.push_back({code, std::move(message)}); }

  void check_pattern(const PatternSpec& p, const std::string& where) {
    if (p.form == PatternSpec::Form::customMatcher) {
      if (registry_ && !registry_->has_matcher(p.expression)) {
        error(ErrorCode::PatternCompileError, where + ": custom matcher '" + p.expression + "' is not registered");
      }
      return;
    }
    try {
      Regex re(p.expression);
      if (re.full_match("")) {
        error(ErrorCode::PatternCompileError, where + ": pattern '" + p.expression + "' matches the empty string");
      }
    } catch (const Error& e) {
      error(ErrorCode::PatternCompileError, where + ": " + e.what());
    }
  }

  const ElementType* lookup(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &model_.elements[it->second];
  }

  void run() {
    // Names and reserved prefixes.
    for (std::size_t i = 0; i < model_.elements.size(); ++i) {
      const auto& e = model_.elements[i];
      if (e.name.empty()) error(ErrorCode::InvalidModel, "element with empty name");
      if (e.name.rfind("Opt_", 0) == 0 || e.name.rfind("Perm_", 0) == 0) {
        error(ErrorCode::NameCollision, "element name '" + e.name + "' uses a reserved prefix");
      }
      if (!index_.emplace(e.name, i).second) {
        error(ErrorCode::InvalidModel, "element '" + e.name + "' is declared twice");
      }
    }
    if (!lookup(model_.startType)) {
      error(ErrorCode::UnknownType, "start type '" + model_.startType + "' is not declared");
    }
    for (std::size_t i = 0; i < model_.ignorePatterns.size(); ++i) {
      check_pattern(model_.ignorePatterns[i], "ignore pattern " + std::to_string(i + 1));
    }
    for (const auto& e : model_.elements) check_element(e);
    check_cycles();
  }

  void check_element(const ElementType& e) {
    const std::string where = "element '" + e.name + "'";
    if (e.kind == ElementKind::basic) {
      if (!e.pattern) error(ErrorCode::InvalidModel, where + ": basic element needs a pattern");
      else check_pattern(*e.pattern, where);
      if (!e.members.empty()) error(ErrorCode::InvalidModel, where + ": basic element cannot have members");
    } else {
      if (e.pattern) error(ErrorCode::InvalidModel, where + ": only basic elements carry a pattern");
      if (e.valueKind != ValueKind::none) {
        error(ErrorCode::InvalidModel, where + ": only basic elements carry a literal value kind");
      }
    }
    if (e.kind == ElementKind::abstract && !e.members.empty()) {
      error(ErrorCode::InvalidModel, where + ": abstract element cannot have members");
    }
    if (e.kind != ElementKind::composite && (e.scopeDefining || e.idMember)) {
      error(ErrorCode::InvalidModel, where + ": only composite elements can define scopes or identifiers");
    }
    if (e.supertype) {
      const ElementType* s = lookup(*e.supertype);
      if (!s) error(ErrorCode::UnknownType, where + ": unknown supertype '" + *e.supertype + "'");
      else if (s->kind != ElementKind::abstract) {
        error(ErrorCode::InvalidModel, where + ": supertype '" + *e.supertype + "' is not abstract");
      }
    }
    for (const auto& p : e.prefix) check_pattern(p, where + " prefix");
    for (const auto& p : e.suffix) check_pattern(p, where + " suffix");
    if (registry_) {
      for (const auto& c : e.constraints.customConstraints) {
        if (!registry_->has_constraint(c)) {
          error(ErrorCode::InvalidModel, where + ": custom constraint '" + c + "' is not registered");
        }
      }
    }

    std::set<std::string> names;
    std::set<std::size_t> positions;
    std::size_t value_bindings = 0;
    for (const auto& m : e.members) {
      const std::string mw = where + " member '" + m.name + "'";
      if (!names.insert(m.name).second) error(ErrorCode::InvalidModel, mw + ": duplicate member name");
      const ElementType* mt = lookup(m.typeName);
      if (!mt) {
        error(ErrorCode::UnknownType, mw + ": unknown type '" + m.typeName + "'");
      }
      const auto& mult = m.multiplicity;
      if (mult.max == 0) error(ErrorCode::MultiplicityError, mw + ": maximum multiplicity is zero");
      if (!mult.unbounded() && mult.min > mult.max) {
        error(ErrorCode::MultiplicityError, mw + ": minimum exceeds maximum multiplicity");
      }
      if (m.separator) {
        if (!mult.repeatable()) error(ErrorCode::MultiplicityError, mw + ": separator on a non-repeatable member");
        check_pattern(*m.separator, mw + " separator");
      }
      for (const auto& p : m.prefix) check_pattern(p, mw + " prefix");
      for (const auto& p : m.suffix) check_pattern(p, mw + " suffix");
      if (m.position) {
        if (e.constraints.freeOrder) error(ErrorCode::InvalidModel, mw + ": explicit position in a free-order element");
        if (*m.position >= e.members.size()) error(ErrorCode::InvalidModel, mw + ": position out of range");
        if (!positions.insert(*m.position).second) error(ErrorCode::InvalidModel, mw + ": duplicate position");
      }
      if (m.isValueBinding) {
        ++value_bindings;
        if (mt && mt->kind != ElementKind::basic) {
          error(ErrorCode::InvalidModel, mw + ": value-binding member must have a basic type");
        }
      }
      if (m.isReference && mt) {
        if (!mt->idMember) {
          error(ErrorCode::DanglingReferenceTarget, mw + ": referenced type '" + mt->name + "' declares no identifier");
        }
        if (m.isValueBinding) error(ErrorCode::InvalidModel, mw + ": a reference cannot bind a value");
      }
      if (mt && mult.repeatable()) {
        const std::string list_name = (m.isReference ? reference_slot_name(*mt) : mt->name) + "List";
        if (lookup(list_name)) {
          error(ErrorCode::NameCollision, mw + ": generated list symbol '" + list_name + "' collides with an element");
        }
      }
    }
    if (value_bindings > 1) error(ErrorCode::InvalidModel, where + ": more than one value-binding member");
    if (e.idMember) {
      auto it = std::find_if(e.members.begin(), e.members.end(),
                             [&](const Member& m) { return m.name == *e.idMember; });
      if (it == e.members.end()) {
        error(ErrorCode::InvalidModel, where + ": identifier member '" + *e.idMember + "' does not exist");
      } else {
        const ElementType* it_type = lookup(it->typeName);
        if (it_type && it_type->kind != ElementKind::basic) {
          error(ErrorCode::InvalidModel, where + ": identifier member must have a basic type");
        }
        if (it->multiplicity.repeatable() || it->optional || it->isReference) {
          error(ErrorCode::InvalidModel, where + ": identifier member must be a single mandatory token");
        }
      }
    }
  }

  std::string reference_slot_name(const ElementType& target) const {
    if (!target.idMember) return target.name;
    for (const auto& m : target.members) {
      if (m.name == *target.idMember) return m.typeName;
    }
    return target.name;
  }

  void check_cycles() {
    for (const auto& e : model_.elements) {
      std::set<std::string> seen{e.name};
      const ElementType* t = &e;
      while (t->supertype) {
        const ElementType* s = lookup(*t->supertype);
        if (!s) break;
        if (!seen.insert(s->name).second) {
          if (s->name == e.name) {
            error(ErrorCode::CyclicInheritance, "element '" + e.name + "' is its own supertype");
          }
          break;
        }
        t = s;
      }
    }
  }

  const std::map<std::string, std::size_t>& index() const { return index_; }

 private:
  const Model& model_;
  const Registry* registry_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace

ValidationResult validate_model(const Model& model, const Registry* registry) {
  Validator v(model, registry);
  v.run();
  ValidationResult result;
  if (!v.errors.empty()) {
    result.errors = std::move(v.errors);
    return result;
  }

  auto data = std::make_shared<ValidatedModel::Data>();
  data->model = model;
  const std::size_t n = model.elements.size();
  for (std::size_t i = 0; i < n; ++i) data->index.emplace(model.elements[i].name, i);
  data->start = data->index.at(model.startType);
  data->supertype.resize(n);
  data->subtypes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto& s = model.elements[i].supertype) {
      TypeId parent = data->index.at(*s);
      data->supertype[i] = parent;
      data->subtypes[parent].push_back(i);
    }
  }

  // Reachability from the start type through members and subtypes.
  std::vector<bool> reached(n, false);
  std::vector<TypeId> stack{data->start};
  while (!stack.empty()) {
    TypeId t = stack.back();
    stack.pop_back();
    if (reached[t]) continue;
    reached[t] = true;
    for (TypeId sub : data->subtypes[t]) stack.push_back(sub);
    for (const auto& m : model.elements[t].members) {
      TypeId mt = data->index.at(m.typeName);
      stack.push_back(mt);
      if (m.isReference) {
        const auto& target = model.elements[mt];
        for (const auto& tm : target.members) {
          if (target.idMember && tm.name == *target.idMember) stack.push_back(data->index.at(tm.typeName));
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!reached[i]) {
      data->warnings.push_back("element '" + model.elements[i].name + "' is unreachable from '" +
                               model.startType + "'");
    }
  }

  ValidatedModel vm;
  vm.data_ = std::move(data);
  result.model = std::move(vm);
  return result;
}

ValidatedModel validate_or_throw(const Model& model, const Registry* registry) {
  ValidationResult r = validate_model(model, registry);
  if (r.ok()) return std::move(*r.model);
  std::ostringstream msg;
  msg << "model '" << model.name << "' is invalid:";
  for (const auto& e : r.errors) msg << "\n  " << to_string(e.code) << ": " << e.message;
  throw Error(r.errors.front().code, msg.str());
}

std::vector<TypeId> subtypes_of(const ValidatedModel& model, TypeId type) { return model.subtypes(type); }

std::optional<unsigned> effective_priority(const ValidatedModel& model, TypeId type) {
  const ElementType& t = model.type(type);
  if (t.constraints.priority) return t.constraints.priority;
  if (t.kind == ElementKind::composite) (void)model.priority_slot(type);
  return std::nullopt;
}

Model strip_evaluation_order(const Model& model) {
  Model out = model;
  for (auto& e : out.elements) {
    e.constraints.associativity = Associativity::none;
    e.constraints.composition = Composition::none;
    e.constraints.priority.reset();
  }
  return out;
}

ModelBuilder::ModelBuilder(std::string name, std::string startType) {
  model_.name = std::move(name);
  model_.startType = std::move(startType);
}

ElementType& ModelBuilder::abstract(std::string name, std::optional<std::string> supertype) {
  ElementType e;
  e.name = std::move(name);
  e.kind = ElementKind::abstract;
  e.supertype = std::move(supertype);
  return model_.elements.emplace_back(std::move(e));
}

ElementType& ModelBuilder::basic(std::string name, std::string regex, std::optional<std::string> supertype) {
  ElementType e;
  e.name = std::move(name);
  e.kind = ElementKind::basic;
  e.pattern = PatternSpec::regex(std::move(regex));
  e.supertype = std::move(supertype);
  return model_.elements.emplace_back(std::move(e));
}

ElementType& ModelBuilder::composite(std::string name, std::vector<Member> members,
                                     std::optional<std::string> supertype) {
  ElementType e;
  e.name = std::move(name);
  e.kind = ElementKind::composite;
  e.members = std::move(members);
  e.supertype = std::move(supertype);
  return model_.elements.emplace_back(std::move(e));
}

ModelBuilder& ModelBuilder::ignore(std::string regex) {
  model_.ignorePatterns.push_back(PatternSpec::regex(std::move(regex)));
  return *this;
}

Member member(std::string name, std::string typeName) {
  Member m;
  m.name = std::move(name);
  m.typeName = std::move(typeName);
  return m;
}

Member list_member(std::string name, std::string typeName, std::size_t min, std::size_t max,
                   std::optional<std::string> separator) {
  Member m = member(std::move(name), std::move(typeName));
  m.multiplicity = {min, max};
  if (separator) m.separator = PatternSpec::regex(std::move(*separator));
  return m;
}

}  // namespace mcc
