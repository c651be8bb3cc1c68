#include "mcc/weave.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "mcc/regex.hpp"

namespace mcc {

std::string literal_text(const Literal& value) {
  if (auto i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&value)) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, r.ptr);
  }
  return std::get<std::string>(value);
}

const AsgValue* AsgNode::member(std::string_view name) const {
  for (const auto& [n, v] : members) {
    if (n == name) return &v;
  }
  return nullptr;
}

std::vector<NodeId> Asg::children(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [name, v] : node(id).members) {
    if (v.kind == AsgValue::Kind::node || v.kind == AsgValue::Kind::list) {
      out.insert(out.end(), v.nodes.begin(), v.nodes.end());
    }
  }
  return out;
}

std::optional<NodeId> Asg::lookup(const ValidatedModel& model, std::size_t scope, std::string_view lexeme,
                                  TypeId type) const {
  for (std::optional<std::size_t> s = scope; s; s = scopes[*s].parent) {
    auto it = scopes[*s].bindings.find(std::string(lexeme));
    if (it == scopes[*s].bindings.end()) continue;
    for (NodeId d : it->second) {
      if (model.is_subtype_of(node(d).type, type)) return d;
    }
  }
  return std::nullopt;
}

namespace {

Literal parse_value(ValueKind kind, const std::string& lexeme, Span span) {
  auto fail = [&] {
    throw Error(ErrorCode::ValueParseError,
                "cannot convert '" + lexeme + "' to " + std::string(to_string(kind)), span);
  };
  switch (kind) {
    case ValueKind::integer: {
      std::int64_t v = 0;
      auto r = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
      if (r.ec != std::errc() || r.ptr != lexeme.data() + lexeme.size()) fail();
      return v;
    }
    case ValueKind::floating: {
      char* end = nullptr;
      double v = std::strtod(lexeme.c_str(), &end);
      if (lexeme.empty() || end != lexeme.c_str() + lexeme.size()) fail();
      return v;
    }
    default: return lexeme;
  }
}

class Instantiator {
 public:
  Instantiator(const Grammar& g, const std::vector<Token>& tokens, const ValidatedModel& model)
      : g_(g), tokens_(tokens), model_(model) {}

  Asg run(const ParseTree& tree) {
    asg_.root = element(tree);
    return std::move(asg_);
  }

 private:
  bool is_element(SymbolId s) const { return g_.symbol(s).element.has_value(); }

  NodeId element(const ParseTree& t) {
    if (t.token) {
      const Token& tok = tokens_[*t.token];
      const TypeId type = *g_.symbol(t.symbol).element;
      const ElementType& et = model_.type(type);
      NodeId id = add(type, t.span);
      asg_.nodes[id].lexeme = tok.lexeme;
      if (et.valueKind != ValueKind::none) asg_.nodes[id].value = parse_value(et.valueKind, tok.lexeme, t.span);
      return id;
    }
    const Production& p = g_.production(*t.production);
    if (p.origin == Origin::selection) return element(t.children.at(0));

    const TypeId type = *p.elementType;
    const ElementType& et = model_.type(type);
    const NodeId id = add(type, t.span);
    std::vector<std::pair<std::string, AsgValue>> members;
    for (const auto& m : et.members) {
      AsgValue v;
      if (m.multiplicity.repeatable()) v.kind = m.isReference ? AsgValue::Kind::referenceList : AsgValue::Kind::list;
      members.emplace_back(m.name, std::move(v));
    }
    for (const auto& [index, name] : p.memberBindings) {
      auto slot = std::find_if(members.begin(), members.end(), [&](const auto& x) { return x.first == name; });
      const Member& m = *std::find_if(et.members.begin(), et.members.end(), [&](const Member& x) { return x.name == name; });
      slot->second = member_value(t.children.at(index), m);
    }
    for (const auto& [name, v] : members) {
      for (NodeId c : v.nodes) asg_.nodes[c].parent = id;
    }
    for (const auto& m : et.members) {
      if (!m.isValueBinding) continue;
      const AsgValue& v = std::find_if(members.begin(), members.end(), [&](const auto& x) { return x.first == m.name; })->second;
      if (v.kind == AsgValue::Kind::node) asg_.nodes[id].value = asg_.nodes[v.node()].value;
    }
    asg_.nodes[id].members = std::move(members);
    return id;
  }

  AsgValue member_value(const ParseTree& c, const Member& m) {
    AsgValue v;
    if (m.multiplicity.repeatable()) {
      v.kind = m.isReference ? AsgValue::Kind::referenceList : AsgValue::Kind::list;
      collect(c, m, v);
      return v;
    }
    const ParseTree* cur = &c;
    if (!is_element(cur->symbol)) {
      // Optional wrapper.
      const Production& p = g_.production(*cur->production);
      if (p.origin == Origin::optionalEpsilon) return v;
      cur = &cur->children.at(p.memberBindings.begin()->first);
    }
    if (m.isReference) {
      v.kind = AsgValue::Kind::reference;
      v.references.push_back(Reference{tokens_[*cur->token].lexeme, cur->span, std::nullopt});
    } else {
      v.kind = AsgValue::Kind::node;
      v.nodes.push_back(element(*cur));
    }
    return v;
  }

  void collect(const ParseTree& t, const Member& m, AsgValue& v) {
    if (is_element(t.symbol)) {
      if (m.isReference) v.references.push_back(Reference{tokens_[*t.token].lexeme, t.span, std::nullopt});
      else v.nodes.push_back(element(t));
      return;
    }
    if (t.token) return;  // delimiter
    for (const auto& child : t.children) collect(child, m, v);
  }

  NodeId add(TypeId type, Span span) {
    AsgNode n;
    n.id = asg_.nodes.size();
    n.type = type;
    n.typeName = model_.type(type).name;
    n.span = span;
    asg_.nodes.push_back(std::move(n));
    return asg_.nodes.size() - 1;
  }

  const Grammar& g_;
  const std::vector<Token>& tokens_;
  const ValidatedModel& model_;
  Asg asg_;
};

std::vector<TypeId> type_chain(const ValidatedModel& model, TypeId type) {
  std::vector<TypeId> chain;
  for (std::optional<TypeId> t = type; t; t = model.supertype(*t)) chain.push_back(*t);
  return chain;
}

void post_order(const Asg& asg, NodeId id, const std::function<void(NodeId)>& visit) {
  for (NodeId c : asg.children(id)) post_order(asg, c, visit);
  visit(id);
}

}  // namespace

Asg instantiate(const ParseTree& tree, const Grammar& grammar, const std::vector<Token>& tokens,
                const ValidatedModel& model) {
  return Instantiator(grammar, tokens, model).run(tree);
}

std::vector<ConstraintViolation> apply_custom_constraints(const Asg& asg, const ValidatedModel& model,
                                                          const Registry& registry) {
  std::vector<ConstraintViolation> out;
  post_order(asg, asg.root, [&](NodeId id) {
    const AsgNode& n = asg.node(id);
    for (TypeId t : type_chain(model, n.type)) {
      for (const auto& c : model.type(t).constraints.customConstraints) {
        auto it = registry.constraints.find(c);
        if (it == registry.constraints.end()) {
          throw Error(ErrorCode::ConstraintPredicateError, "custom constraint '" + c + "' is not registered", n.span);
        }
        bool ok = false;
        try {
          ok = it->second(asg, n);
        } catch (const std::exception& e) {
          throw Error(ErrorCode::ConstraintPredicateError,
                      "custom constraint '" + c + "' failed on " + n.typeName + ": " + e.what(), n.span);
        }
        if (!ok) out.push_back({id, c});
      }
    }
  });
  return out;
}

namespace {

std::string span_text(Span s) { return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + ")"; }

std::string id_lexeme(const Asg& asg, const ValidatedModel& model, const AsgNode& n) {
  if (n.predefined) return n.lexeme;
  const ElementType& t = model.type(n.type);
  const AsgValue* v = n.member(*t.idMember);
  return asg.node(v->node()).lexeme;
}

}  // namespace

void resolve_references(Asg& asg, const ValidatedModel& model, const std::vector<Predefined>& globals) {
  asg.scopes.clear();
  asg.scopeOf.clear();
  asg.referenceEdges.clear();
  asg.scopes.push_back(Scope{});  // predefined declarations
  for (const auto& p : globals) {
    AsgNode n;
    n.id = asg.nodes.size();
    n.type = model.id_of(p.typeName);
    n.typeName = p.typeName;
    n.lexeme = p.name;
    n.value = p.name;
    n.predefined = true;
    asg.scopes[0].bindings[p.name].push_back(n.id);
    asg.nodes.push_back(std::move(n));
  }
  asg.scopes.push_back(Scope{std::nullopt, 0, {}});  // program globals

  // Pass 1: scopes and declarations.
  std::function<void(NodeId, std::size_t)> declare = [&](NodeId id, std::size_t scope) {
    const AsgNode& n = asg.node(id);
    const ElementType& t = model.type(n.type);
    if (t.idMember) {
      const std::string name = id_lexeme(asg, model, n);
      auto& bound = asg.scopes[scope].bindings[name];
      for (NodeId other : bound) {
        if (asg.node(other).type == n.type) {
          throw Error(ErrorCode::DuplicateDeclaration,
                      "duplicate declaration of " + t.name + " '" + name + "' at " + span_text(n.span) +
                          " (first declared at " + span_text(asg.node(other).span) + ")",
                      n.span);
        }
      }
      bound.push_back(id);
    }
    std::size_t inner = scope;
    if (t.scopeDefining) {
      inner = asg.scopes.size();
      asg.scopes.push_back(Scope{id, scope, {}});
    }
    asg.scopeOf[id] = inner;
    for (NodeId c : asg.children(id)) declare(c, inner);
  };
  declare(asg.root, 1);

  // Pass 2: resolution, innermost scope first.
  for (auto& [id, scope] : asg.scopeOf) {
    AsgNode& n = asg.nodes[id];
    const ElementType& t = model.type(n.type);
    for (auto& [name, v] : n.members) {
      if (v.kind != AsgValue::Kind::reference && v.kind != AsgValue::Kind::referenceList) continue;
      const Member& m = *std::find_if(t.members.begin(), t.members.end(), [&](const Member& x) { return x.name == name; });
      const TypeId target = model.id_of(m.typeName);
      for (auto& r : v.references) {
        r.target = asg.lookup(model, scope, r.lexeme, target);
        if (!r.target) {
          std::vector<std::string> candidates;
          for (std::optional<std::size_t> s = scope; s; s = asg.scopes[*s].parent) {
            auto it = asg.scopes[*s].bindings.find(r.lexeme);
            if (it == asg.scopes[*s].bindings.end()) continue;
            for (NodeId d : it->second) candidates.push_back(asg.node(d).typeName + "@" + span_text(asg.node(d).span));
          }
          std::string msg = "unresolved reference to " + m.typeName + " '" + r.lexeme + "' at " + span_text(r.span);
          if (!candidates.empty()) {
            msg += "; visible declarations of other kinds:";
            for (const auto& c : candidates) msg += " " + c;
          }
          throw UnresolvedReferenceError(r.lexeme, r.span, candidates, msg);
        }
        asg.referenceEdges.push_back(ReferenceEdge{id, name, *r.target});
      }
    }
  }
}

const Asg& EvalContext::asg() const { return evaluator_.asg(); }
const AsgNode& EvalContext::node() const { return evaluator_.asg().node(node_); }
Value EvalContext::eval(NodeId id) const { return evaluator_.eval(id); }

const AsgValue& EvalContext::member(std::string_view name) const {
  const AsgValue* v = node().member(name);
  if (!v) {
    throw Error(ErrorCode::RuntimeEvalError, node().typeName + " has no member '" + std::string(name) + "'",
                node().span);
  }
  return *v;
}

Value EvalContext::eval_member(std::string_view name) const {
  const AsgValue& v = member(name);
  if (v.kind != AsgValue::Kind::node) {
    throw Error(ErrorCode::RuntimeEvalError,
                "member '" + std::string(name) + "' of " + node().typeName + " does not hold a node", node().span);
  }
  return eval(v.node());
}

Value EvalContext::apply(NodeId op, const std::vector<NodeId>& operands) const {
  return evaluator_.eval(op, &operands);
}

Evaluator::Evaluator(const Asg& asg, const ValidatedModel& model, const Callbacks& callbacks)
    : asg_(asg), model_(model), callbacks_(callbacks) {}

const Callback* Evaluator::find(TypeId type) const {
  for (TypeId t : type_chain(model_, type)) {
    auto it = callbacks_.find(model_.type(t).tag());
    if (it != callbacks_.end()) return &it->second;
  }
  return nullptr;
}

void Evaluator::check() const {
  std::function<void(NodeId)> walk = [&](NodeId id) {
    const AsgNode& n = asg_.node(id);
    if (!find(n.type)) {
      throw Error(ErrorCode::MissingCallback,
                  "no callback registered for tag '" + model_.type(n.type).tag() + "' (" + n.typeName + ")", n.span);
    }
    for (NodeId c : asg_.children(id)) walk(c);
  };
  walk(asg_.root);
}

Value Evaluator::eval(NodeId id, const std::vector<NodeId>* operands) {
  const AsgNode& n = asg_.node(id);
  const Callback* cb = find(n.type);
  if (!cb) {
    throw Error(ErrorCode::MissingCallback,
                "no callback registered for tag '" + model_.type(n.type).tag() + "' (" + n.typeName + ")", n.span);
  }
  EvalContext ctx(*this, id, operands);
  return (*cb)(ctx);
}

Value evaluate(const Asg& asg, const ValidatedModel& model, const Callbacks& callbacks) {
  Evaluator ev(asg, model, callbacks);
  ev.check();
  return ev.eval(asg.root);
}

std::string asg_json(const Asg& asg, int indent) {
  using nlohmann::ordered_json;
  auto ref_json = [](const Reference& r) {
    ordered_json j;
    j["ref"] = r.lexeme;
    j["target"] = r.target ? ordered_json(*r.target) : ordered_json(nullptr);
    return j;
  };
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : asg.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["type"] = n.typeName;
    j["span"] = {n.span.start, n.span.end};
    if (!n.value) {
      j["value"] = nullptr;
    } else if (auto i = std::get_if<std::int64_t>(&*n.value)) {
      j["value"] = *i;
    } else if (auto d = std::get_if<double>(&*n.value)) {
      j["value"] = *d;
    } else {
      j["value"] = std::get<std::string>(*n.value);
    }
    ordered_json members = ordered_json::object();
    for (const auto& [name, v] : n.members) {
      switch (v.kind) {
        case AsgValue::Kind::absent: members[name] = nullptr; break;
        case AsgValue::Kind::node: members[name] = v.node(); break;
        case AsgValue::Kind::list: members[name] = v.nodes; break;
        case AsgValue::Kind::reference: members[name] = ref_json(v.reference()); break;
        case AsgValue::Kind::referenceList: {
          ordered_json list = ordered_json::array();
          for (const auto& r : v.references) list.push_back(ref_json(r));
          members[name] = list;
          break;
        }
      }
    }
    j["members"] = members;
    doc["nodes"].push_back(j);
  }
  doc["root"] = asg.root;
  doc["refEdges"] = ordered_json::array();
  for (const auto& e : asg.referenceEdges) {
    ordered_json j;
    j["from"] = e.from;
    j["member"] = e.member;
    j["to"] = e.to;
    doc["refEdges"].push_back(j);
  }
  return doc.dump(indent) + "\n";
}

std::string asg_dot(const Asg& asg) {
  std::ostringstream out;
  out << "digraph asg {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& n : asg.nodes) {
    std::string label = std::to_string(n.id) + ": " + n.typeName;
    if (n.value) label += " = " + literal_text(*n.value);
    out << "  n" << n.id << " [label=\"" << dot_escape(label) << "\"" << (n.predefined ? ", style=dotted" : "")
        << "];\n";
  }
  for (const auto& n : asg.nodes) {
    for (const auto& [name, v] : n.members) {
      if (v.kind != AsgValue::Kind::node && v.kind != AsgValue::Kind::list) continue;
      for (NodeId c : v.nodes) out << "  n" << n.id << " -> n" << c << " [label=\"" << dot_escape(name) << "\"];\n";
    }
  }
  for (const auto& e : asg.referenceEdges) {
    out << "  n" << e.from << " -> n" << e.to << " [style=dashed, label=\"" << dot_escape(e.member) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

std::string fixed_text(const PatternSpec& p) {
  if (p.form == PatternSpec::Form::regularExpression) {
    if (auto lit = Regex(p.expression).literal()) return *lit;
  }
  throw Error(ErrorCode::InvalidModel, "delimiter '" + p.expression + "' has no fixed text to print");
}

std::vector<const Member*> csm_order(const ElementType& t) {
  std::vector<const Member*> slots(t.members.size(), nullptr);
  for (const auto& m : t.members) {
    if (m.position) slots[*m.position] = &m;
  }
  std::size_t next = 0;
  for (const auto& m : t.members) {
    if (m.position) continue;
    while (slots[next]) ++next;
    slots[next] = &m;
  }
  return slots;
}

void print_node(const Asg& asg, const ValidatedModel& model, NodeId id, std::vector<std::string>& out) {
  const AsgNode& n = asg.node(id);
  const ElementType& t = model.type(n.type);
  if (t.kind == ElementKind::basic || n.predefined) {
    out.push_back(n.lexeme);
    return;
  }
  for (const auto& p : t.prefix) out.push_back(fixed_text(p));
  for (const Member* m : csm_order(t)) {
    const AsgValue& v = *n.member(m->name);
    const std::size_t items = v.kind == AsgValue::Kind::list            ? v.nodes.size()
                              : v.kind == AsgValue::Kind::referenceList ? v.references.size()
                                                                        : (v.present() ? 1 : 0);
    if (m->optional && items == 0) continue;
    for (const auto& p : m->prefix) out.push_back(fixed_text(p));
    for (std::size_t i = 0; i < items; ++i) {
      if (i > 0 && m->separator) out.push_back(fixed_text(*m->separator));
      if (v.kind == AsgValue::Kind::reference || v.kind == AsgValue::Kind::referenceList) {
        out.push_back(v.references[i].lexeme);
      } else {
        print_node(asg, model, v.nodes[i], out);
      }
    }
    for (const auto& p : m->suffix) out.push_back(fixed_text(p));
  }
  for (const auto& p : t.suffix) out.push_back(fixed_text(p));
}

}  // namespace

std::string pretty_print(const Asg& asg, const ValidatedModel& model, NodeId id) {
  std::vector<std::string> parts;
  print_node(asg, model, id, parts);
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

std::string pretty_print(const Asg& asg, const ValidatedModel& model) { return pretty_print(asg, model, asg.root); }

std::string asg_shape(const Asg& asg, NodeId id) {
  const AsgNode& n = asg.node(id);
  if (n.members.empty() && !n.lexeme.empty()) return n.typeName + "'" + n.lexeme + "'";
  std::string out = n.typeName + "{";
  bool first = true;
  for (const auto& [name, v] : n.members) {
    if (!first) out += ";";
    first = false;
    out += name + "=";
    switch (v.kind) {
      case AsgValue::Kind::absent: out += "-"; break;
      case AsgValue::Kind::node: out += asg_shape(asg, v.node()); break;
      case AsgValue::Kind::list:
        out += "[";
        for (std::size_t i = 0; i < v.nodes.size(); ++i) out += (i ? "," : "") + asg_shape(asg, v.nodes[i]);
        out += "]";
        break;
      case AsgValue::Kind::reference: out += "&" + v.reference().lexeme; break;
      case AsgValue::Kind::referenceList:
        out += "[";
        for (std::size_t i = 0; i < v.references.size(); ++i) out += (i ? ",&" : "&") + v.references[i].lexeme;
        out += "]";
        break;
    }
  }
  return out + "}";
}

std::string asg_shape(const Asg& asg) { return asg_shape(asg, asg.root); }

Parser::Parser(ValidatedModel model, Registry registry, LexOptions lex, std::vector<Predefined> globals)
    : model_(std::move(model)), registry_(std::move(registry)), globals_(std::move(globals)) {
  for (TypeId t = 0; t < model_.size(); ++t) {
    for (const auto& c : model_.type(t).constraints.customConstraints) {
      if (!registry_.has_constraint(c)) {
        throw Error(ErrorCode::InvalidModel,
                    "custom constraint '" + c + "' of '" + model_.type(t).name + "' is not registered");
      }
    }
  }
  grammar_ = std::make_shared<const Grammar>(generate_grammar(model_));
  lexicon_ = compile_lexicon(model_, *grammar_, &registry_, lex);
}

TokenGraph Parser::tokenize(std::string_view input) const { return mcc::tokenize(lexicon_, input); }

ParseForest Parser::forest(std::string_view input, bool prune) const {
  ParseForest f = mcc::parse(*grammar_, tokenize(input));
  return prune ? prune_constraints(f, model_) : f;
}

std::uint64_t Parser::count(std::string_view input, bool prune, std::uint64_t cap) const {
  try {
    return count_trees(forest(input, prune), cap);
  } catch (const LexicalError&) {
    return 0;
  } catch (const ParseError&) {
    return 0;
  }
}

std::vector<Asg> Parser::parse_all(std::string_view input) const {
  ParseForest f = forest(input, true);
  if (f.empty()) {
    throw ParseError(0, {}, "every parse of the input violates the model's evaluation-order constraints");
  }
  std::vector<Asg> out;
  std::exception_ptr first_error;
  std::size_t rejected = 0;
  for (const auto& tree : enumerate_trees(f, kMaxTrees)) {
    Asg asg = instantiate(tree, *grammar_, f.tokens(), model_);
    if (!apply_custom_constraints(asg, model_, registry_).empty()) {
      ++rejected;
      continue;
    }
    try {
      resolve_references(asg, model_, globals_);
    } catch (const Error&) {
      if (!first_error) first_error = std::current_exception();
      continue;
    }
    out.push_back(std::move(asg));
  }
  if (out.empty()) {
    if (first_error) std::rethrow_exception(first_error);
    throw Error(ErrorCode::ParseError,
                "all " + std::to_string(rejected) + " candidate parses were rejected by custom constraints");
  }
  return out;
}

namespace {

// First preorder position where two trees disagree on type or span.
std::string first_difference(const Asg& a, NodeId x, const Asg& b, NodeId y) {
  const AsgNode& m = a.node(x);
  const AsgNode& n = b.node(y);
  auto describe = [](const AsgNode& k) { return k.typeName + " " + span_text(k.span); };
  if (m.typeName != n.typeName || !(m.span == n.span)) return describe(m) + " vs " + describe(n);
  auto cx = a.children(x);
  auto cy = b.children(y);
  for (std::size_t i = 0; i < std::min(cx.size(), cy.size()); ++i) {
    auto d = first_difference(a, cx[i], b, cy[i]);
    if (!d.empty()) return d;
  }
  if (cx.size() != cy.size()) return describe(m) + " with " + std::to_string(cx.size()) + " vs " +
                                     std::to_string(cy.size()) + " children";
  return "";
}

}  // namespace

Asg Parser::parse(std::string_view input) const {
  std::vector<Asg> all = parse_all(input);
  if (all.size() > 1) {
    const std::uint64_t total = count(input, true);
    throw Error(ErrorCode::AmbiguousParse,
                "ambiguous input: " + std::to_string(total) + " parses survive the constraints; first two differ at " +
                    first_difference(all[0], all[0].root, all[1], all[1].root));
  }
  return std::move(all.front());
}

}  // namespace mcc
