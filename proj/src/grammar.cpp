#include "mcc/grammar.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mcc/regex.hpp"

namespace mcc {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::composition: return "composition";
    case Origin::selection: return "selection";
    case Origin::repetitionRecursive: return "repetition-recursive";
    case Origin::repetitionBase: return "repetition-base";
    case Origin::optionalEpsilon: return "optional-epsilon";
    case Origin::optionalPresent: return "optional-present";
    case Origin::delimiter: return "delimiter";
    case Origin::permutation: return "permutation";
  }
  return "?";
}

std::vector<SymbolId> Grammar::nonterminals() const {
  std::vector<SymbolId> out;
  for (SymbolId i = 0; i < symbols_.size(); ++i) {
    if (!symbols_[i].terminal) out.push_back(i);
  }
  return out;
}

std::vector<SymbolId> Grammar::terminals() const {
  std::vector<SymbolId> out;
  for (SymbolId i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].terminal) out.push_back(i);
  }
  return out;
}

std::optional<SymbolId> Grammar::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Grammar::check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidModel, "malformed grammar: " + what); };
  if (start_ >= symbols_.size() || symbols_[start_].terminal) fail("start symbol is not a nonterminal");
  for (const auto& p : productions_) {
    if (p.lhs >= symbols_.size() || symbols_[p.lhs].terminal) fail("production with a terminal left-hand side");
    for (SymbolId s : p.rhs) {
      if (s >= symbols_.size()) fail("production refers to an unknown symbol");
    }
    if ((p.origin == Origin::optionalEpsilon) != p.rhs.empty()) fail("epsilon production origin mismatch");
    for (const auto& [index, name] : p.memberBindings) {
      if (index >= p.rhs.size()) fail("member binding out of range");
    }
  }
}

GrammarBuilder::GrammarBuilder(const ValidatedModel& model) : model_(model) {}

SymbolId GrammarBuilder::nonterminal(const std::string& name) {
  if (auto it = g_.index_.find(name); it != g_.index_.end()) return it->second;
  SymbolId id = g_.symbols_.size();
  g_.symbols_.push_back(Symbol{name, false, std::nullopt, std::nullopt});
  g_.index_.emplace(name, id);
  return id;
}

SymbolId GrammarBuilder::element_symbol(TypeId type) {
  if (auto it = g_.element_symbols_.find(type); it != g_.element_symbols_.end()) return it->second;
  const ElementType& t = model_.type(type);
  SymbolId id = g_.symbols_.size();
  if (g_.index_.count(t.name)) {
    throw Error(ErrorCode::NameCollision, "symbol '" + t.name + "' is already defined");
  }
  Symbol s{t.name, t.kind == ElementKind::basic, type, std::nullopt};
  if (t.kind == ElementKind::basic) s.pattern = t.pattern;
  g_.symbols_.push_back(std::move(s));
  g_.index_.emplace(t.name, id);
  g_.element_symbols_.emplace(type, id);
  return id;
}

SymbolId GrammarBuilder::delimiter(const PatternSpec& pattern) {
  const std::string key =
      (pattern.form == PatternSpec::Form::customMatcher ? "@" : "/") + pattern.expression;
  if (auto it = delimiters_.find(key); it != delimiters_.end()) {
    auto& existing = g_.symbols_[it->second].pattern->precedence;
    if (pattern.precedence && (!existing || *pattern.precedence < *existing)) existing = pattern.precedence;
    return it->second;
  }
  SymbolId id = g_.symbols_.size();
  PatternSpec spec = pattern;
  // Delimiters behave like keywords: they win exact-span conflicts against
  // basic tokens that declare a precedence.
  if (!spec.precedence) spec.precedence = 0;
  g_.symbols_.push_back(Symbol{"\"" + key + "\"", true, std::nullopt, spec});
  g_.index_.emplace(g_.symbols_.back().name, id);
  delimiters_.emplace(key, id);
  return id;
}

ProductionId GrammarBuilder::add(Production p) {
  g_.productions_.push_back(std::move(p));
  return g_.productions_.size() - 1;
}

std::vector<SymbolId> GrammarBuilder::delimiter_wrap(const std::vector<PatternSpec>& prefix, std::vector<SymbolId> core,
                                                     const std::vector<PatternSpec>& suffix) {
  std::vector<SymbolId> out;
  out.reserve(prefix.size() + core.size() + suffix.size());
  for (const auto& p : prefix) out.push_back(delimiter(p));
  out.insert(out.end(), core.begin(), core.end());
  for (const auto& s : suffix) out.push_back(delimiter(s));
  return out;
}

std::vector<Production> GrammarBuilder::repetition_productions(SymbolId list, SymbolId element,
                                                               std::optional<SymbolId> separator, std::size_t min,
                                                               std::size_t max) const {
  auto run = [&](std::size_t count) {
    std::vector<SymbolId> rhs;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0 && separator) rhs.push_back(*separator);
      rhs.push_back(element);
    }
    return rhs;
  };
  std::vector<Production> out;
  if (max == kUnbounded) {
    if (min == 0) {
      throw Error(ErrorCode::MultiplicityError, "unbounded lists with no minimum need an optional wrapper");
    }
    Production recursive{list, {element}, Origin::repetitionRecursive, std::nullopt, {}};
    if (separator) recursive.rhs.push_back(*separator);
    recursive.rhs.push_back(list);
    out.push_back(std::move(recursive));
    out.push_back(Production{list, run(min), Origin::repetitionBase, std::nullopt, {}});
    return out;
  }
  if (max > kMaxBoundedExpansion) {
    throw Error(ErrorCode::BoundedExpansionLimit,
                "bounded multiplicity up to " + std::to_string(max) + " exceeds the expansion limit of " +
                    std::to_string(kMaxBoundedExpansion));
  }
  for (std::size_t k = std::max<std::size_t>(min, 1); k <= max; ++k) {
    out.push_back(Production{list, run(k), Origin::repetitionBase, std::nullopt, {}});
  }
  if (min == 0) out.push_back(Production{list, {}, Origin::optionalEpsilon, std::nullopt, {}});
  return out;
}

SymbolId GrammarBuilder::repetition(const Member& member, SymbolId element) {
  std::size_t min = member.multiplicity.min;
  const std::size_t max = member.multiplicity.max;
  const bool delimited = !member.prefix.empty() || !member.suffix.empty();
  if (member.optional) min = delimited ? std::max<std::size_t>(min, 1) : 0;

  std::optional<SymbolId> separator;
  if (member.separator) separator = delimiter(*member.separator);

  auto list_symbol = [&](std::size_t lo, std::size_t hi) {
    std::string key = g_.symbols_[element].name + "|" + (separator ? g_.symbols_[*separator].name : "") + "|" +
                      std::to_string(lo) + "|" + std::to_string(hi);
    if (auto it = lists_.find(key); it != lists_.end()) return it->second;
    const std::string base = g_.symbols_[element].name + "List";
    std::size_t n = ++list_names_[base];
    std::string name = n == 1 ? base : base + std::to_string(n);
    if (g_.index_.count(name)) {
      throw Error(ErrorCode::NameCollision, "generated list symbol '" + name + "' collides with an existing symbol");
    }
    SymbolId list = nonterminal(name);
    lists_.emplace(key, list);
    for (auto& p : repetition_productions(list, element, separator, lo, hi)) add(std::move(p));
    return list;
  };

  if (max == kUnbounded && min == 0) {
    SymbolId inner = list_symbol(1, kUnbounded);
    const std::string name = "Opt_" + g_.symbols_[inner].name;
    if (auto existing = g_.index_.find(name); existing != g_.index_.end()) return existing->second;
    SymbolId opt = nonterminal(name);
    add(Production{opt, {inner}, Origin::optionalPresent, std::nullopt, {}});
    add(Production{opt, {}, Origin::optionalEpsilon, std::nullopt, {}});
    return opt;
  }
  return list_symbol(min, max);
}

std::vector<Production> GrammarBuilder::permutation_productions(TypeId composite, SymbolId lhs,
                                                                const std::vector<std::vector<SymbolId>>& fragments,
                                                                const std::vector<std::string>& names,
                                                                const std::vector<SymbolId>& prefix,
                                                                const std::vector<SymbolId>& suffix) const {
  if (fragments.size() > kMaxFreeOrderMembers) {
    throw Error(ErrorCode::PermutationLimitExceeded,
                "free-order element '" + model_.type(composite).name + "' has " + std::to_string(fragments.size()) +
                    " members; at most " + std::to_string(kMaxFreeOrderMembers) + " are supported");
  }
  std::vector<std::size_t> order(fragments.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Production> out;
  do {
    Production p{lhs, prefix, Origin::permutation, composite, {}};
    for (std::size_t idx : order) {
      // The bound symbol of a fragment is its only non-delimiter symbol.
      const auto& frag = fragments[idx];
      std::size_t bound = p.rhs.size();
      for (std::size_t j = 0; j < frag.size(); ++j) {
        if (!g_.symbols_[frag[j]].terminal || g_.symbols_[frag[j]].element) bound = p.rhs.size() + j;
      }
      p.rhs.insert(p.rhs.end(), frag.begin(), frag.end());
      p.memberBindings.emplace(bound, names[idx]);
    }
    p.rhs.insert(p.rhs.end(), suffix.begin(), suffix.end());
    out.push_back(std::move(p));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

Grammar GrammarBuilder::finish(SymbolId start) {
  g_.start_ = start;
  g_.by_lhs_.assign(g_.symbols_.size(), {});
  for (ProductionId i = 0; i < g_.productions_.size(); ++i) g_.by_lhs_[g_.productions_[i].lhs].push_back(i);
  g_.nullable_.assign(g_.symbols_.size(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : g_.productions_) {
      if (g_.nullable_[p.lhs]) continue;
      if (std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId s) { return g_.nullable_[s]; })) {
        g_.nullable_[p.lhs] = true;
        changed = true;
      }
    }
  }
  g_.check();
  return std::move(g_);
}

namespace {

// Members in right-hand-side order: explicitly positioned members take their
// slot, the rest fill the gaps in declaration order.
std::vector<const Member*> ordered_members(const ElementType& t) {
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

}  // namespace

Grammar generate_grammar(const ValidatedModel& model) {
  GrammarBuilder b(model);
  for (TypeId t = 0; t < model.size(); ++t) b.element_symbol(t);

  for (TypeId t = 0; t < model.size(); ++t) {
    const ElementType& type = model.type(t);
    const SymbolId lhs = b.element_symbol(t);
    if (type.kind == ElementKind::abstract) {
      for (TypeId sub : model.subtypes(t)) {
        b.add(Production{lhs, {b.element_symbol(sub)}, Origin::selection, t, {}});
      }
      continue;
    }
    if (type.kind != ElementKind::composite) continue;

    std::vector<std::vector<SymbolId>> fragments;
    std::vector<std::size_t> bound_in_fragment;
    std::vector<std::string> names;
    for (const Member* m : ordered_members(type)) {
      TypeId mt = model.id_of(m->typeName);
      SymbolId core;
      if (m->isReference) {
        const ElementType& target = model.type(mt);
        const auto& id_member = *std::find_if(target.members.begin(), target.members.end(),
                                              [&](const Member& x) { return x.name == *target.idMember; });
        core = b.element_symbol(model.id_of(id_member.typeName));
      } else {
        core = b.element_symbol(mt);
      }
      const bool repeatable = m->multiplicity.repeatable();
      if (repeatable) core = b.repetition(*m, core);

      std::vector<SymbolId> frag = b.delimiter_wrap(m->prefix, {core}, m->suffix);
      std::size_t bound = m->prefix.size();
      const bool delimited = !m->prefix.empty() || !m->suffix.empty();
      const bool wrap = repeatable ? (m->optional && delimited) : (m->optional || m->multiplicity.min == 0);
      if (wrap) {
        SymbolId opt = b.nonterminal("Opt_" + type.name + "_" + m->name);
        b.add(Production{opt, frag, Origin::optionalPresent, t, {{bound, m->name}}});
        b.add(Production{opt, {}, Origin::optionalEpsilon, t, {}});
        frag = {opt};
        bound = 0;
      }
      fragments.push_back(std::move(frag));
      bound_in_fragment.push_back(bound);
      names.push_back(m->name);
    }

    std::vector<SymbolId> prefix = b.delimiter_wrap(type.prefix, {}, {});
    std::vector<SymbolId> suffix = b.delimiter_wrap({}, {}, type.suffix);
    if (type.constraints.freeOrder) {
      for (auto& p : b.permutation_productions(t, lhs, fragments, names, prefix, suffix)) b.add(std::move(p));
    } else {
      Production p{lhs, prefix, Origin::composition, t, {}};
      for (std::size_t i = 0; i < fragments.size(); ++i) {
        p.memberBindings.emplace(p.rhs.size() + bound_in_fragment[i], names[i]);
        p.rhs.insert(p.rhs.end(), fragments[i].begin(), fragments[i].end());
      }
      p.rhs.insert(p.rhs.end(), suffix.begin(), suffix.end());
      b.add(std::move(p));
    }
  }
  return b.finish(b.element_symbol(model.start()));
}

std::string display(const Grammar& grammar, SymbolId id) {
  const Symbol& s = grammar.symbol(id);
  if (!s.terminal || s.element) return "<" + s.name + ">";
  const PatternSpec& p = *s.pattern;
  if (p.form == PatternSpec::Form::customMatcher) return "@" + p.expression;
  if (auto lit = Regex(p.expression).literal()) {
    std::string out = "'";
    for (char c : *lit) {
      if (c == '\'' || c == '\\') out += '\\';
      out += c;
    }
    return out + "'";
  }
  return "/" + p.expression + "/";
}

std::string print_grammar(const Grammar& grammar, const ValidatedModel& model) {
  std::ostringstream out;
  std::vector<SymbolId> order;
  std::set<SymbolId> seen;
  for (const auto& p : grammar.productions()) {
    if (seen.insert(p.lhs).second) order.push_back(p.lhs);
  }
  for (SymbolId lhs : order) {
    out << display(grammar, lhs) << " ::=";
    bool first = true;
    for (ProductionId pid : grammar.productions_of(lhs)) {
      const Production& p = grammar.production(pid);
      out << (first ? " " : " | ");
      first = false;
      if (p.rhs.empty()) {
        out << "\xCE\xB5";  // epsilon
        continue;
      }
      for (std::size_t i = 0; i < p.rhs.size(); ++i) {
        if (i) out << ' ';
        out << display(grammar, p.rhs[i]);
      }
    }
    out << '\n';
  }

  out << '\n';
  for (SymbolId id : grammar.terminals()) {
    const Symbol& s = grammar.symbol(id);
    if (!s.element) continue;
    const PatternSpec& p = *s.pattern;
    out << "<" << s.name << "> ~ ";
    if (p.form == PatternSpec::Form::customMatcher) out << "@" << p.expression;
    else out << "/" << p.expression << "/";
    out << '\n';
  }
  for (const auto& p : model.model().ignorePatterns) {
    out << "ignore ~ " << (p.form == PatternSpec::Form::customMatcher ? "@" + p.expression : "/" + p.expression + "/")
        << '\n';
  }
  return out.str();
}

}  // namespace mcc
