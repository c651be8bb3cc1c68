#include "mcc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "mcc/languages.hpp"
#include "mcc/model_file.hpp"

namespace mcc {

// ---- Reference parser -------------------------------------------------------

namespace {

constexpr std::size_t kInfinite = std::numeric_limits<std::size_t>::max() / 4;

class Oracle {
 public:
  Oracle(const Grammar& g, const std::vector<Token>& tokens, std::size_t max_trees)
      : g_(g), tokens_(tokens), max_(max_trees), min_len_(g.symbols().size(), kInfinite) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (slots_.empty() || tokens[slots_.back().front()].start != tokens[i].start ||
          tokens[slots_.back().front()].end != tokens[i].end) {
        slots_.emplace_back();
      }
      slots_.back().push_back(i);
    }
    for (SymbolId s = 0; s < g.symbols().size(); ++s) {
      if (g.symbol(s).terminal) min_len_[s] = 1;
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (const Production& p : g.productions()) {
        std::size_t sum = 0;
        for (SymbolId x : p.rhs) sum = std::min(kInfinite, sum + min_len_[x]);
        if (sum < min_len_[p.lhs]) {
          min_len_[p.lhs] = sum;
          changed = true;
        }
      }
    }
  }

  std::vector<ParseTree> run() { return derive(g_.start(), 0, slots_.size(), {}); }

 private:
  using Key = std::tuple<SymbolId, std::size_t, std::size_t, std::vector<SymbolId>>;

  const Token& first(std::size_t slot) const { return tokens_[slots_[slot].front()]; }

  Span span(std::size_t from, std::size_t to) const {
    if (from < to) return {first(from).start, first(to - 1).end};
    std::size_t at = from < slots_.size() ? first(from).start : (tokens_.empty() ? 0 : tokens_.back().end);
    return {at, at};
  }

  // `above` holds the symbols of the ancestors that share the extent [from, to).
  const std::vector<ParseTree>& derive(SymbolId symbol, std::size_t from, std::size_t to,
                                       const std::vector<SymbolId>& above) {
    Key key{symbol, from, to, above};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<ParseTree> result;
    if (g_.symbol(symbol).terminal) {
      if (to == from + 1) {
        for (std::size_t i : slots_[from]) {
          if (tokens_[i].symbol == symbol) {
            result.push_back(ParseTree{symbol, std::nullopt, i, {tokens_[i].start, tokens_[i].end}, {}});
          }
        }
      }
    } else if (!std::binary_search(above.begin(), above.end(), symbol)) {
      std::vector<SymbolId> chain = above;
      chain.insert(std::upper_bound(chain.begin(), chain.end(), symbol), symbol);
      for (ProductionId p : g_.productions_of(symbol)) {
        std::vector<ParseTree> children;
        split(symbol, p, 0, from, from, to, chain, children, result);
      }
    }
    return memo_.emplace(std::move(key), std::move(result)).first->second;
  }

  void split(SymbolId symbol, ProductionId p, std::size_t i, std::size_t pos, std::size_t from, std::size_t to,
             const std::vector<SymbolId>& chain, std::vector<ParseTree>& children, std::vector<ParseTree>& out) {
    const auto& rhs = g_.production(p).rhs;
    if (i == rhs.size()) {
      if (pos != to) return;
      out.push_back(ParseTree{symbol, p, std::nullopt, span(from, to), children});
      if (out.size() > max_ || ++stored_ > 4 * max_) {
        throw Error(ErrorCode::OracleBoundExceeded, "more than " + std::to_string(max_) + " trees");
      }
      return;
    }
    std::size_t rest = 0;
    for (std::size_t k = i + 1; k < rhs.size(); ++k) rest = std::min(kInfinite, rest + min_len_[rhs[k]]);
    if (rest > to - pos) return;
    for (std::size_t end = pos + std::min(min_len_[rhs[i]], to - pos); end + rest <= to; ++end) {
      const bool same = pos == from && end == to;
      const auto& options = derive(rhs[i], pos, end, same ? chain : std::vector<SymbolId>{});
      for (const ParseTree& option : options) {
        children.push_back(option);
        split(symbol, p, i + 1, end, from, to, chain, children, out);
        children.pop_back();
      }
    }
  }

  const Grammar& g_;
  const std::vector<Token>& tokens_;
  std::size_t max_;
  std::size_t stored_ = 0;
  std::vector<std::size_t> min_len_;
  std::vector<std::vector<std::size_t>> slots_;  // token indices sharing one span, in input order
  std::map<Key, std::vector<ParseTree>> memo_;
};

// What the constraint rules need to know about a subtree.
struct Facts {
  std::optional<unsigned> priority;
  std::optional<TypeId> group;
  bool composite = false;
  std::set<TypeId> trailingAbsent;
  std::set<TypeId> trailingPresent;
  std::size_t end = 0;  // token index after the subtree
};

class ConstraintCheck {
 public:
  ConstraintCheck(const Grammar& g, const ValidatedModel& m) : g_(g), m_(m) {}

  std::optional<Facts> facts(const ParseTree& t, std::size_t start) {
    if (t.token) {
      Facts f;
      f.end = start + 1;
      if (auto type = g_.symbol(t.symbol).element) {
        f.priority = m_.type(*type).constraints.priority;
        f.group = m_.associativity_owner(*type);
      }
      return f;
    }
    std::vector<Facts> kids;
    std::vector<std::size_t> starts;
    std::size_t pos = start;
    for (const ParseTree& c : t.children) {
      starts.push_back(pos);
      auto f = facts(c, pos);
      if (!f) return std::nullopt;
      pos = f->end;
      kids.push_back(std::move(*f));
    }
    const Production& p = g_.production(*t.production);
    Facts out;
    out.end = pos;
    auto collect_trailing = [&] {
      for (const Facts& k : kids) {
        if (k.end != out.end) continue;
        out.trailingAbsent.insert(k.trailingAbsent.begin(), k.trailingAbsent.end());
        out.trailingPresent.insert(k.trailingPresent.begin(), k.trailingPresent.end());
      }
    };

    if (p.origin == Origin::selection) return kids.front();
    if (p.origin == Origin::optionalPresent) {
      if (p.memberBindings.empty()) return kids.front();
      const Facts& inner = kids[p.memberBindings.begin()->first];
      out.priority = inner.priority;
      out.group = inner.group;
      out.composite = inner.composite;
      collect_trailing();
      return out;
    }
    const bool composite_production = p.origin == Origin::composition || p.origin == Origin::permutation;
    if (!composite_production || !p.elementType || m_.type(*p.elementType).kind != ElementKind::composite) {
      collect_trailing();
      return out;
    }

    const TypeId type = *p.elementType;
    const ElementType& et = m_.type(type);
    std::vector<std::size_t> members;  // rhs positions of bound children
    std::optional<std::size_t> op;
    const auto slot = m_.priority_slot(type);
    for (const auto& [index, name] : p.memberBindings) {
      members.push_back(index);
      if (slot && et.members[*slot].name == name) op = index;
    }

    out.composite = true;
    out.priority = et.constraints.priority ? et.constraints.priority : (op ? kids[*op].priority : std::nullopt);
    out.group = m_.associativity_owner(type);
    if (!out.group && op) out.group = kids[*op].group;

    // A nested operand of the same operator family and level on the side the
    // associativity forbids.
    if (out.group && !members.empty()) {
      auto clashes = [&](const Facts& k) {
        return k.composite && k.group == out.group && k.priority == out.priority;
      };
      switch (m_.type(*out.group).constraints.associativity) {
        case Associativity::leftToRight:
          if (clashes(kids[members.back()])) return std::nullopt;
          break;
        case Associativity::rightToLeft:
          if (clashes(kids[members.front()])) return std::nullopt;
          break;
        case Associativity::nonAssociative:
          if (clashes(kids[members.back()]) || clashes(kids[members.front()])) return std::nullopt;
          break;
        case Associativity::none:
          break;
      }
    }
    // Operands may not bind more loosely than the node itself.
    if (out.priority) {
      for (std::size_t index : members) {
        if (op && index == *op) continue;
        const Facts& k = kids[index];
        if (k.composite && k.priority && *k.priority > *out.priority) return std::nullopt;
      }
    }

    collect_trailing();
    if (auto owner = m_.composition_owner(type)) {
      const std::size_t last = p.rhs.size() - 1;
      if (!p.rhs.empty() && p.memberBindings.count(last) && derives_empty(p.rhs[last])) {
        const bool present = kids[last].end != starts[last];
        const Composition mode = m_.type(*owner).constraints.composition;
        if (members.size() >= 2) {
          const Facts& before = kids[members[members.size() - 2]];
          if (mode == Composition::eager && present && before.trailingAbsent.count(*owner)) return std::nullopt;
          if (mode == Composition::lazy && !present && before.trailingPresent.count(*owner)) return std::nullopt;
        }
        (present ? out.trailingPresent : out.trailingAbsent).insert(*owner);
      }
    }
    return out;
  }

 private:
  bool derives_empty(SymbolId s) {
    if (auto it = empty_.find(s); it != empty_.end()) return it->second;
    empty_[s] = false;  // provisional, breaks cycles
    bool result = false;
    if (!g_.symbol(s).terminal) {
      for (ProductionId p : g_.productions_of(s)) {
        bool all = true;
        for (SymbolId x : g_.production(p).rhs) all = all && derives_empty(x);
        result = result || all;
      }
    }
    return empty_[s] = result;
  }

  const Grammar& g_;
  const ValidatedModel& m_;
  std::map<SymbolId, bool> empty_;
};

}  // namespace

std::vector<ParseTree> oracle_parse(const Grammar& grammar, const std::vector<Token>& tokens, std::size_t max_trees) {
  std::size_t positions = tokens.empty() ? 0 : 1;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const Token& a = tokens[i - 1];
    const Token& b = tokens[i];
    if (a.start == b.start && a.end == b.end) continue;
    if (b.start < a.end) {
      throw Error(ErrorCode::OracleBoundExceeded, "reference parser needs a linear token sequence");
    }
    ++positions;
  }
  if (positions > kOracleMaxTokens) {
    throw Error(ErrorCode::OracleBoundExceeded, "reference parser limited to " + std::to_string(kOracleMaxTokens) +
                                                    " tokens, got " + std::to_string(positions));
  }
  return Oracle(grammar, tokens, max_trees).run();
}

bool oracle_satisfies(const ParseTree& tree, const Grammar& grammar, const ValidatedModel& model) {
  return ConstraintCheck(grammar, model).facts(tree, 0).has_value();
}

std::vector<ParseTree> oracle_filter(const std::vector<ParseTree>& trees, const Grammar& grammar,
                                     const ValidatedModel& model) {
  std::vector<ParseTree> out;
  for (const ParseTree& t : trees) {
    if (oracle_satisfies(t, grammar, model)) out.push_back(t);
  }
  return out;
}

std::string tree_key(const ParseTree& tree) {
  if (tree.token) return "#" + std::to_string(*tree.token);
  std::string s = "p" + std::to_string(tree.production.value_or(0)) + "(";
  for (std::size_t i = 0; i < tree.children.size(); ++i) {
    if (i) s += ",";
    s += tree_key(tree.children[i]);
  }
  return s + ")";
}

// ---- Random models and inputs ----------------------------------------------

namespace {

struct Pool {
  std::vector<std::string> letters{"a", "b", "c", "d", "e", "f", "g", "h"};
  std::vector<std::string> separators{",", ";"};
  std::vector<std::string> openers{"\\(", "\\[", "<"};
  std::vector<std::string> closers{"\\)", "\\]", ">"};
};

bool productive(const ValidatedModel& model) {
  Grammar g = generate_grammar(model);
  std::vector<bool> ok(g.symbols().size(), false);
  for (SymbolId s = 0; s < ok.size(); ++s) ok[s] = g.symbol(s).terminal;
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      if (ok[p.lhs]) continue;
      if (std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId x) { return ok[x]; })) {
        ok[p.lhs] = true;
        changed = true;
      }
    }
  }
  return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

Model random_candidate(std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto chance = [&](unsigned percent) { return rng() % 100 < percent; };
  const Pool pool;

  const std::size_t n = 2 + pick(5);
  std::vector<ElementKind> kinds(n);
  kinds[0] = chance(50) ? ElementKind::abstract : ElementKind::composite;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto roll = pick(100);
    kinds[i] = roll < 40 ? ElementKind::basic : roll < 80 ? ElementKind::composite : ElementKind::abstract;
  }
  kinds[n - 1] = ElementKind::basic;

  Model model;
  model.name = "Random";
  model.startType = "T0";
  model.ignorePatterns.push_back(PatternSpec::regex("\\s+"));
  std::size_t letter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ElementType t;
    t.name = "T" + std::to_string(i);
    t.kind = kinds[i];
    std::vector<std::size_t> abstracts;
    for (std::size_t j = 0; j < i; ++j) {
      if (kinds[j] == ElementKind::abstract) abstracts.push_back(j);
    }
    if (!abstracts.empty() && chance(65)) t.supertype = "T" + std::to_string(abstracts[pick(abstracts.size())]);
    switch (t.kind) {
      case ElementKind::basic:
        t.pattern = PatternSpec::regex(pool.letters[letter++]);
        if (chance(45)) t.constraints.priority = static_cast<unsigned>(pick(3));
        break;
      case ElementKind::abstract:
        if (chance(40)) {
          const Associativity kinds3[] = {Associativity::leftToRight, Associativity::rightToLeft,
                                          Associativity::nonAssociative};
          t.constraints.associativity = kinds3[pick(3)];
        }
        break;
      case ElementKind::composite: {
        const std::size_t members = 1 + pick(3);
        for (std::size_t k = 0; k < members; ++k) {
          Member m;
          m.name = "m" + std::to_string(k);
          m.typeName = "T" + std::to_string(pick(n));
          const auto roll = pick(100);
          if (roll < 15) {
            m.optional = true;
          } else if (roll < 35) {
            m.multiplicity = {pick(2), kUnbounded};
            if (chance(50)) m.separator = PatternSpec::regex(pool.separators[pick(pool.separators.size())]);
          }
          if (chance(12)) m.prefix.push_back(PatternSpec::regex(pool.openers[pick(pool.openers.size())]));
          t.members.push_back(std::move(m));
        }
        if (chance(25)) {
          const std::size_t d = pick(pool.openers.size());
          t.prefix.push_back(PatternSpec::regex(pool.openers[d]));
          if (chance(60)) t.suffix.push_back(PatternSpec::regex(pool.closers[d]));
        }
        const Member& last = t.members.back();
        if (t.suffix.empty() && (last.optional || last.multiplicity.min == 0) && chance(50)) {
          t.constraints.composition = chance(50) ? Composition::eager : Composition::lazy;
        }
        if (chance(10)) t.constraints.priority = static_cast<unsigned>(pick(3));
        if (chance(10)) {
          t.constraints.associativity = chance(50) ? Associativity::leftToRight : Associativity::rightToLeft;
        }
        break;
      }
    }
    model.elements.push_back(std::move(t));
  }
  return model;
}

// Operator-expression shape: a binary composite over an abstract expression,
// an operator family, literals, and either a second operator or a construct
// with a trailing optional part.
Model family_candidate(std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto chance = [&](unsigned percent) { return rng() % 100 < percent; };
  const Associativity assoc[] = {Associativity::none, Associativity::leftToRight, Associativity::rightToLeft,
                                 Associativity::nonAssociative};

  Model model;
  model.name = "Random";
  model.startType = "T0";
  model.ignorePatterns.push_back(PatternSpec::regex("\\s+"));
  auto add = [&](std::string name, ElementKind kind, std::optional<std::string> super) -> ElementType& {
    ElementType t;
    t.name = std::move(name);
    t.kind = kind;
    t.supertype = std::move(super);
    model.elements.push_back(std::move(t));
    return model.elements.back();
  };
  add("T0", ElementKind::abstract, std::nullopt);
  {
    ElementType& bin = add("T1", ElementKind::composite, "T0");
    bin.members = {member("m0", "T0"), member("m1", "T2"), member("m2", "T0")};
  }
  add("T2", ElementKind::abstract, std::nullopt).constraints.associativity = assoc[pick(4)];
  {
    ElementType& op = add("T3", ElementKind::basic, "T2");
    op.pattern = PatternSpec::regex("a");
    op.constraints.priority = static_cast<unsigned>(pick(3));
  }
  add("T4", ElementKind::basic, "T0").pattern = PatternSpec::regex("b");
  if (chance(50)) {
    ElementType& op = add("T5", ElementKind::basic, "T2");
    op.pattern = PatternSpec::regex("c");
    if (chance(85)) op.constraints.priority = static_cast<unsigned>(pick(3));
  } else {
    ElementType& cond = add("T5", ElementKind::composite, "T0");
    cond.prefix.push_back(PatternSpec::regex("<"));
    Member tail = member("m2", "T0");
    tail.optional = true;
    tail.prefix.push_back(PatternSpec::regex(":"));
    cond.members = {member("m0", "T0"), member("m1", "T0"), tail};
    const Composition modes[] = {Composition::none, Composition::eager, Composition::lazy};
    cond.constraints.composition = modes[pick(3)];
  }
  return model;
}

}  // namespace

Model random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  while (true) {
    Model m = rng() % 2 ? family_candidate(rng) : random_candidate(rng);
    auto v = validate_model(m);
    if (!v.ok()) continue;
    try {
      if (!productive(*v.model)) continue;
      for (TypeId t = 0; t < v.model->size(); ++t) {
        effective_priority(*v.model, t);
        if (v.model->type(t).kind == ElementKind::composite) v.model->priority_slot(t);
      }
    } catch (const Error&) {
      continue;
    }
    return m;
  }
}

std::string sample_text(const PatternSpec& pattern) {
  const std::string& e = pattern.expression;
  if (e.size() == 2 && e[0] == '\\') return e.substr(1);
  return e;
}

SentenceGenerator::SentenceGenerator(const Grammar& grammar, std::uint64_t seed)
    : grammar_(grammar), rng_(seed), height_(grammar.symbols().size(), kInfinite) {
  for (SymbolId s = 0; s < height_.size(); ++s) {
    if (grammar.symbol(s).terminal) height_[s] = 0;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : grammar.productions()) {
      std::size_t h = 0;
      for (SymbolId x : p.rhs) h = std::max(h, height_[x]);
      if (h != kInfinite && h + 1 < height_[p.lhs]) {
        height_[p.lhs] = h + 1;
        changed = true;
      }
    }
  }
}

bool SentenceGenerator::expand(SymbolId symbol, std::size_t depth, std::size_t max_tokens,
                               std::vector<std::string>& out) {
  const Symbol& s = grammar_.symbol(symbol);
  if (s.terminal) {
    out.push_back(sample_text(*s.pattern));
    return out.size() <= max_tokens;
  }
  if (depth > 40) return false;
  const auto& prods = grammar_.productions_of(symbol);
  std::vector<ProductionId> choices;
  if (depth < 5 && pick(4) != 0) {
    choices = prods;
  } else {
    // Head for the shortest derivation.
    std::size_t best = kInfinite;
    for (ProductionId p : prods) {
      std::size_t h = 0;
      for (SymbolId x : grammar_.production(p).rhs) h = std::max(h, height_[x]);
      if (h < best) {
        best = h;
        choices.clear();
      }
      if (h == best) choices.push_back(p);
    }
  }
  const Production& p = grammar_.production(choices[pick(choices.size())]);
  for (SymbolId x : p.rhs) {
    if (!expand(x, depth + 1, max_tokens, out)) return false;
  }
  return true;
}

std::optional<std::vector<std::string>> SentenceGenerator::walk(std::size_t max_tokens) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<std::string> out;
    if (expand(grammar_.start(), 0, max_tokens, out)) return out;
  }
  return std::nullopt;
}

std::vector<std::string> SentenceGenerator::mutate(std::vector<std::string> tokens) {
  std::vector<std::string> alphabet;
  for (SymbolId t : grammar_.terminals()) alphabet.push_back(sample_text(*grammar_.symbol(t).pattern));
  const std::size_t op = tokens.empty() ? 1 : pick(4);
  const std::size_t i = tokens.empty() ? 0 : pick(tokens.size());
  switch (op) {
    case 0:
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    case 1:
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i), alphabet[pick(alphabet.size())]);
      break;
    case 2:
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens[i]);
      break;
    default:
      if (i + 1 < tokens.size()) std::swap(tokens[i], tokens[i + 1]);
      else if (i > 0) std::swap(tokens[i], tokens[i - 1]);
      break;
  }
  return tokens;
}

std::string SentenceGenerator::join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

namespace {

std::vector<std::string> keys(const std::vector<ParseTree>& trees) {
  std::vector<std::string> out;
  for (const auto& t : trees) out.push_back(tree_key(t));
  std::sort(out.begin(), out.end());
  return out;
}

std::string first_difference(const std::vector<std::string>& engine, const std::vector<std::string>& oracle) {
  std::vector<std::string> only_engine, only_oracle;
  std::set_difference(engine.begin(), engine.end(), oracle.begin(), oracle.end(), std::back_inserter(only_engine));
  std::set_difference(oracle.begin(), oracle.end(), engine.begin(), engine.end(), std::back_inserter(only_oracle));
  std::string s;
  if (!only_engine.empty()) s += " engine only: " + only_engine.front();
  if (!only_oracle.empty()) s += " oracle only: " + only_oracle.front();
  if (s.empty()) s = " multiplicities differ";
  return s;
}

}  // namespace

PairReport compare_with_oracle(const ValidatedModel& model, const std::string& input, std::size_t max_trees) {
  PairReport r;
  Grammar g = generate_grammar(model);
  Lexicon lex = compile_lexicon(model, g);
  TokenGraph graph;
  try {
    graph = tokenize(lex, input);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LexicalError) throw;
    r.agree = true;
    r.detail = "no tokenization";
    return r;
  }
  std::vector<ParseTree> oracle;
  try {
    oracle = oracle_parse(g, graph.nodes, max_trees);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OracleBoundExceeded) throw;
    r.skipped = true;
    r.detail = e.what();
    return r;
  }
  std::vector<ParseTree> oracle_pruned = oracle_filter(oracle, g, model);
  r.oracleRaw = oracle.size();
  r.oraclePruned = oracle_pruned.size();

  std::vector<ParseTree> engine, engine_pruned;
  try {
    ParseForest forest = parse(g, graph);
    r.engineRaw = count_trees(forest, max_trees + 1);
    if (r.engineRaw > max_trees) {
      r.skipped = true;
      r.detail = "engine count beyond bound";
      return r;
    }
    engine = enumerate_trees(forest, max_trees);
    ParseForest pruned = prune_constraints(forest, model);
    r.enginePruned = count_trees(pruned, max_trees + 1);
    engine_pruned = enumerate_trees(pruned, max_trees);
  } catch (const ParseError&) {
  }
  r.parsed = r.oracleRaw > 0 || r.engineRaw > 0;

  const auto ek = keys(engine), ok = keys(oracle), epk = keys(engine_pruned), opk = keys(oracle_pruned);
  const bool raw_equal = ek == ok && r.engineRaw == r.oracleRaw;
  const bool pruned_equal = epk == opk && r.enginePruned == r.oraclePruned;
  r.agree = raw_equal && pruned_equal;
  if (!raw_equal) r.detail += "unpruned:" + first_difference(ek, ok);
  if (!pruned_equal) r.detail += (r.detail.empty() ? "" : "; ") + std::string("pruned:") + first_difference(epk, opk);
  return r;
}

// ---- Assertions ---------------------------------------------------------------

std::string_view to_string(AssertionKind kind) {
  switch (kind) {
    case AssertionKind::matches: return "matches";
    case AssertionKind::notMatches: return "notMatches";
    case AssertionKind::matchCount: return "matchCount";
    case AssertionKind::evaluatesTo: return "evaluatesTo";
    case AssertionKind::resolvesTo: return "resolvesTo";
  }
  return "?";
}

ModelCatalog::ModelCatalog() {
  auto calc = load_model_text(calculator_model_text());
  models_["calculator"] = {std::make_shared<const Parser>(calc), Semantics::calculator};
  models_["calculator-free"] = {
      std::make_shared<const Parser>(validate_or_throw(strip_evaluation_order(calc.model()))),
      Semantics::calculator};
  models_["imperative"] = {std::make_shared<const Parser>(imperative_parser()), Semantics::imperative};
}

const TestModel* ModelCatalog::find(const std::string& name) const {
  auto it = models_.find(name);
  return it == models_.end() ? nullptr : &it->second;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string span_text(Span s) { return std::to_string(s.start) + ":" + std::to_string(s.end); }

std::string describe(const Assertion& a) {
  std::ostringstream s;
  s << to_string(a.kind) << " " << a.model << " " << quote(a.input);
  switch (a.kind) {
    case AssertionKind::matchCount: s << " " << a.count; break;
    case AssertionKind::evaluatesTo: s << " " << format_number(a.value); break;
    case AssertionKind::resolvesTo: s << " " << span_text(a.refSite) << " " << span_text(a.declSite); break;
    default: break;
  }
  return s.str();
}

double evaluate_with(const TestModel& m, const Asg& asg) {
  if (m.semantics == Semantics::imperative) {
    std::istringstream in;
    std::ostringstream out;
    return run_imperative(asg, m.parser->model(), in, out).returnValue;
  }
  return evaluate(asg, m.parser->model(), calculator_callbacks());
}

}  // namespace

AssertionOutcome run_assertion(const Assertion& a, const ModelCatalog& catalog) {
  const TestModel* m = catalog.find(a.model);
  if (!m) return {false, "unknown model '" + a.model + "'"};
  const Parser& parser = *m->parser;
  try {
    switch (a.kind) {
      case AssertionKind::matches: {
        auto asgs = parser.parse_all(a.input);
        return {true, std::to_string(asgs.size()) + " tree(s)"};
      }
      case AssertionKind::notMatches: {
        try {
          auto asgs = parser.parse_all(a.input);
          if (asgs.empty()) return {true, ""};
          return {false, "input matched with " + std::to_string(asgs.size()) + " tree(s)"};
        } catch (const Error& e) {
          return {true, e.what()};
        }
      }
      case AssertionKind::matchCount: {
        const std::uint64_t n = parser.count(a.input);
        if (n == a.count) return {true, ""};
        return {false, "expected " + std::to_string(a.count) + " tree(s), got " + std::to_string(n)};
      }
      case AssertionKind::evaluatesTo: {
        Asg asg = parser.parse(a.input);
        const double v = evaluate_with(*m, asg);
        if (std::fabs(v - a.value) <= a.tolerance) return {true, ""};
        return {false, "expected " + format_number(a.value) + ", got " + format_number(v)};
      }
      case AssertionKind::resolvesTo: {
        Asg asg = parser.parse(a.input);
        std::string seen;
        for (const AsgNode& n : asg.nodes) {
          for (const auto& [name, value] : n.members) {
            for (const Reference& r : value.references) {
              if (!(r.span == a.refSite) || !r.target) continue;
              const Span target = asg.node(*r.target).span;
              if (target == a.declSite) return {true, ""};
              seen += " " + span_text(target);
            }
          }
        }
        if (seen.empty()) return {false, "no reference at " + span_text(a.refSite)};
        return {false, "reference resolves to" + seen};
      }
    }
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  return {false, "unknown assertion kind"};
}

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t number) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError(number, 1, what);
  };
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    } else if (line[i] == '#') {
      break;
    } else if (line[i] == '"') {
      std::string s = "\"";  // marks a quoted word
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c == '\\' && i < line.size()) {
          char e = line[i++];
          switch (e) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '"': s += '"'; break;
            case '\\': s += '\\'; break;
            default: fail(std::string("unknown escape \\") + e);
          }
        } else {
          s += c;
        }
      }
      if (!closed) fail("unterminated string");
      out.push_back(std::move(s));
    } else {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

bool is_quoted(const std::string& w) { return !w.empty() && w[0] == '"'; }

}  // namespace

std::vector<Assertion> parse_test_file(const std::string& text, const std::string& base_dir, ModelCatalog& catalog) {
  std::vector<Assertion> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto words = split_line(line, number);
    if (words.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw FormatError(number, 1, what);
    };
    auto plain = [&](std::size_t i, const char* what) -> const std::string& {
      if (i >= words.size() || is_quoted(words[i])) fail(std::string("expected ") + what);
      return words[i];
    };
    auto string_at = [&](std::size_t i, const char* what) {
      if (i >= words.size() || !is_quoted(words[i])) fail(std::string("expected quoted ") + what);
      return words[i].substr(1);
    };
    auto number_at = [&](std::size_t i, const char* what) {
      const std::string& w = plain(i, what);
      try {
        std::size_t used = 0;
        double v = std::stod(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
        return v;
      } catch (const std::exception&) {
        fail(std::string("expected ") + what + ", got '" + w + "'");
      }
      return 0.0;
    };
    auto span_at = [&](std::size_t i, const char* what) {
      const std::string& w = plain(i, what);
      auto colon = w.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument(w);
        return Span{std::stoul(w.substr(0, colon)), std::stoul(w.substr(colon + 1))};
      } catch (const std::exception&) {
        fail(std::string("expected ") + what + " as start:end, got '" + w + "'");
      }
      return Span{};
    };

    const std::string& head = plain(0, "a keyword");
    if (head == "model") {
      const std::string& name = plain(1, "model name");
      std::filesystem::path path = string_at(2, "model path");
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      bool stripped = false;
      if (words.size() > 3) {
        if (plain(3, "'stripped'") != "stripped") fail("expected 'stripped'");
        stripped = true;
      }
      if (words.size() > 4) fail("trailing words");
      ValidatedModel m = load_model_file(path.string());
      if (stripped) m = validate_or_throw(strip_evaluation_order(m.model()));
      catalog.add(name, {std::make_shared<const Parser>(m), Semantics::none});
      continue;
    }

    Assertion a;
    a.line = number;
    std::size_t expected_words = 3;
    if (head == "matches") {
      a.kind = AssertionKind::matches;
    } else if (head == "notMatches") {
      a.kind = AssertionKind::notMatches;
    } else if (head == "matchCount") {
      a.kind = AssertionKind::matchCount;
      expected_words = 4;
    } else if (head == "evaluatesTo") {
      a.kind = AssertionKind::evaluatesTo;
      expected_words = words.size() == 5 ? 5 : 4;
    } else if (head == "resolvesTo") {
      a.kind = AssertionKind::resolvesTo;
      expected_words = 5;
    } else {
      fail("unknown keyword '" + head + "'");
    }
    a.model = plain(1, "model name");
    a.input = string_at(2, "input");
    if (words.size() != expected_words) {
      fail("expected " + std::to_string(expected_words) + " fields, got " + std::to_string(words.size()));
    }
    switch (a.kind) {
      case AssertionKind::matchCount: {
        const double c = number_at(3, "tree count");
        if (c < 0 || c != std::floor(c)) fail("tree count must be a non-negative integer");
        a.count = static_cast<std::uint64_t>(c);
        break;
      }
      case AssertionKind::evaluatesTo:
        a.value = number_at(3, "value");
        if (words.size() == 5) a.tolerance = number_at(4, "tolerance");
        if (a.tolerance < 0) fail("tolerance must be non-negative");
        break;
      case AssertionKind::resolvesTo:
        a.refSite = span_at(3, "reference span");
        a.declSite = span_at(4, "declaration span");
        break;
      default:
        break;
    }
    if (!catalog.find(a.model)) fail("unknown model '" + a.model + "'");
    out.push_back(std::move(a));
  }
  return out;
}

std::size_t run_test_file(const std::string& path, std::ostream& out) {
  ModelCatalog catalog;
  const std::string base = std::filesystem::path(path).parent_path().string();
  std::vector<Assertion> assertions = parse_test_file(read_file(path), base, catalog);
  out << "TAP version 13\n1.." << assertions.size() << "\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < assertions.size(); ++i) {
    const Assertion& a = assertions[i];
    AssertionOutcome r = run_assertion(a, catalog);
    if (r.pass) {
      out << "ok " << i + 1 << " - " << describe(a) << "\n";
    } else {
      ++failed;
      out << "not ok " << i + 1 << " - " << describe(a) << " (line " << a.line << ")\n";
      out << "  # " << r.diagnostics << "\n";
    }
  }
  out << "# " << assertions.size() << " assertions, " << failed << " failed\n";
  return failed;
}

}  // namespace mcc
