#include "mcc/earley.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mcc {

namespace {

// Item (production, dot, origin) packed into 64 bits.
constexpr unsigned kOriginBits = 32;
constexpr unsigned kDotBits = 8;

std::uint64_t pack(ProductionId p, std::size_t dot, std::size_t origin) {
  return (static_cast<std::uint64_t>(p) << (kOriginBits + kDotBits)) |
         (static_cast<std::uint64_t>(dot) << kOriginBits) | static_cast<std::uint64_t>(origin);
}
ProductionId item_production(std::uint64_t k) { return static_cast<ProductionId>(k >> (kOriginBits + kDotBits)); }
std::size_t item_dot(std::uint64_t k) { return static_cast<std::size_t>((k >> kOriginBits) & ((1u << kDotBits) - 1)); }
std::size_t item_origin(std::uint64_t k) { return static_cast<std::size_t>(k & 0xFFFFFFFFu); }

struct EarleySet {
  std::vector<std::uint64_t> items;
  std::unordered_set<std::uint64_t> seen;
  std::unordered_map<SymbolId, std::vector<std::uint64_t>> waiting;   // next symbol -> items
  std::unordered_map<SymbolId, std::vector<std::size_t>> completed;  // lhs -> origins
  std::unordered_set<std::uint64_t> completedSeen;
};

class Chart {
 public:
  Chart(const Grammar& g, const TokenGraph& tg) : g_(g), tg_(tg), sets_(tg.length + 1) {
    if (tg.length >= (std::size_t{1} << kOriginBits)) {
      throw Error(ErrorCode::ParseError, "input too large for the chart parser");
    }
    for (const auto& p : g.productions()) {
      if (p.rhs.size() >= (1u << kDotBits)) throw Error(ErrorCode::InvalidModel, "production too long");
    }
    by_start_.resize(tg.length + 1);
    by_next_.resize(tg.length + 1);
    for (std::size_t k = 0; k < tg.nodes.size(); ++k) {
      by_start_[tg.nodes[k].start].push_back(k);
      by_next_[tg.nodes[k].next].push_back(k);
    }
  }

  void run() {
    for (ProductionId p : g_.productions_of(g_.start())) add(tg_.startOffset, p, 0, tg_.startOffset);
    for (std::size_t pos = tg_.startOffset; pos <= tg_.length; ++pos) {
      if (sets_[pos]) process(pos);
    }
  }

  bool accepted() const {
    const auto* s = set(tg_.length);
    if (!s) return false;
    auto it = s->completed.find(g_.start());
    return it != s->completed.end() &&
           std::find(it->second.begin(), it->second.end(), tg_.startOffset) != it->second.end();
  }

  [[noreturn]] void fail() const {
    std::size_t pos = tg_.startOffset;
    for (std::size_t i = 0; i <= tg_.length; ++i) {
      if (sets_[i]) pos = i;
    }
    std::set<std::string> expected;
    for (std::uint64_t k : sets_[pos]->items) {
      const Production& p = g_.production(item_production(k));
      std::size_t d = item_dot(k);
      if (d < p.rhs.size() && g_.symbol(p.rhs[d]).terminal) expected.insert(display(g_, p.rhs[d]));
    }
    std::string message;
    if (pos == tg_.length) {
      message = "unexpected end of input at offset " + std::to_string(pos);
    } else {
      const Token& t = tg_.nodes[by_start_[pos].front()];
      message = "unexpected '" + t.lexeme + "' at offset " + std::to_string(pos);
    }
    if (!expected.empty()) {
      message += "; expected one of:";
      for (const auto& e : expected) message += " " + e;
    }
    throw ParseError(pos, {expected.begin(), expected.end()}, message);
  }

  const EarleySet* set(std::size_t pos) const { return sets_[pos].get(); }
  bool has(std::size_t pos, ProductionId p, std::size_t dot, std::size_t origin) const {
    const auto* s = set(pos);
    return s && s->seen.count(pack(p, dot, origin));
  }
  const std::vector<std::size_t>* completed(std::size_t pos, SymbolId symbol) const {
    const auto* s = set(pos);
    if (!s) return nullptr;
    auto it = s->completed.find(symbol);
    return it == s->completed.end() ? nullptr : &it->second;
  }
  const std::vector<std::size_t>& tokens_ending(std::size_t next) const { return by_next_[next]; }

 private:
  void add(std::size_t pos, ProductionId p, std::size_t dot, std::size_t origin) {
    auto& s = sets_[pos];
    if (!s) s = std::make_unique<EarleySet>();
    std::uint64_t k = pack(p, dot, origin);
    if (s->seen.insert(k).second) s->items.push_back(k);
  }

  void process(std::size_t pos) {
    EarleySet& s = *sets_[pos];
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      const std::uint64_t k = s.items[i];
      const ProductionId pid = item_production(k);
      const std::size_t dot = item_dot(k);
      const std::size_t origin = item_origin(k);
      const Production& p = g_.production(pid);
      if (dot < p.rhs.size()) {
        const SymbolId x = p.rhs[dot];
        if (g_.symbol(x).terminal) {
          for (std::size_t t : by_start_[pos]) {
            if (tg_.nodes[t].symbol == x) add(tg_.nodes[t].next, pid, dot + 1, origin);
          }
          continue;
        }
        auto [it, fresh] = s.waiting.try_emplace(x);
        it->second.push_back(k);
        if (fresh) {
          for (ProductionId q : g_.productions_of(x)) add(pos, q, 0, pos);
        }
        if (g_.nullable(x)) add(pos, pid, dot + 1, origin);
        continue;
      }
      const SymbolId lhs = p.lhs;
      if (s.completedSeen.insert((static_cast<std::uint64_t>(lhs) << kOriginBits) | origin).second) {
        s.completed[lhs].push_back(origin);
      }
      const EarleySet& from = *sets_[origin];
      auto w = from.waiting.find(lhs);
      if (w == from.waiting.end()) continue;
      const auto& waiting = w->second;
      for (std::size_t j = 0; j < waiting.size(); ++j) {
        const std::uint64_t wk = waiting[j];
        add(pos, item_production(wk), item_dot(wk) + 1, item_origin(wk));
      }
    }
  }

  const Grammar& g_;
  const TokenGraph& tg_;
  std::vector<std::unique_ptr<EarleySet>> sets_;
  std::vector<std::vector<std::size_t>> by_start_;
  std::vector<std::vector<std::size_t>> by_next_;
};

struct RawNode {
  SymbolId symbol;
  std::size_t start;
  std::size_t end;
  std::optional<std::size_t> token;
  std::vector<Derivation> derivations;
};

}  // namespace

// Reads derivations back out of a finished chart, then unfolds same-extent
// cycles into an acyclic forest.
class ForestBuilder {
 public:
  ForestBuilder(const Grammar& g, const TokenGraph& tg, const Chart& chart) : g_(g), tg_(tg), chart_(chart) {}

  ParseForest build() {
    ParseForest forest;
    forest.grammar_ = &g_;
    forest.tokens_ = tg_.nodes;
    std::size_t root = node_for(g_.start(), tg_.startOffset, tg_.length);
    for (std::size_t i = 0; i < pending_.size(); ++i) expand(pending_[i]);
    find_cycles();
    out_ = &forest;
    if (auto r = unfold(root, {})) forest.roots_.push_back(*r);
    return forest;
  }

 private:
  std::size_t node_for(SymbolId symbol, std::size_t start, std::size_t end) {
    auto [it, fresh] = index_.try_emplace(std::make_tuple(symbol, start, end), raw_.size());
    if (fresh) {
      raw_.push_back(RawNode{symbol, start, end, std::nullopt, {}});
      pending_.push_back(it->second);
    }
    return it->second;
  }

  std::size_t token_node(std::size_t token) {
    auto [it, fresh] = token_index_.try_emplace(token, raw_.size());
    if (fresh) {
      const Token& t = tg_.nodes[token];
      raw_.push_back(RawNode{t.symbol, t.start, t.next, token, {}});
    }
    return it->second;
  }

  void expand(std::size_t id) {
    const SymbolId symbol = raw_[id].symbol;
    const std::size_t start = raw_[id].start;
    const std::size_t end = raw_[id].end;
    for (ProductionId pid : g_.productions_of(symbol)) {
      const Production& p = g_.production(pid);
      if (!chart_.has(end, pid, p.rhs.size(), start)) continue;
      std::vector<std::size_t> children(p.rhs.size());
      decompose(id, pid, p.rhs.size(), end, children);
    }
  }

  // Walks the production right to left, choosing every split point where the
  // chart confirms the prefix item.
  void decompose(std::size_t id, ProductionId pid, std::size_t k, std::size_t cur, std::vector<std::size_t>& children) {
    const Production& p = g_.production(pid);
    const std::size_t start = raw_[id].start;
    if (k == 0) {
      if (cur == start) raw_[id].derivations.push_back(Derivation{pid, children});
      return;
    }
    const SymbolId x = p.rhs[k - 1];
    if (g_.symbol(x).terminal) {
      for (std::size_t t : chart_.tokens_ending(cur)) {
        const Token& tok = tg_.nodes[t];
        if (tok.symbol != x || tok.start < start || !chart_.has(tok.start, pid, k - 1, start)) continue;
        children[k - 1] = token_node(t);
        decompose(id, pid, k - 1, tok.start, children);
      }
      return;
    }
    const auto* origins = chart_.completed(cur, x);
    if (!origins) return;
    std::vector<std::size_t> mids(origins->begin(), origins->end());
    std::sort(mids.begin(), mids.end());
    for (std::size_t m : mids) {
      if (m < start || !chart_.has(m, pid, k - 1, start)) continue;
      children[k - 1] = node_for(x, m, cur);
      decompose(id, pid, k - 1, m, children);
    }
  }

  void find_cycles() {
    const std::size_t n = raw_.size();
    scc_.assign(n, SIZE_MAX);
    std::vector<std::size_t> low(n), order(n, SIZE_MAX), stack;
    std::vector<char> on_stack(n, 0);
    std::size_t counter = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
      order[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      for (const auto& d : raw_[v].derivations) {
        for (std::size_t w : d.children) {
          if (order[w] == SIZE_MAX) {
            visit(w);
            low[v] = std::min(low[v], low[w]);
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], order[w]);
          }
        }
      }
      if (low[v] == order[v]) {
        const std::size_t id = cyclic_.size();
        std::size_t size = 0;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          scc_[w] = id;
          ++size;
        } while (w != v);
        bool self_loop = false;
        for (const auto& d : raw_[v].derivations) {
          self_loop |= std::find(d.children.begin(), d.children.end(), v) != d.children.end();
        }
        cyclic_.push_back(size > 1 || self_loop);
      }
    };
    for (std::size_t v = 0; v < n; ++v) {
      if (order[v] == SIZE_MAX) visit(v);
    }
  }

  // Copy of raw node `id` reached with the given same-cycle ancestors, or
  // nothing when every derivation would repeat an ancestor.
  std::optional<std::size_t> unfold(std::size_t id, const std::vector<std::size_t>& ancestors) {
    auto key = std::make_pair(id, ancestors);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const RawNode& n = raw_[id];
    std::vector<Derivation> kept;
    if (!n.token) {
      const bool in_cycle = cyclic_[scc_[id]];
      std::vector<std::size_t> extended = ancestors;
      if (in_cycle) extended.insert(std::upper_bound(extended.begin(), extended.end(), id), id);
      for (const auto& d : n.derivations) {
        Derivation copy{d.production, {}};
        bool ok = true;
        for (std::size_t c : d.children) {
          std::optional<std::size_t> child;
          if (in_cycle && scc_[c] == scc_[id]) {
            if (std::binary_search(extended.begin(), extended.end(), c)) {
              ok = false;
              break;
            }
            child = unfold(c, extended);
          } else {
            child = unfold(c, {});
          }
          if (!child) {
            ok = false;
            break;
          }
          copy.children.push_back(*child);
        }
        if (ok) kept.push_back(std::move(copy));
      }
      if (kept.empty()) {
        memo_.emplace(key, std::nullopt);
        return std::nullopt;
      }
    }
    const std::size_t out = out_->nodes_.size();
    out_->nodes_.push_back(ForestNode{n.symbol, n.start, n.end, n.token, std::move(kept)});
    memo_.emplace(std::move(key), out);
    return out;
  }

  const Grammar& g_;
  const TokenGraph& tg_;
  const Chart& chart_;
  std::vector<RawNode> raw_;
  std::vector<std::size_t> pending_;
  std::map<std::tuple<SymbolId, std::size_t, std::size_t>, std::size_t> index_;
  std::map<std::size_t, std::size_t> token_index_;
  std::vector<std::size_t> scc_;
  std::vector<char> cyclic_;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::optional<std::size_t>> memo_;
  ParseForest* out_ = nullptr;
};

ParseForest parse(const Grammar& grammar, const TokenGraph& tokens) {
  Chart chart(grammar, tokens);
  chart.run();
  if (!chart.accepted()) chart.fail();
  ParseForest forest = ForestBuilder(grammar, tokens, chart).build();
  if (forest.empty()) {
    throw ParseError(tokens.startOffset, {}, "every derivation repeats a symbol on the same extent");
  }
  return forest;
}

namespace {

// Attributes of a subtree that the constraint rules inspect.
struct Summary {
  std::optional<unsigned> priority;
  std::optional<TypeId> group;  // associativity group
  bool composite = false;
  std::vector<TypeId> absent;   // composition groups on the right spine with the trailing part absent
  std::vector<TypeId> present;  // ... and with it present

  auto operator<=>(const Summary&) const = default;
};

void merge_into(std::vector<TypeId>& into, const std::vector<TypeId>& from) {
  std::vector<TypeId> out;
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
  into = std::move(out);
}

bool contains(const std::vector<TypeId>& v, TypeId t) { return std::binary_search(v.begin(), v.end(), t); }

class Pruner {
 public:
  Pruner(const ParseForest& in, const ValidatedModel& model, std::vector<ForestNode>& out)
      : in_(in), g_(in.grammar()), model_(model), out_(out) {}

  using Variants = std::vector<std::pair<Summary, std::size_t>>;

  const Variants& variants(std::size_t id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    const ForestNode& n = in_.nodes()[id];
    Variants result;
    if (n.token) {
      Summary s;
      if (auto type = g_.symbol(n.symbol).element) {
        s.priority = model_.type(*type).constraints.priority;
        s.group = model_.associativity_owner(*type);
      }
      out_.push_back(n);
      result.emplace_back(std::move(s), out_.size() - 1);
      return memo_.emplace(id, std::move(result)).first->second;
    }

    std::map<Summary, std::vector<Derivation>> buckets;
    for (const auto& d : n.derivations) {
      std::vector<const Variants*> options;
      bool dead = false;
      for (std::size_t c : d.children) {
        options.push_back(&variants(c));
        dead |= options.back()->empty();
      }
      if (dead) continue;
      std::vector<std::size_t> pick(options.size(), 0);
      while (true) {
        std::vector<const Summary*> sums;
        Derivation nd{d.production, {}};
        for (std::size_t i = 0; i < options.size(); ++i) {
          sums.push_back(&(*options[i])[pick[i]].first);
          nd.children.push_back((*options[i])[pick[i]].second);
        }
        if (auto s = summarize(n, d, sums)) buckets[std::move(*s)].push_back(std::move(nd));
        std::size_t i = options.size();
        while (i > 0) {
          --i;
          if (++pick[i] < options[i]->size()) break;
          pick[i] = 0;
          if (i == 0) {
            i = SIZE_MAX;
            break;
          }
        }
        if (options.empty() || i == SIZE_MAX) break;
      }
    }
    for (auto& [summary, derivations] : buckets) {
      out_.push_back(ForestNode{n.symbol, n.start, n.end, std::nullopt, std::move(derivations)});
      result.emplace_back(summary, out_.size() - 1);
    }
    return memo_.emplace(id, std::move(result)).first->second;
  }

 private:
  // Summary of the derivation, or nothing if it violates a constraint.
  std::optional<Summary> summarize(const ForestNode& n, const Derivation& d, const std::vector<const Summary*>& sums) {
    const Production& p = g_.production(d.production);
    Summary s;
    auto right_aligned = [&](Summary& into) {
      for (std::size_t i = 0; i < d.children.size(); ++i) {
        if (in_.nodes()[d.children[i]].end == n.end) {
          merge_into(into.absent, sums[i]->absent);
          merge_into(into.present, sums[i]->present);
        }
      }
    };

    if (p.origin == Origin::selection ||
        (p.origin == Origin::optionalPresent && p.memberBindings.empty() && sums.size() == 1)) {
      return *sums[0];
    }
    const bool composite = (p.origin == Origin::composition || p.origin == Origin::permutation) && p.elementType &&
                           model_.type(*p.elementType).kind == ElementKind::composite;
    if (!composite) {
      if (p.origin == Origin::optionalPresent && !p.memberBindings.empty()) {
        const Summary& bound = *sums[p.memberBindings.begin()->first];
        s.priority = bound.priority;
        s.group = bound.group;
        s.composite = bound.composite;
      }
      right_aligned(s);
      return s;
    }

    const TypeId type = *p.elementType;
    const ElementType& t = model_.type(type);
    std::vector<std::pair<std::size_t, const std::string*>> bound;  // rhs index, member name
    for (const auto& [index, name] : p.memberBindings) bound.emplace_back(index, &name);

    std::optional<std::size_t> slot_index;
    if (auto slot = model_.priority_slot(type)) {
      for (const auto& [index, name] : bound) {
        if (*name == t.members[*slot].name) slot_index = index;
      }
    }
    s.composite = true;
    s.priority = t.constraints.priority;
    if (!s.priority && slot_index) s.priority = sums[*slot_index]->priority;
    s.group = model_.associativity_owner(type);
    if (!s.group && slot_index) s.group = sums[*slot_index]->group;

    if (s.group && !bound.empty()) {
      const Associativity kind = model_.type(*s.group).constraints.associativity;
      auto same = [&](const Summary& c) { return c.composite && c.group == s.group && c.priority == s.priority; };
      const bool check_right = kind == Associativity::leftToRight || kind == Associativity::nonAssociative;
      const bool check_left = kind == Associativity::rightToLeft || kind == Associativity::nonAssociative;
      if (check_right && same(*sums[bound.back().first])) return std::nullopt;
      if (check_left && same(*sums[bound.front().first])) return std::nullopt;
    }
    if (s.priority) {
      for (const auto& [index, name] : bound) {
        if (slot_index && index == *slot_index) continue;
        const Summary& c = *sums[index];
        if (c.composite && c.priority && *c.priority > *s.priority) return std::nullopt;
      }
    }

    right_aligned(s);
    if (auto owner = model_.composition_owner(type)) {
      const std::size_t last = p.rhs.size() ? p.rhs.size() - 1 : 0;
      if (!p.rhs.empty() && p.memberBindings.count(last) && g_.nullable(p.rhs[last])) {
        const ForestNode& trailing = in_.nodes()[d.children[last]];
        const bool present = trailing.start != trailing.end;
        const Composition mode = model_.type(*owner).constraints.composition;
        if (bound.size() >= 2) {
          const Summary& prev = *sums[bound[bound.size() - 2].first];
          if (mode == Composition::eager && present && contains(prev.absent, *owner)) return std::nullopt;
          if (mode == Composition::lazy && !present && contains(prev.present, *owner)) return std::nullopt;
        }
        merge_into(present ? s.present : s.absent, {*owner});
      }
    }
    return s;
  }

  const ParseForest& in_;
  const Grammar& g_;
  const ValidatedModel& model_;
  std::vector<ForestNode>& out_;
  std::map<std::size_t, Variants> memo_;
};

}  // namespace

ParseForest prune_constraints(const ParseForest& forest, const ValidatedModel& model) {
  ParseForest out;
  out.grammar_ = forest.grammar_;
  out.tokens_ = forest.tokens_;
  Pruner pruner(forest, model, out.nodes_);
  for (std::size_t root : forest.roots_) {
    for (const auto& [summary, id] : pruner.variants(root)) out.roots_.push_back(id);
  }
  return out;
}

std::uint64_t count_trees(const ParseForest& forest, std::uint64_t cap) {
  std::vector<std::optional<std::uint64_t>> memo(forest.nodes().size());
  auto sat_add = [cap](std::uint64_t a, std::uint64_t b) { return a >= cap - std::min(cap, b) ? cap : a + b; };
  auto sat_mul = [cap](std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return std::uint64_t{0};
    return a > cap / b ? cap : std::min(cap, a * b);
  };
  std::function<std::uint64_t(std::size_t)> count = [&](std::size_t id) -> std::uint64_t {
    if (memo[id]) return *memo[id];
    const ForestNode& n = forest.nodes()[id];
    std::uint64_t total = 0;
    if (n.token) {
      total = 1;
    } else {
      for (const auto& d : n.derivations) {
        std::uint64_t product = 1;
        for (std::size_t c : d.children) product = sat_mul(product, count(c));
        total = sat_add(total, product);
      }
    }
    memo[id] = total;
    return total;
  };
  std::uint64_t total = 0;
  for (std::size_t r : forest.roots()) total = sat_add(total, count(r));
  return std::min(total, cap);
}

std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit) {
  std::map<std::size_t, std::vector<ParseTree>> memo;
  std::function<const std::vector<ParseTree>&(std::size_t)> trees = [&](std::size_t id) -> const std::vector<ParseTree>& {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const ForestNode& n = forest.nodes()[id];
    std::vector<ParseTree> out;
    if (n.token) {
      const Token& t = forest.tokens()[*n.token];
      out.push_back(ParseTree{n.symbol, std::nullopt, n.token, Span{t.start, t.end}, {}});
      return memo.emplace(id, std::move(out)).first->second;
    }
    for (const auto& d : n.derivations) {
      if (out.size() >= limit) break;
      std::vector<const std::vector<ParseTree>*> options;
      bool dead = false;
      for (std::size_t c : d.children) {
        options.push_back(&trees(c));
        dead |= options.back()->empty();
      }
      if (dead) continue;
      std::vector<std::size_t> pick(options.size(), 0);
      while (out.size() < limit) {
        ParseTree tree{n.symbol, d.production, std::nullopt, Span{n.start, n.start}, {}};
        bool any = false;
        for (std::size_t i = 0; i < options.size(); ++i) {
          const ParseTree& child = (*options[i])[pick[i]];
          if (child.span.start != child.span.end || child.token) {
            if (!any) tree.span.start = child.span.start;
            tree.span.end = child.span.end;
            any = true;
          }
          tree.children.push_back(child);
        }
        out.push_back(std::move(tree));
        // Odometer with the last child varying fastest.
        std::size_t i = options.size();
        bool done = true;
        while (i > 0) {
          --i;
          if (++pick[i] < options[i]->size()) {
            done = false;
            break;
          }
          pick[i] = 0;
        }
        if (done) break;
      }
    }
    return memo.emplace(id, std::move(out)).first->second;
  };
  std::vector<ParseTree> result;
  for (std::size_t r : forest.roots()) {
    for (const auto& t : trees(r)) {
      if (result.size() >= limit) return result;
      result.push_back(t);
    }
  }
  return result;
}

namespace {

std::string record_escape(std::string_view text) {
  std::string out;
  for (char c : dot_escape(text)) {
    if (c == '{' || c == '}' || c == '|' || c == '<' || c == '>') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string forest_dot(const ParseForest& forest) {
  const Grammar& g = forest.grammar();
  std::ostringstream out;
  out << "digraph forest {\n  node [fontname=\"monospace\"];\n";
  for (std::size_t id = 0; id < forest.nodes().size(); ++id) {
    const ForestNode& n = forest.nodes()[id];
    if (n.token) {
      const Token& t = forest.tokens()[*n.token];
      out << "  n" << id << " [shape=ellipse, label=\""
          << dot_escape(t.typeName + ":" + t.lexeme + "@[" + std::to_string(t.start) + "," + std::to_string(t.end) + ")")
          << "\"];\n";
      continue;
    }
    out << "  n" << id << " [shape=record, label=\"{"
        << record_escape(display(g, n.symbol) + " [" + std::to_string(n.start) + "," + std::to_string(n.end) + ")")
        << "|{";
    for (std::size_t k = 0; k < n.derivations.size(); ++k) {
      if (k) out << "|";
      out << "<d" << k << "> p" << n.derivations[k].production;
    }
    out << "}}\"];\n";
  }
  for (std::size_t id = 0; id < forest.nodes().size(); ++id) {
    const ForestNode& n = forest.nodes()[id];
    for (std::size_t k = 0; k < n.derivations.size(); ++k) {
      for (std::size_t c : n.derivations[k].children) out << "  n" << id << ":d" << k << " -> n" << c << ";\n";
    }
  }
  for (std::size_t r : forest.roots()) out << "  root [shape=point];\n  root -> n" << r << ";\n";
  out << "}\n";
  return out.str();
}

std::string tree_string(const ParseTree& tree, const Grammar& grammar, const std::vector<Token>& tokens) {
  std::string out = grammar.symbol(tree.symbol).name;
  if (tree.token) {
    const Token& t = tokens[*tree.token];
    return out + "'" + t.lexeme + "'@" + std::to_string(t.start);
  }
  out += "[" + std::to_string(*tree.production) + "](";
  for (std::size_t i = 0; i < tree.children.size(); ++i) {
    if (i) out += ' ';
    out += tree_string(tree.children[i], grammar, tokens);
  }
  return out + ")";
}

}  // namespace mcc
