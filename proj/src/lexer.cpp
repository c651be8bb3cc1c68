#include "mcc/lexer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mcc {

std::vector<std::size_t> Recognizer::match(std::string_view input, std::size_t offset, bool all) const {
  if (regex) {
    if (all) return regex->all_matches(input, offset);
    if (auto n = regex->longest_match(input, offset)) return {*n};
    return {};
  }
  if (matcher) {
    auto n = matcher(input, offset);
    if (n && *n > 0 && offset + *n <= input.size()) return {*n};
  }
  return {};
}

namespace {

Recognizer make_recognizer(const PatternSpec& spec, SymbolId symbol, std::string name, const Registry* registry) {
  Recognizer r;
  r.symbol = symbol;
  r.name = std::move(name);
  r.spec = spec;
  if (spec.form == PatternSpec::Form::regularExpression) {
    r.regex.emplace(spec.expression);
  } else {
    if (!registry || !registry->has_matcher(spec.expression)) {
      throw Error(ErrorCode::PatternCompileError, "custom matcher '" + spec.expression + "' is not registered");
    }
    r.matcher = registry->matchers.find(spec.expression)->second;
  }
  return r;
}

std::size_t skip(const std::vector<Span>& ignored, std::size_t offset) {
  // Spans are sorted and disjoint; hop over any span covering `offset`.
  auto it = std::upper_bound(ignored.begin(), ignored.end(), offset,
                             [](std::size_t o, const Span& s) { return o < s.start; });
  if (it != ignored.begin()) {
    --it;
    while (it != ignored.end() && it->start <= offset && offset < it->end) {
      offset = it->end;
      ++it;
    }
  }
  return offset;
}

bool covered(const std::vector<Span>& ignored, std::size_t offset) { return skip(ignored, offset) != offset; }

}  // namespace

Lexicon compile_lexicon(const ValidatedModel& model, const Grammar& grammar, const Registry* registry,
                        LexOptions options) {
  Lexicon lexicon;
  lexicon.options = options;
  for (SymbolId id : grammar.terminals()) {
    const Symbol& s = grammar.symbol(id);
    std::string name = s.element ? s.name : display(grammar, id);
    lexicon.recognizers.push_back(make_recognizer(*s.pattern, id, std::move(name), registry));
  }
  for (const auto& p : model.model().ignorePatterns) {
    lexicon.ignores.push_back(make_recognizer(p, 0, "ignore", registry));
  }
  return lexicon;
}

std::vector<Span> ignore_spans(const Lexicon& lexicon, std::string_view input) {
  std::vector<Span> spans;
  if (lexicon.ignores.empty()) return spans;
  std::size_t i = 0;
  while (i < input.size()) {
    std::size_t best = 0;
    for (const auto& r : lexicon.ignores) {
      auto m = r.match(input, i, false);
      if (!m.empty()) best = std::max(best, m.back());
    }
    if (best > 0) {
      spans.push_back({i, i + best});
      i += best;
    } else {
      i += decode_utf8(input, i).second;
    }
  }
  return spans;
}

namespace {

std::vector<Token> raw_tokens_with(const Lexicon& lexicon, std::string_view input, const std::vector<Span>& ignored) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < input.size(); i += decode_utf8(input, i).second) {
    if (covered(ignored, i)) continue;
    for (std::size_t r = 0; r < lexicon.recognizers.size(); ++r) {
      const Recognizer& rec = lexicon.recognizers[r];
      for (std::size_t n : rec.match(input, i, lexicon.options.all_lengths)) {
        Token t;
        t.symbol = rec.symbol;
        t.typeName = rec.name;
        t.lexeme = std::string(input.substr(i, n));
        t.start = i;
        t.end = i + n;
        t.next = skip(ignored, t.end);
        t.recognizer = r;
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Token> raw_tokens(const Lexicon& lexicon, std::string_view input) {
  return raw_tokens_with(lexicon, input, ignore_spans(lexicon, input));
}

TokenGraph tokenize(const Lexicon& lexicon, std::string_view input) {
  TokenGraph g;
  g.length = input.size();
  g.ignored = ignore_spans(lexicon, input);
  g.startOffset = skip(g.ignored, 0);
  std::vector<Token> raw = raw_tokens_with(lexicon, input, g.ignored);

  // Exact-span precedence filter.
  std::map<std::pair<std::size_t, std::size_t>, unsigned> best;
  for (const auto& t : raw) {
    if (auto p = lexicon.recognizers[t.recognizer].spec.precedence) {
      auto key = std::make_pair(t.start, t.end);
      auto it = best.find(key);
      if (it == best.end() || *p < it->second) best[key] = *p;
    }
  }
  std::vector<Token> kept;
  for (auto& t : raw) {
    auto p = lexicon.recognizers[t.recognizer].spec.precedence;
    if (p) {
      auto it = best.find({t.start, t.end});
      if (*p > it->second) continue;
    }
    kept.push_back(std::move(t));
  }
  std::sort(kept.begin(), kept.end(), [](const Token& a, const Token& b) {
    return std::tie(a.start, a.end, a.recognizer) < std::tie(b.start, b.end, b.recognizer);
  });

  // Forward reachability over offsets, then backward co-reachability.
  std::vector<char> reach(input.size() + 1, 0);
  reach[g.startOffset] = 1;
  std::size_t farthest = g.startOffset;
  for (const auto& t : kept) {
    if (reach[t.start]) {
      reach[t.next] = 1;
      farthest = std::max(farthest, t.next);
    }
  }
  std::vector<char> finish(input.size() + 1, 0);
  finish[input.size()] = 1;
  std::vector<char> live(kept.size(), 0);
  for (std::size_t k = kept.size(); k-- > 0;) {
    const Token& t = kept[k];
    if (reach[t.start] && finish[t.next]) {
      live[k] = 1;
      finish[t.start] = 1;
    }
  }
  if (!finish[g.startOffset]) {
    std::string near(input.substr(farthest, std::min<std::size_t>(16, input.size() - farthest)));
    throw LexicalError(farthest, "no token matches at offset " + std::to_string(farthest) +
                                     (near.empty() ? std::string() : " near '" + near + "'"));
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (live[k]) g.nodes.push_back(std::move(kept[k]));
  }

  std::multimap<std::size_t, std::size_t> by_start;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) by_start.emplace(g.nodes[k].start, k);
  g.edges.resize(g.nodes.size());
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const Token& t = g.nodes[k];
    if (t.start == g.startOffset) g.startNodes.push_back(k);
    if (t.next == g.length) g.endNodes.push_back(k);
    auto [lo, hi] = by_start.equal_range(t.next);
    for (auto it = lo; it != hi; ++it) g.edges[k].push_back(it->second);
  }
  return g;
}

bool TokenGraph::linear() const {
  if (nodes.empty()) return true;
  if (startNodes.size() != 1) return false;
  for (const auto& e : edges) {
    if (e.size() > 1) return false;
  }
  std::size_t ends = 0;
  for (const auto& e : edges) ends += e.empty();
  return ends == 1;
}

std::string dot_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string token_graph_dot(const TokenGraph& graph) {
  std::ostringstream out;
  out << "digraph tokens {\n  rankdir=LR;\n  node [shape=box];\n";
  out << "  start [shape=point];\n  end [shape=doublecircle, label=\"\"];\n";
  for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
    const Token& t = graph.nodes[k];
    out << "  n" << k << " [label=\""
        << dot_escape(t.typeName + ":" + t.lexeme + "@[" + std::to_string(t.start) + "," + std::to_string(t.end) + ")")
        << "\"];\n";
  }
  for (std::size_t k : graph.startNodes) out << "  start -> n" << k << ";\n";
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    for (std::size_t m : graph.edges[k]) out << "  n" << k << " -> n" << m << ";\n";
  }
  for (std::size_t k : graph.endNodes) out << "  n" << k << " -> end;\n";
  if (graph.nodes.empty()) out << "  start -> end;\n";
  out << "}\n";
  return out.str();
}

}  // namespace mcc
