// Shared helpers for the unit tests.
#ifndef MCC_TESTS_SUPPORT_HPP_
#define MCC_TESTS_SUPPORT_HPP_

#include <functional>
#include <optional>
#include <string>

#include "mcc/error.hpp"
#include "mcc/harness.hpp"

#ifndef MCC_SOURCE_DIR
#define MCC_SOURCE_DIR "."
#endif

namespace mcc::test {

inline std::string source_path(const std::string& relative) { return std::string(MCC_SOURCE_DIR) + "/" + relative; }

// Code of the mcc::Error thrown by `f`, or nothing.
template <class F>
std::optional<ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct OraclePair {
  std::uint64_t seed = 0;
  std::string input;
  PairReport report;
};

// Random models with generated or mutated inputs of at most `max_tokens`
// tokens, compared against the reference parser until `wanted` pairs were
// not skipped. `seen` receives every compared pair.
inline std::size_t run_oracle_pairs(std::size_t wanted, std::size_t max_tokens,
                                    const std::function<void(const OraclePair&)>& seen) {
  std::size_t done = 0;
  for (std::uint64_t seed = 0; done < wanted; ++seed) {
    const ValidatedModel model = validate_or_throw(random_model(seed));
    const Grammar grammar = generate_grammar(model);
    SentenceGenerator gen(grammar, seed);
    auto tokens = gen.walk(max_tokens);
    if (!tokens) continue;
    if (seed % 2 == 1) tokens = gen.mutate(*tokens);
    if (tokens->size() > max_tokens) continue;
    OraclePair pair{seed, SentenceGenerator::join(*tokens), {}};
    pair.report = compare_with_oracle(model, pair.input);
    if (pair.report.skipped) continue;
    ++done;
    seen(pair);
  }
  return done;
}

}  // namespace mcc::test

#endif  // MCC_TESTS_SUPPORT_HPP_
