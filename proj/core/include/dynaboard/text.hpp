#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dynaboard {

// A text split into alternating word and non-word runs; concatenating every
// token's text reproduces the input exactly. Words are runs of letters,
// digits, and non-ASCII bytes, with inner apostrophes ("don't").
struct Token {
  std::string text;
  bool is_word = false;
  std::size_t offset = 0;  // byte offset in the source text
};

std::vector<Token> tokenize(std::string_view text);
std::string join_tokens(const std::vector<Token>& tokens);

bool is_ascii(std::string_view s);
bool is_capitalized(std::string_view word);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

// Carries the casing of `original` over to `replacement`: all-caps stays
// all-caps, a leading capital stays a leading capital.
std::string match_case(std::string_view replacement, std::string_view original);

// mt19937_64 plus bounded sampling that does not depend on the standard
// library's distribution implementations, so seeded output is identical
// across toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Seed for one (seed, key...) combination.
  static std::uint64_t derive(std::uint64_t seed, std::string_view a, std::string_view b = {});

  // Uniform in [0, n). n must be > 0.
  std::size_t uniform(std::size_t n);

  // k distinct indices from [0, n), in ascending order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dynaboard
