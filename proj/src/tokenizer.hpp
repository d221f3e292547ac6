#pragma once

#include <optional>
#include <string>
#include <vector>

#include "document.hpp"

namespace deid {

// Externally produced linguistic annotations; absent unless imported.
struct TokenFeatures {
  std::optional<std::string> lemma;
  std::optional<std::string> pos;
  std::optional<std::string> ner;

  bool operator==(const TokenFeatures&) const = default;
};

struct Token {
  std::string surface;  // UTF-8
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t sentence_index = 0;
  TokenFeatures features;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

// Whitespace-delimited runs of letters and digits; every other character is
// its own token. Digit groups joined by / : . , or - stay whole, so dates,
// times and decimals are single tokens.
std::vector<Token> tokenize(std::u32string_view text);
std::vector<Token> tokenize(const std::string& utf8);

// Breaks after . ! ? (except after a known abbreviation such as "Dr") and at
// newlines. A break never falls inside one of the document's annotations.
std::vector<Sentence> split_sentences(const Document& doc);

}  // namespace deid
