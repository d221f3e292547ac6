#include "tokenizer.hpp"

#include <algorithm>
#include <array>

#include "unicode.hpp"

namespace deid {

namespace {

bool is_number_joiner(char32_t c) {
  return c == U'/' || c == U':' || c == U'.' || c == U',' || c == U'-';
}

constexpr std::array<std::u32string_view, 14> kAbbreviations = {
    U"dr", U"dra", U"sr", U"sra", U"srta", U"dña", U"dn", U"d", U"nº", U"núm", U"aprox",
    U"etc", U"pág", U"vs"};

bool is_abbreviation(std::u32string_view token) {
  auto lower = unicode::to_lower(token);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) !=
         kAbbreviations.end();
}

}  // namespace

std::vector<Token> tokenize(std::u32string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char32_t c = text[i];
    if (unicode::is_space(c) || c < 0x20) {
      ++i;
      continue;
    }
    std::size_t b = i;
    if (unicode::is_alnum(c)) {
      ++i;
      while (i < n) {
        if (unicode::is_alnum(text[i])) {
          ++i;
        } else if (is_number_joiner(text[i]) && unicode::is_digit(text[i - 1]) && i + 1 < n &&
                   unicode::is_digit(text[i + 1])) {
          i += 2;
        } else {
          break;
        }
      }
    } else {
      ++i;
    }
    Token t;
    t.start = b;
    t.end = i;
    t.surface = unicode::encode(text.substr(b, i - b));
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::vector<Token> tokenize(const std::string& utf8) {
  auto text = unicode::decode(utf8);
  return tokenize(std::u32string_view(text));
}

std::vector<Sentence> split_sentences(const Document& doc) {
  auto tokens = tokenize(std::u32string_view(doc.text));
  std::vector<Sentence> out;
  if (tokens.empty()) return out;

  auto inside_annotation = [&](std::size_t left_end, std::size_t right_start) {
    return std::any_of(doc.annotations.begin(), doc.annotations.end(), [&](const Annotation& a) {
      return a.start < left_end && a.end > right_start;
    });
  };

  Sentence cur;
  cur.doc_id = doc.id;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    auto tok = std::move(tokens[k]);
    tok.sentence_index = out.size();
    const std::u32string_view surface(doc.text.data() + tok.start, tok.end - tok.start);
    const std::size_t tok_end = tok.end;
    cur.tokens.push_back(std::move(tok));
    if (k + 1 == tokens.size()) break;

    bool boundary = false;
    if (surface == U"." || surface == U"!" || surface == U"?") {
      boundary = !(surface == U"." && cur.tokens.size() >= 2 &&
                   is_abbreviation(unicode::decode(cur.tokens[cur.tokens.size() - 2].surface)));
    }
    const std::size_t next_start = tokens[k + 1].start;
    for (std::size_t p = tok_end; p < next_start && !boundary; ++p)
      if (doc.text[p] == U'\n') boundary = true;

    if (boundary && !inside_annotation(tok_end, next_start)) {
      cur.index = out.size();
      out.push_back(std::move(cur));
      cur = Sentence{};
      cur.doc_id = doc.id;
    }
  }
  cur.index = out.size();
  for (auto& t : cur.tokens) t.sentence_index = cur.index;
  out.push_back(std::move(cur));
  return out;
}

}  // namespace deid
