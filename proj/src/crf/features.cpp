#include "crf/features.hpp"

#include <algorithm>

#include "error.hpp"
#include "unicode.hpp"

namespace deid::crf {

namespace {

std::string casing(const std::u32string& cps) {
  std::size_t upper = 0, lower = 0;
  for (char32_t c : cps) {
    if (unicode::is_upper(c)) ++upper;
    else if (unicode::is_lower(c)) ++lower;
  }
  if (upper == 0 && lower == 0) return "none";
  if (upper == 0) return "lower";
  if (lower == 0) return "upper";
  bool title = unicode::is_upper(cps[0]);
  for (std::size_t i = 1; i < cps.size() && title; ++i)
    if (unicode::is_upper(cps[i])) title = false;
  return title ? "title" : "mixed";
}

bool is_number(const std::u32string& cps) {
  if (cps.empty() || !unicode::is_digit(cps.front()) || !unicode::is_digit(cps.back()))
    return false;
  int separators = 0;
  for (char32_t c : cps) {
    if (unicode::is_digit(c)) continue;
    if ((c == U'.' || c == U',') && ++separators == 1) continue;
    return false;
  }
  return true;
}


// Features that depend only on the token itself.
FeatureVector token_features(const Token& tok) {
  FeatureVector fv;
  const auto cps = unicode::decode(tok.surface);
  const std::size_t n = cps.size();
  auto head = [&](std::size_t k) { return unicode::encode(std::u32string_view(cps).substr(0, std::min(k, n))); };
  auto tail = [&](std::size_t k) {
    std::size_t m = std::min(k, n);
    return unicode::encode(std::u32string_view(cps).substr(n - m, m));
  };
  fv.push_back({"prefix2=" + head(2)});
  fv.push_back({"prefix3=" + head(3)});
  fv.push_back({"suffix2=" + tail(2)});
  fv.push_back({"suffix3=" + tail(3)});
  fv.push_back({"len=" + std::to_string(n)});

  std::size_t letters = 0, digits = 0, puncts = 0, uppers = 0;
  bool at = false;
  for (char32_t c : cps) {
    if (unicode::is_letter(c)) ++letters;
    if (unicode::is_digit(c)) ++digits;
    if (unicode::is_punct(c)) ++puncts;
    if (unicode::is_upper(c)) ++uppers;
    if (c == U'@') at = true;
  }
  if (n > 0 && letters == n) fv.push_back({"is_alpha"});
  if (is_number(cps)) fv.push_back({"is_number"});
  if (n > 0 && puncts == n) fv.push_back({"is_punct"});
  if (at) fv.push_back({"contains_at"});
  fv.push_back({"casing=" + casing(cps)});
  if (n > 0) {
    double len = static_cast<double>(n);
    if (uppers) fv.push_back({"upper_ratio", uppers / len});
    if (digits) fv.push_back({"digit_ratio", digits / len});
    if (puncts) fv.push_back({"punct_ratio", puncts / len});
  }
  if (tok.features.lemma) fv.push_back({"lemma=" + *tok.features.lemma});
  if (tok.features.pos) fv.push_back({"pos=" + *tok.features.pos});
  if (tok.features.ner) fv.push_back({"ner=" + *tok.features.ner});
  return fv;
}

void compose(const Sentence& sentence, std::size_t index, const Window& window,
             const std::vector<FeatureVector>& per_token, FeatureVector& out) {
  const std::size_t n = sentence.tokens.size();
  out.push_back({"bias"});
  out.push_back({"sent_len=" + std::to_string(n)});
  if (index == 0) out.push_back({"BOS"});
  if (index + 1 == n) out.push_back({"EOS"});
  for (int off : window) {
    auto pos = static_cast<long long>(index) + off;
    if (pos < 0 || pos >= static_cast<long long>(n)) continue;
    const auto& tf = per_token[static_cast<std::size_t>(pos)];
    if (off == 0) {
      out.insert(out.end(), tf.begin(), tf.end());
    } else {
      std::string prefix = (off > 0 ? "+" : "") + std::to_string(off) + ":";
      for (const auto& a : tf) out.push_back({prefix + a.name, a.value});
    }
  }
}

}  // namespace

FeatureVector extract_features(const Sentence& sentence, std::size_t index, const Window& window) {
  if (index >= sentence.tokens.size())
    throw Error(ErrorCode::kIndexOutOfRange, "token index " + std::to_string(index) +
                                                 " outside sentence of " +
                                                 std::to_string(sentence.tokens.size()));
  std::vector<FeatureVector> per_token(sentence.tokens.size());
  for (int off : window) {
    auto pos = static_cast<long long>(index) + off;
    if (pos >= 0 && pos < static_cast<long long>(sentence.tokens.size()))
      per_token[static_cast<std::size_t>(pos)] = token_features(sentence.tokens[pos]);
  }
  FeatureVector out;
  compose(sentence, index, window, per_token, out);
  return out;
}

std::vector<FeatureVector> extract_sentence_features(const Sentence& sentence,
                                                     const Window& window) {
  std::vector<FeatureVector> per_token;
  per_token.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) per_token.push_back(token_features(t));
  std::vector<FeatureVector> out(sentence.tokens.size());
  for (std::size_t i = 0; i < out.size(); ++i) compose(sentence, i, window, per_token, out[i]);
  return out;
}

double feature_value(const FeatureVector& fv, const std::string& name) {
  for (const auto& a : fv)
    if (a.name == name) return a.value;
  return 0.0;
}

}  // namespace deid::crf
