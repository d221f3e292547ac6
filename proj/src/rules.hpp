#pragma once

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "document.hpp"
#include "labels.hpp"
#include "tokenizer.hpp"

namespace deid::rules {

// Case-folded phrases; each phrase is its tokens joined by single spaces.
class Gazetteer {
 public:
  void add(const std::string& surface);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_phrase_len() const { return max_len_; }
  const std::set<std::string>& entries() const { return entries_; }
  bool contains(const std::string& phrase) const;

  // Length in tokens of the longest entry starting at `i`, 0 when none.
  std::size_t longest_match(const std::vector<std::string>& folded, std::size_t i) const;

 private:
  std::set<std::string> entries_;
  std::size_t max_len_ = 0;
};

struct RuleOptions {
  std::size_t window = 3;          // tokens inspected by the regex detectors
  bool extended_age_qualifiers = true;   // "4 años y medio"
  bool doctor_includes_honorific = true; // "Dra Lopez" rather than "Lopez"
};

struct Span {
  std::string category;
  std::size_t begin = 0;  // token index
  std::size_t length = 0;

  bool operator==(const Span&) const = default;
};

class RuleSet {
 public:
  RuleSet();

  // Date, Time and Age patterns (ECMAScript, matched against the window's
  // tokens joined by single spaces) plus the Doctor honorific trigger.
  static std::map<std::string, std::vector<std::string>> default_patterns();

  void set_patterns(const std::string& category, std::vector<std::string> patterns);
  const std::map<std::string, std::vector<std::string>>& patterns() const { return patterns_; }

  std::map<std::string, Gazetteer> gazetteers;
  std::vector<std::string> name_list;
  RuleOptions options;

  void set_name_list(std::vector<std::string> names);
  const Gazetteer& names() const { return names_; }

  std::optional<std::size_t> match_date(const std::vector<Token>& toks, std::size_t i) const;
  std::optional<std::size_t> match_time(const std::vector<Token>& toks, std::size_t i) const;
  std::optional<std::size_t> match_age(const std::vector<Token>& toks, std::size_t i) const;
  // Returns (first token, length); the span may start after `i` when the
  // honorific is excluded.
  std::optional<Span> match_doctor(const std::vector<Token>& toks, std::size_t i) const;

  // Non-overlapping spans chosen by category priority, then position.
  std::vector<Span> find_spans(const Sentence& sentence) const;

 private:
  std::optional<std::size_t> match_regex(const std::string& category,
                                         const std::vector<Token>& toks, std::size_t i,
                                         std::size_t window) const;

  std::map<std::string, std::vector<std::string>> patterns_;
  std::map<std::string, std::vector<std::regex>> compiled_;
  Gazetteer names_;
};

// Detection order when spans compete for the same tokens.
const std::vector<std::string>& category_priority();

// Categories looked up in gazetteers compiled from training data.
const std::vector<std::string>& gazetteer_categories();

std::map<std::string, Gazetteer> build_gazetteers(const Corpus& train,
                                                  const std::vector<std::string>& categories);

// One name per line; order kept, duplicates dropped. kFileMissing if absent.
std::vector<std::string> load_name_list(const std::string& path);

LabelSequence tag_rules(const Sentence& sentence, const RuleSet& rules);

// Plain-text resources: gazetteer_<Cat>.txt, regex_<Cat>.txt, names.txt,
// options.txt (key=value).
void save_rules(const RuleSet& rules, const std::string& dir);
RuleSet load_rules(const std::string& dir);

RuleSet build_rules(const Corpus& train, std::vector<std::string> names);

}  // namespace deid::rules
