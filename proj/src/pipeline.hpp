#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bio.hpp"
#include "crf/model.hpp"
#include "rules.hpp"

namespace deid {

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual LabelSequence tag(const Sentence& sentence) const = 0;
};

class RuleTagger : public Tagger {
 public:
  explicit RuleTagger(rules::RuleSet rules) : rules_(std::move(rules)) {}
  LabelSequence tag(const Sentence& s) const override { return rules::tag_rules(s, rules_); }
  const rules::RuleSet& rules() const { return rules_; }

 private:
  rules::RuleSet rules_;
};

class CrfTagger : public Tagger {
 public:
  explicit CrfTagger(crf::CrfModel model) : model_(std::move(model)) {}
  LabelSequence tag(const Sentence& s) const override { return model_.tag(s); }
  const crf::CrfModel& model() const { return model_; }

 private:
  crf::CrfModel model_;
};

// Tags raw text: annotations on the input are ignored for sentence
// splitting, and predictions are decoded with the i-as-b repair. Documents
// are processed in parallel; output order matches input order.
Corpus tag_corpus(const Corpus& docs, const Tagger& tagger, int threads = 0);

}  // namespace deid
