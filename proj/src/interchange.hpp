#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labels.hpp"
#include "tokenizer.hpp"

namespace deid {

// One sentence of the token-per-row TSV exchanged with external taggers.
// Label sequences are either empty (column absent / all '-') or one per token.
struct InterchangeSentence {
  Sentence sentence;
  LabelSequence gold;
  LabelSequence pred;

  bool operator==(const InterchangeSentence&) const = default;
};

struct InterchangeFile {
  bool has_lemma = false, has_pos = false, has_ner = false;
  std::vector<InterchangeSentence> sentences;

  bool operator==(const InterchangeFile&) const = default;
};

// Format:
//   # columns: token start end gold pred [lemma pos ner]
//   # doc: <id>            (optional; applies to following sentences)
//   <one token per row, tab separated, '-' for absent cells>
//   <blank line between sentences>
// Labels are validated against `labels` when given (kLabelVocabulary).
InterchangeFile parse_interchange(const std::string& content, const LabelSet* labels = nullptr);
InterchangeFile read_interchange(const std::string& path, const LabelSet* labels = nullptr);

std::string format_interchange(const InterchangeFile& file);
void write_interchange(const std::string& path, const InterchangeFile& file);

}  // namespace deid
