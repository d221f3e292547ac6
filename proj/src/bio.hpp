#pragma once

#include <vector>

#include "document.hpp"
#include "labels.hpp"
#include "tokenizer.hpp"

namespace deid {

enum class RepairPolicy {
  kIAsB,    // an I-X without an open X span starts a new span
  kStrict,  // ... raises kIllFormedSequence
};

struct LabelledSentence {
  Sentence sentence;
  LabelSequence labels;

  bool operator==(const LabelledSentence&) const = default;
};

// Labels the sentence's tokens from annotations. A token belongs to an
// annotation when their character ranges intersect, which snaps partial
// boundaries outward to whole tokens.
LabelSequence encode_bio(const Sentence& sentence, const std::vector<Annotation>& annotations);

// Like encode_bio, but a token already claimed by an earlier annotation is
// left to it instead of raising kOverlap. Used for predictions, which may
// collide once snapped to tokens.
LabelSequence encode_bio_first_wins(const Sentence& sentence,
                                    const std::vector<Annotation>& annotations);

// Maximal B-I* runs become annotations spanning first to last token. The
// result carries offsets and categories only; see attach_surfaces().
std::vector<Annotation> decode_bio(const std::vector<Token>& tokens, const LabelSequence& labels,
                                   RepairPolicy repair = RepairPolicy::kIAsB);

// True when no I-X follows anything other than B-X or I-X.
bool is_well_formed(const LabelSequence& labels);

// Fills surfaces from the document text and assigns T1..Tn ids.
void attach_surfaces(const Document& doc, std::vector<Annotation>& anns);

// Sentence split plus gold labels for one document.
std::vector<LabelledSentence> encode_document(const Document& doc);

// Inverse of encode_document over a document's sentences and labels.
std::vector<Annotation> decode_document(const Document& doc,
                                        const std::vector<Sentence>& sentences,
                                        const std::vector<LabelSequence>& labels,
                                        RepairPolicy repair = RepairPolicy::kIAsB);

// The document's annotations with boundaries widened to whole tokens; this is
// what a BIO round trip can reproduce.
std::vector<Annotation> snap_annotations(const Document& doc);

}  // namespace deid
