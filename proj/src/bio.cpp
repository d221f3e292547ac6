#include "bio.hpp"

#include "error.hpp"

namespace deid {

namespace {

LabelSequence encode(const Sentence& sentence, const std::vector<Annotation>& annotations,
                     bool first_wins) {
  const auto& toks = sentence.tokens;
  LabelSequence labels(toks.size());
  std::vector<bool> claimed(toks.size(), false);
  for (const auto& a : annotations) {
    bool first = true;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].start >= a.end || toks[i].end <= a.start) continue;
      if (claimed[i] && first_wins) continue;
      if (claimed[i])
        throw Error(ErrorCode::kOverlap, "token '" + toks[i].surface + "' at " +
                                             std::to_string(toks[i].start) +
                                             " is claimed by two annotations");
      claimed[i] = true;
      labels[i] = first ? BioLabel::begin(a.category) : BioLabel::inside(a.category);
      first = false;
    }
  }
  return labels;
}

}  // namespace

LabelSequence encode_bio(const Sentence& sentence, const std::vector<Annotation>& annotations) {
  return encode(sentence, annotations, false);
}

LabelSequence encode_bio_first_wins(const Sentence& sentence,
                                    const std::vector<Annotation>& annotations) {
  return encode(sentence, annotations, true);
}

std::vector<Annotation> decode_bio(const std::vector<Token>& tokens, const LabelSequence& labels,
                                   RepairPolicy repair) {
  if (tokens.size() != labels.size())
    throw Error(ErrorCode::kLengthMismatch, "decode_bio: " + std::to_string(tokens.size()) +
                                                " tokens but " + std::to_string(labels.size()) +
                                                " labels");
  std::vector<Annotation> out;
  bool open = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& l = labels[i];
    if (l.is_outside()) {
      open = false;
      continue;
    }
    bool continues = l.prefix == BioPrefix::kI && open && out.back().category == l.category;
    if (l.prefix == BioPrefix::kI && !continues && repair == RepairPolicy::kStrict)
      throw Error(ErrorCode::kIllFormedSequence,
                  "I-" + l.category + " at position " + std::to_string(i) +
                      " does not continue a " + l.category + " span");
    if (continues) {
      out.back().end = tokens[i].end;
    } else {
      Annotation a;
      a.category = l.category;
      a.start = tokens[i].start;
      a.end = tokens[i].end;
      out.push_back(std::move(a));
      open = true;
    }
  }
  return out;
}

bool is_well_formed(const LabelSequence& labels) {
  const BioLabel* prev = nullptr;
  for (const auto& l : labels) {
    if (l.prefix == BioPrefix::kI &&
        (prev == nullptr || prev->is_outside() || prev->category != l.category))
      return false;
    prev = &l;
  }
  return true;
}

void attach_surfaces(const Document& doc, std::vector<Annotation>& anns) {
  renumber(anns);
  for (auto& a : anns) a.surface = doc.slice(a.start, a.end);
}

std::vector<LabelledSentence> encode_document(const Document& doc) {
  std::vector<LabelledSentence> out;
  for (auto& s : split_sentences(doc)) {
    auto labels = encode_bio(s, doc.annotations);
    out.push_back({std::move(s), std::move(labels)});
  }
  return out;
}

std::vector<Annotation> decode_document(const Document& doc,
                                        const std::vector<Sentence>& sentences,
                                        const std::vector<LabelSequence>& labels,
                                        RepairPolicy repair) {
  if (sentences.size() != labels.size())
    throw Error(ErrorCode::kLengthMismatch, "decode_document: sentence/label count mismatch");
  std::vector<Annotation> anns;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto part = decode_bio(sentences[i].tokens, labels[i], repair);
    anns.insert(anns.end(), part.begin(), part.end());
  }
  attach_surfaces(doc, anns);
  return anns;
}

std::vector<Annotation> snap_annotations(const Document& doc) {
  auto tokens = tokenize(std::u32string_view(doc.text));
  std::vector<Annotation> out;
  for (const auto& a : doc.annotations) {
    Annotation s = a;
    bool any = false;
    for (const auto& t : tokens) {
      if (t.start >= a.end || t.end <= a.start) continue;
      if (!any) s.start = t.start;
      s.end = t.end;
      any = true;
    }
    if (!any) continue;
    out.push_back(std::move(s));
  }
  attach_surfaces(doc, out);
  return out;
}

}  // namespace deid
