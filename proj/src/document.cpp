#include "document.hpp"

#include <algorithm>
#include <limits>

#include "error.hpp"
#include "unicode.hpp"

namespace deid {

std::string Document::utf8_text() const { return unicode::encode(text); }

std::string Document::slice(std::size_t start, std::size_t end) const {
  if (start > end || end > text.size())
    throw Error(ErrorCode::kOffsetOutOfRange,
                "span [" + std::to_string(start) + "," + std::to_string(end) +
                    ") outside document '" + id + "' of length " +
                    std::to_string(text.size()));
  return unicode::encode(std::u32string_view(text).substr(start, end - start));
}

void validate(const Document& doc, const LabelSet& labels) {
  for (const auto& a : doc.annotations) {
    if (a.start >= a.end || a.end > doc.text.size())
      throw Error(ErrorCode::kOffsetOutOfRange,
                  doc.id + ": annotation " + a.id + " has invalid offsets");
    if (doc.slice(a.start, a.end) != a.surface)
      throw Error(ErrorCode::kOffsetMismatch,
                  doc.id + ": annotation " + a.id + " surface '" + a.surface +
                      "' differs from text '" + doc.slice(a.start, a.end) + "'");
    labels.require(a.category);
  }
  auto sorted = doc.annotations;
  std::sort(sorted.begin(), sorted.end(),
            [](const Annotation& x, const Annotation& y) { return x.start < y.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i - 1].overlaps(sorted[i]))
      throw Error(ErrorCode::kOverlap, doc.id + ": annotations " + sorted[i - 1].id +
                                           " and " + sorted[i].id + " overlap");
}

std::vector<Annotation> normalize_annotations(std::vector<Annotation> anns) {
  std::vector<std::size_t> order(anns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (anns[x].length() != anns[y].length()) return anns[x].length() > anns[y].length();
    return anns[x].start < anns[y].start;
  });
  std::vector<Annotation> kept;
  for (auto i : order) {
    bool clash = std::any_of(kept.begin(), kept.end(),
                             [&](const Annotation& k) { return k.overlaps(anns[i]); });
    if (!clash) kept.push_back(anns[i]);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Annotation& x, const Annotation& y) { return x.start < y.start; });
  return kept;
}

std::size_t annotation_number(const std::string& id) {
  if (id.size() < 2 || id[0] != 'T') return std::numeric_limits<std::size_t>::max();
  std::size_t n = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (!unicode::is_digit(static_cast<unsigned char>(id[i])))
      return std::numeric_limits<std::size_t>::max();
    n = n * 10 + static_cast<std::size_t>(id[i] - '0');
  }
  return n;
}

void renumber(std::vector<Annotation>& anns) {
  std::stable_sort(anns.begin(), anns.end(),
                   [](const Annotation& x, const Annotation& y) { return x.start < y.start; });
  for (std::size_t i = 0; i < anns.size(); ++i) anns[i].id = "T" + std::to_string(i + 1);
}

namespace {

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  void str(const std::string& s) {
    std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void num(std::uint64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t hash_corpus(const Corpus& corpus) {
  Fnv f;
  f.num(corpus.size());
  for (const auto& d : corpus) {
    f.str(d.id);
    f.str(d.utf8_text());
    f.num(d.annotations.size());
    for (const auto& a : d.annotations) {
      f.str(a.id);
      f.str(a.category);
      f.num(a.start);
      f.num(a.end);
    }
  }
  return f.h;
}

}  // namespace deid
