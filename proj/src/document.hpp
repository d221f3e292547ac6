#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "labels.hpp"

namespace deid {

// Character offsets count Unicode scalar values, end exclusive.
struct Annotation {
  std::string id;        // BRAT id, e.g. "T3"
  std::string category;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;   // UTF-8

  std::size_t length() const { return end - start; }
  bool overlaps(const Annotation& o) const { return start < o.end && o.start < end; }
  bool operator==(const Annotation&) const = default;
};

struct Document {
  std::string id;
  std::u32string text;
  std::vector<Annotation> annotations;

  std::string utf8_text() const;
  // UTF-8 slice of [start, end); throws kOffsetOutOfRange when out of bounds.
  std::string slice(std::size_t start, std::size_t end) const;

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

// Checks offsets, surfaces, labels and flatness; throws on the first defect.
void validate(const Document& doc, const LabelSet& labels);

// Resolves overlaps by keeping the longest span (ties: earliest start) and
// returns the survivors ordered by start offset.
std::vector<Annotation> normalize_annotations(std::vector<Annotation> anns);

// Numeric part of a "T<n>" id, or SIZE_MAX when the id has another shape.
std::size_t annotation_number(const std::string& id);

// Assigns T1..Tn in offset order.
void renumber(std::vector<Annotation>& anns);

// Stable 64-bit FNV-1a digest of ids, text and annotations.
std::uint64_t hash_corpus(const Corpus& corpus);

}  // namespace deid
