#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "document.hpp"
#include "labels.hpp"

namespace deid::anon {

enum class Mode { kMask, kPlaceholder, kSurrogate };

struct Policy {
  Mode mode = Mode::kMask;
  char32_t mask_char = U'X';
  // "{CAT}" becomes the upper-cased category. With fit_placeholder_length,
  // the dash runs around it stretch or shrink (at least one each side) so the
  // placeholder is as long as the span it replaces.
  std::string placeholder_format = "[--{CAT}--]";
  bool fit_placeholder_length = true;
  std::uint64_t surrogate_seed = 0;
  // Inclusive ranges; one draw per document.
  int date_shift_min = -365, date_shift_max = 365;
  int age_shift_min = -3, age_shift_max = 3;
};

// Pools the surrogate generator samples from.
struct SurrogateResources {
  std::vector<std::string> female_names;
  std::vector<std::string> male_names;
  std::vector<std::string> surnames;
  std::map<std::string, std::vector<std::string>> gazetteers;  // category -> phrases
  LabelSet labels = LabelSet::nubes();
};

struct DocumentShift {
  int days = 0;
  int years = 0;
};

// Deterministic per (seed, document id).
DocumentShift document_shift(const std::string& doc_id, const Policy& policy);

struct Replacement {
  std::size_t source_start = 0, source_end = 0;
  std::size_t output_start = 0, output_end = 0;
  std::string category;
  std::string original;
  std::string replacement;
};

struct Anonymised {
  std::string text;  // UTF-8
  std::vector<Replacement> replacements;  // in text order
};

std::string placeholder(const std::string& category, std::size_t span_length, const Policy& policy);

// Format-preserving fake value for one span. Dates move by shift.days, ages
// by shift.years; names are drawn from the resources keeping the span's
// article, honorific and gender; gazetteer categories draw another entry of
// the same category. Categories without a strategy get a placeholder.
// Throws kUnknownCategory for categories outside resources.labels.
std::string surrogate(const Annotation& annotation, const Policy& policy,
                      const SurrogateResources& resources, const DocumentShift& shift,
                      std::uint64_t span_seed);

// Text outside the spans is copied unchanged. Throws kOverlap and
// kOffsetOutOfRange.
Anonymised anonymise(const Document& doc, const std::vector<Annotation>& annotations,
                     const Policy& policy, const SurrogateResources& resources = {});

// Rebuilds the source text from an anonymised text and its side table.
std::string restore(const Anonymised& result);

// Side table as JSON (sensitive: it contains the original values).
std::string mapping_json(const std::string& doc_id, const Anonymised& result);

// Surfaces of `annotations` that still occur in `output` as whole words (not
// touching a letter or digit on either side, so "8" is not found in "48").
std::vector<std::string> leaked_surfaces(const std::string& output,
                                         const std::vector<Annotation>& annotations);

// Calendar helpers (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

}  // namespace deid::anon
