#pragma once

#include <string>
#include <vector>

#include "tokenizer.hpp"

namespace deid::crf {

// Named attribute with a value; binary attributes carry 1.
struct Attribute {
  std::string name;
  double value = 1.0;

  bool operator==(const Attribute&) const = default;
};

using FeatureVector = std::vector<Attribute>;

// Offsets of the tokens whose features describe a position.
using Window = std::vector<int>;
inline Window default_window() { return {-1, 0, 1}; }

// Features of the token at `index`. Own features are unprefixed; a
// neighbour's carry its offset, e.g. "-1:suffix3=ños". Zero-valued
// attributes are omitted. Throws kIndexOutOfRange.
FeatureVector extract_features(const Sentence& sentence, std::size_t index,
                               const Window& window = default_window());

// Same result for every position at once, sharing the per-token work.
std::vector<FeatureVector> extract_sentence_features(const Sentence& sentence,
                                                     const Window& window = default_window());

// Looks up an attribute's value, 0 when absent.
double feature_value(const FeatureVector& fv, const std::string& name);

}  // namespace deid::crf
