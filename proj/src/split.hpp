#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bio.hpp"
#include "document.hpp"

namespace deid {

struct CorpusSplit {
  Corpus train, dev, test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.72, 0.08, 0.20};
};

// Shares of n under largest-remainder rounding; ties go to the earlier slot.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios);

// Document-level shuffle then cut. Ratios must sum to 1 within 1e-9.
CorpusSplit split_corpus(const Corpus& docs, const std::array<double, 3>& ratios,
                         std::uint64_t seed);

// Sentence-level training subset of `percent` (1..100) percent, rounded down
// but never empty. Subsets for one seed are nested: every sentence of a
// smaller percentage is also in any larger one. Corpus order is kept.
std::vector<LabelledSentence> subsample(const std::vector<LabelledSentence>& sentences,
                                        int percent, std::uint64_t seed);
std::vector<LabelledSentence> subsample_train(const CorpusSplit& split, int percent,
                                              std::uint64_t seed);

// All labelled sentences of a corpus, in document order.
std::vector<LabelledSentence> labelled_sentences(const Corpus& corpus);

// Order-sensitive digest of a sentence subset (document id + sentence index).
std::uint64_t subset_hash(const std::vector<LabelledSentence>& subset);

}  // namespace deid
