#include "split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "random.hpp"

namespace deid {

std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    double exact = static_cast<double>(n) * ratios[k];
    // Guard against 0.72*100 = 71.99999999999999.
    double fl = std::floor(exact + 1e-9);
    sizes[k] = static_cast<std::size_t>(fl);
    rem[k] = exact - fl;
    assigned += sizes[k];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++sizes[order[k]];
  return sizes;
}

CorpusSplit split_corpus(const Corpus& docs, const std::array<double, 3>& ratios,
                         std::uint64_t seed) {
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot split an empty corpus");
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 ||
      std::any_of(ratios.begin(), ratios.end(), [](double r) { return r < 0; }))
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be non-negative and sum to 1");

  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);

  auto sizes = apportion(docs.size(), ratios);
  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  std::size_t k = 0;
  for (std::size_t i = 0; i < sizes[0]; ++i) split.train.push_back(docs[order[k++]]);
  for (std::size_t i = 0; i < sizes[1]; ++i) split.dev.push_back(docs[order[k++]]);
  for (std::size_t i = 0; i < sizes[2]; ++i) split.test.push_back(docs[order[k++]]);
  return split;
}

std::vector<LabelledSentence> subsample(const std::vector<LabelledSentence>& sentences,
                                        int percent, std::uint64_t seed) {
  if (percent < 1 || percent > 100)
    throw Error(ErrorCode::kInvalidArgument,
                "training fraction must be within 1..100, got " + std::to_string(percent));
  if (percent == 100) return sentences;
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5ULL));
  shuffle(order, rng);
  std::size_t take = sentences.size() * static_cast<std::size_t>(percent) / 100;
  if (take == 0 && !sentences.empty()) take = 1;
  order.resize(take);
  // Keep corpus order inside the subset so training sees sentences in the
  // same sequence regardless of which fraction selected them.
  std::sort(order.begin(), order.end());
  std::vector<LabelledSentence> out;
  out.reserve(take);
  for (auto i : order) out.push_back(sentences[i]);
  return out;
}

std::vector<LabelledSentence> labelled_sentences(const Corpus& corpus) {
  std::vector<LabelledSentence> out;
  for (const auto& d : corpus) {
    auto part = encode_document(d);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<LabelledSentence> subsample_train(const CorpusSplit& split, int percent,
                                              std::uint64_t seed) {
  return subsample(labelled_sentences(split.train), percent, seed);
}

std::uint64_t subset_hash(const std::vector<LabelledSentence>& subset) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : subset) {
    for (char c : s.sentence.doc_id) feed(static_cast<unsigned char>(c));
    feed(s.sentence.index);
  }
  return h;
}

}  // namespace deid
