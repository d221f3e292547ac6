#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace deid {

namespace {

Document tag_document(const Document& in, const Tagger& tagger) {
  Document raw;
  raw.id = in.id;
  raw.text = in.text;
  auto sentences = split_sentences(raw);
  std::vector<LabelSequence> labels;
  labels.reserve(sentences.size());
  for (const auto& s : sentences) labels.push_back(tagger.tag(s));
  raw.annotations = decode_document(raw, sentences, labels, RepairPolicy::kIAsB);
  return raw;
}

}  // namespace

Corpus tag_corpus(const Corpus& docs, const Tagger& tagger, int threads) {
  Corpus out(docs.size());
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, docs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t k) {
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < docs.size();) out[i] = tag_document(docs[i], tagger);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace deid
