#include <sstream>

#include "doctest.h"

#include "ablation.hpp"
#include "error.hpp"
#include "synth.hpp"

using namespace deid;

namespace {

CorpusSplit small_split() {
  auto cfg = synth::GeneratorConfig::defaults();
  cfg.seed = 17;
  cfg.n_documents = 60;
  return split_corpus(synth::generate(cfg), {0.72, 0.08, 0.20}, 3);
}

crf::CrfConfig quick_crf() {
  crf::CrfConfig c;
  c.max_iterations = 15;
  c.threads = 1;
  return c;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("subsets are nested and shared across systems") {
  auto split = small_split();
  auto cats = LabelSet::nubes().categories();
  std::vector<TrainableSystem> systems{crf_system(quick_crf()), rules_system({"María", "José"})};
  auto report = ablation_run(systems, split, {10, 50, 100}, 5, cats);
  CHECK(report.entries.size() == 6);
  for (int f : {10, 50, 100}) {
    auto* c = report.find("crf", f);
    auto* r = report.find("rules", f);
    REQUIRE(c);
    REQUIRE(r);
    CHECK(c->subset_hash == r->subset_hash);
    CHECK(c->train_sentences == r->train_sentences);
  }
  CHECK(report.find("crf", 10)->train_sentences < report.find("crf", 100)->train_sentences);
  auto small = subsample_train(split, 10, 5), large = subsample_train(split, 50, 5);
  REQUIRE(small.size() <= large.size());
  for (const auto& s : small)
    CHECK(std::any_of(large.begin(), large.end(), [&](const LabelledSentence& t) {
      return t.sentence.doc_id == s.sentence.doc_id && t.sentence.index == s.sentence.index;
    }));

  auto csv = report.to_csv();
  CHECK(csv.rfind(std::string(eval::kReportHeader), 0) == 0);
  CHECK(lines(csv) == 1 + 6 * 5);
  auto deltas = report.deltas_csv();
  CHECK(lines(deltas) == 1 + 6 * 5);
  CHECK(deltas.find("crf,100,token-detection,") != std::string::npos);
}

TEST_CASE("the full fraction equals a single run") {
  auto split = small_split();
  auto cats = LabelSet::nubes().categories();
  auto system = crf_system(quick_crf());
  auto report = ablation_run({system}, split, {100}, 9, cats);
  REQUIRE(report.entries.size() == 1);

  auto train = labelled_sentences(split.train);
  auto dev = labelled_sentences(split.dev);
  auto tagger = system.train(subsample_train(split, 100, 9), dev);
  auto pred = tag_corpus(split.test, *tagger, 1);
  auto single = eval::evaluate(eval::align_corpora(split.test, pred), cats);
  CHECK(report.entries[0].train_sentences == train.size());
  CHECK(report.entries[0].report.csv_rows("crf", 100) == single.csv_rows("crf", 100));
}

TEST_CASE("training failures name the system and fraction") {
  auto split = small_split();
  TrainableSystem broken{"broken", [](const auto&, const auto&) -> std::unique_ptr<Tagger> {
                           throw Error(ErrorCode::kEmptyTrainingSet, "nothing to learn");
                         }};
  try {
    ablation_run({broken}, split, {20}, 1, LabelSet::nubes().categories());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTrainingSet);
    std::string msg = e.what();
    CHECK(msg.find("broken") != std::string::npos);
    CHECK(msg.find("20") != std::string::npos);
  }
}
