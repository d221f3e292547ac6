#include <cmath>
#include <functional>

#include "doctest.h"

#include "bio.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "oracles.hpp"
#include "random.hpp"
#include "synth.hpp"

using namespace deid;
using eval::Scenario;

namespace {

LabelSequence seq(const std::vector<std::string>& s) {
  LabelSequence out;
  for (const auto& x : s) out.push_back(BioLabel::parse(x));
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

const std::vector<std::string> kCats{"Date", "Age", "Hospital"};

LabelSequence random_labels(Rng& rng, std::size_t n) {
  LabelSequence out;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = uniform_index(rng, 7);
    if (r == 0)
      out.push_back(BioLabel::outside());
    else if (r <= 3)
      out.push_back(BioLabel::begin(kCats[r - 1]));
    else
      out.push_back(BioLabel::inside(kCats[r - 4]));
  }
  return out;
}

std::vector<Annotation> random_spans(Rng& rng) {
  std::vector<Annotation> out;
  auto n = uniform_index(rng, 5);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = uniform_index(rng, 12);
    out.push_back({"", kCats[uniform_index(rng, 3)], s, s + 1 + uniform_index(rng, 3), ""});
  }
  return out;
}

void check_same(const eval::Metrics& m, const oracle::Prf& o) {
  CHECK(m.tp == o.tp);
  CHECK(m.fp == o.fp);
  CHECK(m.fn == o.fn);
  CHECK(m.precision == o.precision);
  CHECK(m.recall == o.recall);
  CHECK(m.f1 == o.f1);
}

}  // namespace

TEST_CASE("token metrics on the Marseille rows") {
  auto gold = seq({"O", "O", "B-Hospital", "I-Hospital", "I-Hospital"});
  auto pred = seq({"O", "O", "B-Hospital", "B-Hospital", "I-Hospital"});
  auto det = eval::token_metrics(gold, pred, Scenario::kTokenDetection);
  CHECK(det.tp == 3);
  CHECK(det.precision == 1.0);
  CHECK(det.recall == 1.0);
  CHECK(det.f1 == 1.0);
  auto rel = eval::token_metrics(gold, pred, Scenario::kTokenRelaxed);
  CHECK(rel.precision == 1.0);
  CHECK(rel.recall == 1.0);
  auto strict = eval::token_metrics(gold, pred, Scenario::kTokenStrict);
  CHECK(strict.tp == 2);
  CHECK(strict.fp == 1);
  CHECK(strict.fn == 1);
  CHECK(strict.precision == doctest::Approx(2.0 / 3));
  CHECK(strict.recall == doctest::Approx(2.0 / 3));
}

TEST_CASE("token metrics degenerate cases") {
  auto gold = seq({"B-Date", "I-Date", "O", "B-Age", "I-Age"});
  for (auto sc : {Scenario::kTokenDetection, Scenario::kTokenRelaxed, Scenario::kTokenStrict}) {
    auto m = eval::token_metrics(gold, gold, sc);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  auto none = eval::token_metrics(gold, LabelSequence(5), Scenario::kTokenDetection);
  CHECK(none.tp == 0);
  CHECK(none.fn == 4);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(code_of([&] { eval::token_metrics(gold, LabelSequence(4), Scenario::kTokenStrict); }) ==
        ErrorCode::kLengthMismatch);
}

TEST_CASE("category mismatch counts once each way") {
  auto m = eval::token_metrics(seq({"B-Date"}), seq({"B-Age"}), Scenario::kTokenRelaxed);
  CHECK(m.tp == 0);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
}

TEST_CASE("metrics agree with the quadratic reference on random cases") {
  Rng rng(2024);
  for (int c = 0; c < 1000; ++c) {
    auto n = 1 + uniform_index(rng, 12);
    auto gold = random_labels(rng, n), pred = random_labels(rng, n);
    double f[3];
    for (int s = 0; s < 3; ++s) {
      auto m = eval::token_metrics(gold, pred, static_cast<Scenario>(s));
      check_same(m, oracle::token_scores(gold, pred, s));
      f[s] = m.f1;
      auto swapped = eval::token_metrics(pred, gold, static_cast<Scenario>(s));
      CHECK(swapped.precision == m.recall);
      CHECK(swapped.recall == m.precision);
    }
    CHECK(f[0] >= f[1]);
    CHECK(f[1] >= f[2]);

    auto gs = oracle::decode(gold), ps = oracle::decode(pred);
    std::vector<Annotation> ga, pa;
    for (const auto& s : gs) ga.push_back({"", s.category, s.begin, s.end, ""});
    for (const auto& s : ps) pa.push_back({"", s.category, s.begin, s.end, ""});
    auto det = eval::entity_metrics(ga, pa, Scenario::kEntityDetection);
    auto cls = eval::entity_metrics(ga, pa, Scenario::kEntityClassification);
    check_same(det, oracle::entity_scores(gs, ps, false));
    check_same(cls, oracle::entity_scores(gs, ps, true));
    CHECK(det.f1 >= cls.f1);
  }
}

TEST_CASE("entity metrics on random span sets") {
  Rng rng(99);
  for (int c = 0; c < 500; ++c) {
    auto ga = normalize_annotations(random_spans(rng)), pa = normalize_annotations(random_spans(rng));
    std::vector<oracle::Span> gs, ps;
    for (const auto& a : ga) gs.push_back({a.start, a.end, a.category});
    for (const auto& a : pa) ps.push_back({a.start, a.end, a.category});
    check_same(eval::entity_metrics(ga, pa, Scenario::kEntityDetection), oracle::entity_scores(gs, ps, false));
    check_same(eval::entity_metrics(ga, pa, Scenario::kEntityClassification),
               oracle::entity_scores(gs, ps, true));
    // Relabelling predictions leaves detection unchanged.
    auto relabelled = pa;
    for (auto& a : relabelled) a.category = "Age";
    CHECK(eval::entity_metrics(ga, relabelled, Scenario::kEntityDetection).tp ==
          eval::entity_metrics(ga, pa, Scenario::kEntityDetection).tp);
  }
}

TEST_CASE("entity metrics") {
  std::vector<Annotation> gold{{"T1", "Date", 12, 19, ""}};
  std::vector<Annotation> pred{{"T1", "Age", 12, 19, ""}};
  auto det = eval::entity_metrics(gold, pred, Scenario::kEntityDetection);
  CHECK(det.tp == 1);
  auto cls = eval::entity_metrics(gold, pred, Scenario::kEntityClassification);
  CHECK(cls.tp == 0);
  CHECK(cls.fp == 1);
  CHECK(cls.fn == 1);

  std::vector<Annotation> g3{{"", "Date", 0, 5, ""}, {"", "Age", 10, 12, ""}, {"", "Date", 20, 25, ""}};
  std::vector<Annotation> p2{{"", "Date", 0, 5, ""}, {"", "Age", 9, 12, ""}};
  auto m = eval::entity_metrics(g3, p2, Scenario::kEntityDetection);
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(1.0 / 3));
  CHECK(m.f1 == doctest::Approx(0.4));

  auto same = eval::entity_metrics(g3, g3, Scenario::kEntityClassification);
  CHECK(same.f1 == 1.0);
}

TEST_CASE("confusion matrix") {
  auto cats = LabelSet::nubes().categories();
  SUBCASE("perfect predictions") {
    auto gold = seq({"B-Date", "I-Date", "O", "B-Age", "B-Hospital"});
    auto cm = eval::confusion_matrix(gold, gold, cats);
    auto norm = cm.normalized();
    for (std::size_t i = 0; i < cm.classes().size(); ++i)
      for (std::size_t j = 0; j < cm.classes().size(); ++j) {
        if (cm.row_total(i) == 0) continue;
        CHECK(norm[i][j] == (i == j ? 1.0 : 0.0));
      }
  }
  SUBCASE("Other leaked entirely") {
    auto gold = seq({"B-Other", "I-Other", "B-Other"});
    auto cm = eval::confusion_matrix(gold, LabelSequence(3), cats);
    auto norm = cm.normalized();
    CHECK(norm[cm.index_of("Other")][cm.index_of("O")] == 1.0);
    CHECK(cm.to_tsv().find("Other") != std::string::npos);
  }
  SUBCASE("hand counted") {
    auto gold = seq({"B-Date", "I-Date", "O", "B-Age", "O", "B-Doctor", "I-Doctor", "O", "B-Hospital", "O"});
    auto pred = seq({"B-Date", "O", "B-Date", "B-Date", "O", "B-Patient", "I-Doctor", "O", "B-Location", "B-Sex"});
    auto cm = eval::confusion_matrix(gold, pred, cats);
    auto at = [&](const char* g, const char* p) { return cm.count(cm.index_of(g), cm.index_of(p)); };
    CHECK(at("Date", "Date") == 1);
    CHECK(at("Date", "O") == 1);
    CHECK(at("O", "Date") == 1);
    CHECK(at("O", "O") == 2);
    CHECK(at("O", "Sex") == 1);
    CHECK(at("Age", "Date") == 1);
    CHECK(at("Doctor", "Patient") == 1);
    CHECK(at("Doctor", "Doctor") == 1);
    CHECK(at("Hospital", "Location") == 1);
    std::size_t total = 0;
    for (std::size_t i = 0; i < cm.classes().size(); ++i) total += cm.row_total(i);
    CHECK(total == 10);
    auto norm = cm.normalized();
    CHECK(norm[cm.index_of("O")][cm.index_of("Date")] == 0.25);
    CHECK(norm[cm.index_of("O")][cm.index_of("O")] == 0.5);
    CHECK(norm[cm.index_of("Date")][cm.index_of("O")] == 0.5);
  }
  SUBCASE("rows of thirds still sum to one") {
    auto cm = eval::confusion_matrix(seq({"B-Date", "I-Date", "I-Date"}), seq({"B-Date", "B-Age", "O"}), cats);
    auto row = cm.normalized()[cm.index_of("Date")];
    double sum = 0;
    for (double v : row) {
      sum += v;
      CHECK((v == 0.0 || v == 0.33 || v == 0.34));
    }
    CHECK(std::round(sum * 100) == 100);
  }
  SUBCASE("marginals equal gold token counts") {
    Rng rng(5);
    auto gold = random_labels(rng, 200), pred = random_labels(rng, 200);
    auto cm = eval::confusion_matrix(gold, pred, cats);
    for (const auto& c : kCats) {
      std::size_t n = 0;
      for (const auto& l : gold) n += l.category == c;
      CHECK(cm.row_total(cm.index_of(c)) == n);
    }
  }
  CHECK(code_of([&] { eval::confusion_matrix(LabelSequence(2), LabelSequence(3), cats); }) ==
        ErrorCode::kLengthMismatch);
}

TEST_CASE("corpus evaluation and report formats") {
  auto cfg = synth::GeneratorConfig::defaults();
  cfg.seed = 3;
  cfg.n_documents = 20;
  auto gold = synth::generate(cfg);
  auto cats = LabelSet::nubes().categories();
  auto report = eval::evaluate(eval::align_corpora(gold, gold), cats);
  CHECK(report.metrics.size() == 5);
  CHECK(report.min_f1() == 1.0);
  auto csv = report.csv_rows("gold", 100);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.rfind("gold,100,token-detection,", 0) == 0);

  auto empty = gold;
  for (auto& d : empty) d.annotations.clear();
  auto r0 = eval::evaluate(eval::align_corpora(gold, empty), cats);
  CHECK(r0.min_f1() == 0.0);
  CHECK(r0.metrics.at(Scenario::kEntityDetection).fn > 0);

  auto other = gold;
  other[0].id = "elsewhere";
  CHECK(code_of([&] { eval::align_corpora(gold, other); }) == ErrorCode::kCrossDocumentAnnotation);

  // Interchange export of the gold corpus scores perfectly against it.
  auto tsv = eval::to_interchange(gold, &gold);
  auto r1 = eval::evaluate(eval::align_interchange(gold, tsv), cats);
  CHECK(r1.min_f1() == 1.0);
  CHECK(eval::import_predictions(gold, tsv) == gold);
}
