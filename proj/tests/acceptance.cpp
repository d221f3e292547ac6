// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

#include "ablation.hpp"
#include "anonymise.hpp"
#include "brat.hpp"
#include "crf/trainer.hpp"
#include "eval.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "rules.hpp"
#include "split.hpp"
#include "synth.hpp"
#include "tokenizer.hpp"
#include "unicode.hpp"

using namespace deid;
using eval::Scenario;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Result verdict(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

Corpus synthetic(std::uint64_t seed, std::size_t n) {
  auto cfg = synth::GeneratorConfig::defaults();
  cfg.seed = seed;
  cfg.n_documents = n;
  return synth::generate(cfg);
}

Result bio_round_trip() {
  auto corpus = synthetic(7, 1000);
  std::size_t mismatches = 0, spans = 0;
  for (const auto& doc : corpus) {
    auto labelled = encode_document(doc);
    std::vector<Sentence> sentences;
    std::vector<LabelSequence> labels;
    for (auto& l : labelled) {
      sentences.push_back(std::move(l.sentence));
      labels.push_back(std::move(l.labels));
    }
    auto back = decode_document(doc, sentences, labels, RepairPolicy::kStrict);
    spans += doc.annotations.size();
    if (back != doc.annotations) ++mismatches;
  }
  return verdict(mismatches == 0, fmt("%.0f documents, %.0f spans, %.0f mismatches", static_cast<double>(corpus.size()),
                                      static_cast<double>(spans), static_cast<double>(mismatches)));
}

Result viterbi_optimality() {
  std::size_t mismatches = 0, instances = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    for (std::size_t T = 1; T <= 6; ++T)
      for (std::size_t L = 1; L <= 5; ++L) {
        auto s = oracle::random_matrix(rng, T, L, 4.0);
        auto t = oracle::random_matrix(rng, L, L, 4.0);
        ++instances;
        if (crf::viterbi_decode(s, t) != oracle::brute_force_argmax(s, t)) ++mismatches;
      }
  }
  return verdict(mismatches == 0, fmt("%.0f instances, %.0f mismatches", static_cast<double>(instances),
                                      static_cast<double>(mismatches)));
}

Result crf_gradient() {
  double worst_rel = 0, worst_sum = 0;
  std::size_t coords = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto train = labelled_sentences(synthetic(seed, 6));
    crf::CrfConfig cfg;
    auto [model, data] = crf::compile_training_set(train, cfg);
    crf::Objective obj(model, data, 0.1, 1);
    Rng rng(seed * 31);
    std::vector<double> w(model.weights.size());
    for (auto& v : w) v = uniform_real(rng) - 0.5;
    std::vector<double> g;
    obj.evaluate(w, g);
    auto f = [&](const std::vector<double>& x) {
      std::vector<double> unused;
      return obj.evaluate(x, unused);
    };
    for (int k = 0; k < 50; ++k) {
      auto i = uniform_index(rng, w.size());
      double fd = oracle::central_difference(f, w, i, 1e-5);
      worst_rel = std::max(worst_rel, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-2}));
      ++coords;
    }
    for (std::size_t rep = 0; rep < 20; ++rep) {
      std::size_t T = 1 + uniform_index(rng, 30), L = 2 + uniform_index(rng, 20);
      auto fb = crf::forward_backward(oracle::random_matrix(rng, T, L, 5.0), oracle::random_matrix(rng, L, L, 5.0));
      for (std::size_t t = 0; t < T; ++t) {
        double sum = 0;
        for (std::size_t y = 0; y < L; ++y) sum += fb.marginals(t, y);
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      }
    }
  }
  return verdict(worst_rel < 1e-4 && worst_sum <= 1e-9,
                 fmt("%.0f coordinates over 5 models, max relative error %.2e, max |row sum - 1| %.2e",
                     static_cast<double>(coords), worst_rel, worst_sum));
}

LabelSequence random_labels(Rng& rng, std::size_t n) {
  static const std::vector<std::string> cats{"Date", "Age", "Hospital"};
  LabelSequence out;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = uniform_index(rng, 7);
    if (r == 0)
      out.push_back(BioLabel::outside());
    else if (r <= 3)
      out.push_back(BioLabel::begin(cats[r - 1]));
    else
      out.push_back(BioLabel::inside(cats[r - 4]));
  }
  return out;
}

bool same(const eval::Metrics& m, const oracle::Prf& o) {
  return m.tp == o.tp && m.fp == o.fp && m.fn == o.fn && m.precision == o.precision && m.recall == o.recall &&
         m.f1 == o.f1;
}

Result metric_oracle() {
  Rng rng(2024);
  std::size_t disagreements = 0, order_violations = 0;
  for (int c = 0; c < 1000; ++c) {
    auto n = 1 + uniform_index(rng, 12);
    auto gold = random_labels(rng, n), pred = random_labels(rng, n);
    double f[3];
    for (int s = 0; s < 3; ++s) {
      auto m = eval::token_metrics(gold, pred, static_cast<Scenario>(s));
      disagreements += !same(m, oracle::token_scores(gold, pred, s));
      f[s] = m.f1;
    }
    order_violations += !(f[0] >= f[1] && f[1] >= f[2]);
    auto gs = oracle::decode(gold), ps = oracle::decode(pred);
    std::vector<Annotation> ga, pa;
    for (const auto& s : gs) ga.push_back({"", s.category, s.begin, s.end, ""});
    for (const auto& s : ps) pa.push_back({"", s.category, s.begin, s.end, ""});
    disagreements += !same(eval::entity_metrics(ga, pa, Scenario::kEntityDetection), oracle::entity_scores(gs, ps, false));
    disagreements +=
        !same(eval::entity_metrics(ga, pa, Scenario::kEntityClassification), oracle::entity_scores(gs, ps, true));
  }
  return verdict(disagreements == 0 && order_violations == 0,
                 fmt("1000 cases x 5 scenarios, %.0f disagreements, %.0f ordering violations",
                     static_cast<double>(disagreements), static_cast<double>(order_violations)));
}

struct EndToEnd {
  CorpusSplit split;
  std::vector<std::string> names;
};

EndToEnd& shared_data() {
  static EndToEnd e = [] {
    EndToEnd d;
    d.split = split_corpus(synthetic(7, 1000), {0.72, 0.08, 0.20}, 7);
    d.names = rules::load_name_list(std::string(DEID_RESOURCES_DIR) + "/names/ine_names.txt");
    return d;
  }();
  return e;
}

Result end_to_end() {
  auto& data = shared_data();
  const auto cats = LabelSet::nubes().categories();
  crf::CrfConfig cfg;  // c1 = c2 = 0.1, at most 100 iterations
  auto [model, stats] = crf::fit_crf(labelled_sentences(data.split.train), labelled_sentences(data.split.dev), cfg);
  CrfTagger crf_tagger(std::move(model));
  auto crf_report = eval::evaluate(eval::align_corpora(data.split.test, tag_corpus(data.split.test, crf_tagger)), cats);
  RuleTagger rule_tagger(rules::build_rules(data.split.train, data.names));
  auto rule_report =
      eval::evaluate(eval::align_corpora(data.split.test, tag_corpus(data.split.test, rule_tagger)), cats);
  const auto& strict = crf_report.metrics.at(Scenario::kTokenStrict);
  const auto& rules_det = rule_report.metrics.at(Scenario::kTokenDetection);
  return verdict(strict.f1 >= 0.95 && rules_det.precision > rules_det.recall,
                 fmt("CRF strict token F1 %.4f (%.0f iterations); rules detection P %.3f R %.3f",
                     strict.f1, stats.iterations, rules_det.precision, rules_det.recall));
}

Result ablation_shape() {
  auto& data = shared_data();
  crf::CrfConfig cfg;
  auto report = ablation_run({crf_system(cfg)}, data.split, default_fractions(), 7, LabelSet::nubes().categories());
  std::vector<double> f1;
  std::string curve;
  for (int f : default_fractions()) {
    double v = report.find("crf", f)->report.metrics.at(Scenario::kTokenDetection).f1;
    f1.push_back(v);
    curve += (curve.empty() ? "" : " ") + std::to_string(f) + "%:" + fmt("%.3f", v);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < f1.size(); ++i) monotone &= f1[i] >= f1[i - 1] - 0.02;
  const double drop = f1.back() - f1.front();
  return verdict(drop >= 0.05 && monotone, "detection F1 " + curve + fmt("; 1%% is %.1f points below 100%%", 100 * drop));
}

Result anonymiser() {
  const std::string sentence = "Paciente de 64 años operado de una hernia el 12/01/2016 por la Dra Lopez";
  Document doc;
  doc.id = "table1";
  doc.text = unicode::decode(sentence);
  doc.annotations = {{"T1", "Age", 12, 19, "64 años"},
                     {"T2", "Date", 45, 55, "12/01/2016"},
                     {"T3", "Doctor", 60, 72, "la Dra Lopez"}};
  anon::Policy p;
  p.mode = anon::Mode::kMask;
  auto masked = anon::anonymise(doc, doc.annotations, p).text;
  p.mode = anon::Mode::kPlaceholder;
  auto tagged = anon::anonymise(doc, doc.annotations, p).text;
  p.mode = anon::Mode::kSurrogate;
  p.age_shift_min = p.age_shift_max = -5;
  p.date_shift_min = p.date_shift_max = 1240;  // 12/01/2016 -> 05/06/2019
  anon::SurrogateResources res;
  res.surnames = {"Sancho"};
  auto surrogate = anon::anonymise(doc, doc.annotations, p, res).text;

  bool ok = masked == "Paciente de XXXXXXX operado de una hernia el XXXXXXXXXX por XXXXXXXXXXXX" &&
            tagged == "Paciente de [-AGE-] operado de una hernia el [--DATE--] por [--DOCTOR--]" &&
            surrogate.rfind("Paciente de 59 años operado de una hernia el 05/06/2019 por ", 0) == 0;

  // Leak scan over a synthetic corpus.
  std::size_t leaks = anon::leaked_surfaces(masked, doc.annotations).size() +
                      anon::leaked_surfaces(tagged, doc.annotations).size();
  std::size_t docs = 0;
  for (const auto& d : synthetic(11, 200)) {
    for (auto mode : {anon::Mode::kMask, anon::Mode::kPlaceholder}) {
      anon::Policy q;
      q.mode = mode;
      leaks += anon::leaked_surfaces(anon::anonymise(d, d.annotations, q).text, d.annotations).size();
    }
    ++docs;
  }
  return verdict(ok && leaks == 0, "surrogate: \"" + surrogate + "\"" +
                                       fmt("; leak scan over %.0f documents: %.0f leaks", static_cast<double>(docs),
                                           static_cast<double>(leaks)));
}

Result meddocan() {
  const char* dir = std::getenv("DEID_MEDDOCAN_DIR");
  if (!dir || !std::filesystem::exists(dir))
    return {Outcome::kSkip, "set DEID_MEDDOCAN_DIR to a directory with train/ dev/ test/ BRAT folders"};
  auto labels = LabelSet::load(std::string(DEID_RESOURCES_DIR) + "/labels/meddocan.txt");
  const std::string root = dir;
  auto train = read_brat_dir(root + "/train", labels);
  auto dev = read_brat_dir(root + "/dev", labels);
  auto test = read_brat_dir(root + "/test", labels);
  crf::CrfConfig cfg;
  auto [model, stats] = crf::fit_crf(labelled_sentences(train), labelled_sentences(dev), cfg);
  CrfTagger tagger(std::move(model));
  auto report = eval::evaluate(eval::align_corpora(test, tag_corpus(test, tagger)), labels.categories());
  double det = report.metrics.at(Scenario::kEntityDetection).f1;
  double cls = report.metrics.at(Scenario::kEntityClassification).f1;
  return verdict(std::abs(det - 0.960) <= 0.020 && std::abs(cls - 0.954) <= 0.020,
                 fmt("entity detection F1 %.3f, classification F1 %.3f", det, cls));
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria{
      {"BIO round-trip", 10, bio_round_trip},
      {"Viterbi optimality", 30, viterbi_optimality},
      {"CRF gradient", 0, crf_gradient},
      {"Metric oracle", 0, metric_oracle},
      {"Synthetic end-to-end", 600, end_to_end},
      {"Ablation shape", 1800, ablation_shape},
      {"Anonymiser", 0, anonymiser},
      {"MEDDOCAN reproduction", 7200, meddocan},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.outcome != Outcome::kSkip && c.budget_seconds > 0 && secs >= c.budget_seconds) {
      r.outcome = Outcome::kFail;
      r.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    const char* tag = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    std::printf("%s  %-22s %8.2fs  %s\n", tag, c.name, secs, r.detail.c_str());
    std::fflush(stdout);
    failures += r.outcome == Outcome::kFail;
  }
  return failures == 0 ? 0 : 1;
}
