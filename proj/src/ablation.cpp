#include "ablation.hpp"

#include <algorithm>
#include <sstream>

#include "crf/trainer.hpp"
#include "error.hpp"

namespace deid {

TrainableSystem crf_system(const crf::CrfConfig& config) {
  return {"crf", [config](const std::vector<LabelledSentence>& train,
                          const std::vector<LabelledSentence>& dev) -> std::unique_ptr<Tagger> {
            auto [model, stats] = crf::fit_crf(train, dev, config);
            return std::make_unique<CrfTagger>(std::move(model));
          }};
}

TrainableSystem rules_system(std::vector<std::string> names) {
  return {"rules", [names](const std::vector<LabelledSentence>& train,
                           const std::vector<LabelledSentence>&) -> std::unique_ptr<Tagger> {
            // Rebuild gold spans from the sentence labels; token surfaces
            // joined by spaces fold to the same gazetteer phrases.
            Corpus docs;
            for (const auto& ls : train) {
              Document d;
              for (const auto& a : decode_bio(ls.sentence.tokens, ls.labels)) {
                Annotation g = a;
                std::string surface;
                for (const auto& t : ls.sentence.tokens)
                  if (t.start >= a.start && t.end <= a.end)
                    surface += (surface.empty() ? "" : " ") + t.surface;
                g.surface = surface;
                d.annotations.push_back(std::move(g));
              }
              docs.push_back(std::move(d));
            }
            return std::make_unique<RuleTagger>(rules::build_rules(docs, names));
          }};
}

const AblationEntry* AblationReport::find(const std::string& system, int fraction) const {
  for (const auto& e : entries)
    if (e.system == system && e.fraction == fraction) return &e;
  return nullptr;
}

std::string AblationReport::to_csv() const {
  std::string out(eval::kReportHeader);
  out += '\n';
  for (const auto& e : entries) out += e.report.csv_rows(e.system, e.fraction);
  return out;
}

std::string AblationReport::deltas_csv() const {
  std::ostringstream out;
  out << "system,fraction,scenario,f1,delta_f1\n";
  for (const auto& e : entries) {
    const AblationEntry* ref = nullptr;
    for (const auto& r : entries)
      if (r.system == e.system && (!ref || r.fraction > ref->fraction)) ref = &r;
    for (const auto& [s, m] : e.report.metrics)
      out << e.system << ',' << e.fraction << ',' << eval::scenario_name(s) << ','
          << eval::format_metric(m.f1) << ','
          << eval::format_metric(m.f1 - ref->report.metrics.at(s).f1) << '\n';
  }
  return out.str();
}

AblationReport ablation_run(const std::vector<TrainableSystem>& systems, const CorpusSplit& split,
                            const std::vector<int>& fractions, std::uint64_t seed,
                            const std::vector<std::string>& categories) {
  AblationReport report;
  report.fractions = fractions;
  report.seed = seed;
  const auto all_train = labelled_sentences(split.train);
  const auto dev = labelled_sentences(split.dev);
  for (int f : fractions)
    if (f < 1 || f > 100)
      throw Error(ErrorCode::kInvalidArgument, "fraction " + std::to_string(f) + " outside (0,100]");

  for (const auto& sys : systems) {
    for (int f : fractions) {
      auto subset = subsample(all_train, f, seed);
      AblationEntry e;
      e.system = sys.name;
      e.fraction = f;
      e.train_sentences = subset.size();
      e.subset_hash = subset_hash(subset);
      std::unique_ptr<Tagger> tagger;
      try {
        tagger = sys.train(subset, dev);
      } catch (const Error& err) {
        throw Error(err.code(), "[" + sys.name + " @ " + std::to_string(f) + "%] " + err.what());
      }
      auto pred = tag_corpus(split.test, *tagger);
      e.report = eval::evaluate(eval::align_corpora(split.test, pred), categories);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace deid
