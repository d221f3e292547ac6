#include "deid/deid.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "ablation.hpp"
#include "anonymise.hpp"
#include "brat.hpp"
#include "crf/trainer.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "interchange.hpp"
#include "pipeline.hpp"
#include "rules.hpp"
#include "split.hpp"
#include "synth.hpp"
#include "unicode.hpp"

struct deid_corpus {
  deid::Corpus docs;
  std::vector<std::string> utf8;  // lazily filled text cache
};

struct deid_rules {
  deid::rules::RuleSet rules;
};

struct deid_crf_model {
  deid::crf::CrfModel model;
};

struct deid_report {
  deid::eval::EvalReport report;
};

static_assert(static_cast<int>(DEID_INVALID_ARGUMENT) == static_cast<int>(deid::ErrorCode::kInvalidArgument));
static_assert(static_cast<int>(DEID_INTERNAL) == static_cast<int>(deid::ErrorCode::kInternal));

namespace {

thread_local std::string last_error;

deid_status fail(deid_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
deid_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return DEID_OK;
  } catch (const deid::Error& e) {
    return fail(static_cast<deid_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DEID_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(DEID_IO, e.what());
  } catch (const std::exception& e) {
    return fail(DEID_INTERNAL, e.what());
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw deid::Error(deid::ErrorCode::kInvalidArgument, what);
}

deid::LabelSet labels_from(const char* path) {
  return path ? deid::LabelSet::load(path) : deid::LabelSet::nubes();
}

char* copy_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

deid_corpus* wrap(deid::Corpus docs) {
  auto* c = new deid_corpus;
  c->docs = std::move(docs);
  return c;
}

deid::crf::CrfConfig to_config(const deid_crf_config* c) {
  deid::crf::CrfConfig out;
  if (!c) return out;
  out.max_iterations = c->max_iterations;
  out.c1 = c->c1;
  out.c2 = c->c2;
  out.all_transitions = c->all_transitions != 0;
  out.convergence_tol = c->tolerance;
  out.lbfgs_memory = c->lbfgs_memory;
  out.threads = c->threads;
  out.validate();
  return out;
}

deid::anon::Policy to_policy(const deid_anon_policy* p) {
  deid::anon::Policy out;
  if (!p) return out;
  switch (p->mode) {
    case DEID_ANON_MASK: out.mode = deid::anon::Mode::kMask; break;
    case DEID_ANON_PLACEHOLDER: out.mode = deid::anon::Mode::kPlaceholder; break;
    case DEID_ANON_SURROGATE: out.mode = deid::anon::Mode::kSurrogate; break;
    default: require(false, "unknown anonymisation mode");
  }
  out.mask_char = static_cast<char32_t>(p->mask_char);
  if (p->placeholder_format) out.placeholder_format = p->placeholder_format;
  out.fit_placeholder_length = p->fit_placeholder_length != 0;
  out.surrogate_seed = p->seed;
  out.date_shift_min = p->date_shift_min;
  out.date_shift_max = p->date_shift_max;
  out.age_shift_min = p->age_shift_min;
  out.age_shift_max = p->age_shift_max;
  return out;
}

deid::anon::SurrogateResources to_resources(const deid_anon_policy* p, const deid_rules* gaz) {
  deid::anon::SurrogateResources res;
  if (p && p->names_dir) {
    std::filesystem::path dir(p->names_dir);
    res.female_names = deid::rules::load_name_list((dir / "ine_female.txt").string());
    res.male_names = deid::rules::load_name_list((dir / "ine_male.txt").string());
    res.surnames = deid::rules::load_name_list((dir / "surnames.txt").string());
  }
  if (gaz)
    for (const auto& [cat, g] : gaz->rules.gazetteers)
      res.gazetteers[cat] = std::vector<std::string>(g.entries().begin(), g.entries().end());
  return res;
}

}  // namespace

extern "C" {

const char* deid_version(void) { return DEID_VERSION; }

const char* deid_last_error(void) { return last_error.c_str(); }

const char* deid_status_name(deid_status status) {
  if (status == DEID_OK) return "Ok";
  if (status < DEID_INVALID_ARGUMENT || status > DEID_INTERNAL) return "UnknownStatus";
  static thread_local std::string name;
  name = deid::error_name(static_cast<deid::ErrorCode>(status));
  return name.c_str();
}

void deid_string_free(char* s) { std::free(s); }

deid_status deid_corpus_generate(uint64_t seed, size_t n_documents, deid_corpus** out) {
  return guard([&] {
    require(out, "out is NULL");
    auto cfg = deid::synth::GeneratorConfig::defaults();
    cfg.seed = seed;
    cfg.n_documents = n_documents;
    *out = wrap(deid::synth::generate(cfg));
  });
}

deid_status deid_corpus_read_brat(const char* dir, const char* labels_path, deid_corpus** out) {
  return guard([&] {
    require(dir && out, "dir and out must not be NULL");
    *out = wrap(deid::read_brat_dir(dir, labels_from(labels_path)));
  });
}

deid_status deid_corpus_write_brat(const deid_corpus* corpus, const char* dir) {
  return guard([&] {
    require(corpus && dir, "corpus and dir must not be NULL");
    deid::write_brat_dir(corpus->docs, dir);
  });
}

deid_status deid_corpus_size(const deid_corpus* corpus, size_t* out) {
  return guard([&] {
    require(corpus && out, "corpus and out must not be NULL");
    *out = corpus->docs.size();
  });
}

deid_status deid_corpus_annotation_count(const deid_corpus* corpus, size_t* out) {
  return guard([&] {
    require(corpus && out, "corpus and out must not be NULL");
    std::size_t n = 0;
    for (const auto& d : corpus->docs) n += d.annotations.size();
    *out = n;
  });
}

deid_status deid_corpus_hash(const deid_corpus* corpus, uint64_t* out) {
  return guard([&] {
    require(corpus && out, "corpus and out must not be NULL");
    *out = deid::hash_corpus(corpus->docs);
  });
}

deid_status deid_corpus_document(const deid_corpus* corpus, size_t index, const char** id,
                                 const char** text) {
  return guard([&] {
    require(corpus, "corpus is NULL");
    if (index >= corpus->docs.size())
      throw deid::Error(deid::ErrorCode::kIndexOutOfRange, "document index " + std::to_string(index) +
                                                               " >= " + std::to_string(corpus->docs.size()));
    auto* c = const_cast<deid_corpus*>(corpus);
    if (c->utf8.size() != c->docs.size()) {
      c->utf8.clear();
      for (const auto& d : c->docs) c->utf8.push_back(d.utf8_text());
    }
    if (id) *id = c->docs[index].id.c_str();
    if (text) *text = c->utf8[index].c_str();
  });
}

deid_status deid_corpus_split(const deid_corpus* corpus, double train, double dev, double test,
                              uint64_t seed, deid_corpus** train_out, deid_corpus** dev_out,
                              deid_corpus** test_out) {
  return guard([&] {
    require(corpus && train_out && dev_out && test_out, "arguments must not be NULL");
    auto s = deid::split_corpus(corpus->docs, {train, dev, test}, seed);
    *train_out = wrap(std::move(s.train));
    *dev_out = wrap(std::move(s.dev));
    *test_out = wrap(std::move(s.test));
  });
}

void deid_corpus_free(deid_corpus* corpus) { delete corpus; }

deid_status deid_interchange_write(const deid_corpus* gold, const deid_corpus* pred, const char* path) {
  return guard([&] {
    require(gold && path, "gold and path must not be NULL");
    deid::write_interchange(path, deid::eval::to_interchange(gold->docs, pred ? &pred->docs : nullptr));
  });
}

deid_status deid_interchange_import(const deid_corpus* gold, const char* path, const char* labels_path,
                                   deid_corpus** pred_out) {
  return guard([&] {
    require(gold && path && pred_out, "arguments must not be NULL");
    auto labels = labels_from(labels_path);
    *pred_out = wrap(deid::eval::import_predictions(gold->docs, deid::read_interchange(path, &labels)));
  });
}

deid_status deid_rules_build(const deid_corpus* train, const char* names_path, deid_rules** out) {
  return guard([&] {
    require(train && out, "train and out must not be NULL");
    std::vector<std::string> names;
    if (names_path) names = deid::rules::load_name_list(names_path);
    *out = new deid_rules{deid::rules::build_rules(train->docs, std::move(names))};
  });
}

deid_status deid_rules_save(const deid_rules* rules, const char* dir) {
  return guard([&] {
    require(rules && dir, "rules and dir must not be NULL");
    deid::rules::save_rules(rules->rules, dir);
  });
}

deid_status deid_rules_load(const char* dir, deid_rules** out) {
  return guard([&] {
    require(dir && out, "dir and out must not be NULL");
    *out = new deid_rules{deid::rules::load_rules(dir)};
  });
}

void deid_rules_free(deid_rules* rules) { delete rules; }

void deid_crf_config_default(deid_crf_config* config) {
  if (!config) return;
  deid::crf::CrfConfig d;
  config->max_iterations = d.max_iterations;
  config->c1 = d.c1;
  config->c2 = d.c2;
  config->all_transitions = d.all_transitions ? 1 : 0;
  config->tolerance = d.convergence_tol;
  config->lbfgs_memory = d.lbfgs_memory;
  config->threads = d.threads;
}

deid_status deid_crf_train(const deid_corpus* train, const deid_corpus* dev, const deid_crf_config* config,
                           deid_crf_model** out, deid_train_stats* stats) {
  return guard([&] {
    require(train && out, "train and out must not be NULL");
    auto cfg = to_config(config);
    auto train_s = deid::labelled_sentences(train->docs);
    auto dev_s = dev ? deid::labelled_sentences(dev->docs) : std::vector<deid::LabelledSentence>{};
    auto [model, st] = deid::crf::fit_crf(train_s, dev_s, cfg);
    if (stats) {
      stats->iterations = st.iterations;
      stats->objective = st.objective.empty() ? 0.0 : st.objective.back();
      stats->wall_seconds = st.wall_seconds;
      stats->num_parameters = st.num_parameters;
      stats->dev_accuracy = st.dev_accuracy;
    }
    *out = new deid_crf_model{std::move(model)};
  });
}

deid_status deid_crf_save(const deid_crf_model* model, const char* path) {
  return guard([&] {
    require(model && path, "model and path must not be NULL");
    model->model.save(path);
  });
}

deid_status deid_crf_load(const char* path, deid_crf_model** out) {
  return guard([&] {
    require(path && out, "path and out must not be NULL");
    *out = new deid_crf_model{deid::crf::CrfModel::load(path)};
  });
}

void deid_crf_free(deid_crf_model* model) { delete model; }

deid_status deid_tag_rules(const deid_rules* rules, const deid_corpus* in, int threads, deid_corpus** out) {
  return guard([&] {
    require(rules && in && out, "arguments must not be NULL");
    deid::RuleTagger tagger(rules->rules);
    *out = wrap(deid::tag_corpus(in->docs, tagger, threads));
  });
}

deid_status deid_tag_crf(const deid_crf_model* model, const deid_corpus* in, int threads, deid_corpus** out) {
  return guard([&] {
    require(model && in && out, "arguments must not be NULL");
    deid::CrfTagger tagger(model->model);
    *out = wrap(deid::tag_corpus(in->docs, tagger, threads));
  });
}

deid_status deid_evaluate(const deid_corpus* gold, const deid_corpus* pred, const char* labels_path,
                          deid_report** out) {
  return guard([&] {
    require(gold && pred && out, "arguments must not be NULL");
    auto labels = labels_from(labels_path);
    auto docs = deid::eval::align_corpora(gold->docs, pred->docs);
    *out = new deid_report{deid::eval::evaluate(docs, labels.categories())};
  });
}

deid_status deid_evaluate_interchange(const deid_corpus* gold, const char* tsv_path, const char* labels_path,
                                      deid_report** out) {
  return guard([&] {
    require(gold && tsv_path && out, "arguments must not be NULL");
    auto labels = labels_from(labels_path);
    auto file = deid::read_interchange(tsv_path, &labels);
    auto docs = deid::eval::align_interchange(gold->docs, file);
    *out = new deid_report{deid::eval::evaluate(docs, labels.categories())};
  });
}

deid_status deid_report_metric(const deid_report* report, deid_scenario scenario, deid_metric* out) {
  return guard([&] {
    require(report && out, "report and out must not be NULL");
    require(scenario >= DEID_TOKEN_DETECTION && scenario <= DEID_ENTITY_CLASSIFICATION, "unknown scenario");
    const auto& m = report->report.metrics.at(static_cast<deid::eval::Scenario>(scenario));
    *out = {m.precision, m.recall, m.f1, m.tp, m.fp, m.fn};
  });
}

deid_status deid_report_min_f1(const deid_report* report, double* out) {
  return guard([&] {
    require(report && out, "report and out must not be NULL");
    *out = report->report.min_f1();
  });
}

deid_status deid_report_csv(const deid_report* report, const char* system, int fraction, char** out) {
  return guard([&] {
    require(report && system && out, "arguments must not be NULL");
    *out = copy_string(std::string(deid::eval::kReportHeader) + "\n" +
                       report->report.csv_rows(system, fraction));
  });
}

deid_status deid_report_confusion(const deid_report* report, int normalized, char** out) {
  return guard([&] {
    require(report && out, "report and out must not be NULL");
    const auto& cm = report->report.confusion;
    *out = copy_string(normalized ? cm.to_tsv() : cm.counts_to_tsv());
  });
}

void deid_report_free(deid_report* report) { delete report; }

deid_status deid_ablate(const deid_corpus* train, const deid_corpus* dev, const deid_corpus* test,
                        const char* systems, const int* fractions, size_t n_fractions, uint64_t seed,
                        const deid_crf_config* config, const char* names_path, const char* labels_path,
                        char** csv_out, char** deltas_out) {
  return guard([&] {
    require(train && test && systems, "train, test and systems must not be NULL");
    require(fractions || n_fractions == 0, "fractions is NULL");
    std::vector<deid::TrainableSystem> list;
    std::stringstream ss(systems);
    for (std::string name; std::getline(ss, name, ',');) {
      if (name == "crf") {
        list.push_back(deid::crf_system(to_config(config)));
      } else if (name == "rules") {
        std::vector<std::string> names;
        if (names_path) names = deid::rules::load_name_list(names_path);
        list.push_back(deid::rules_system(std::move(names)));
      } else {
        require(false, ("unknown system '" + name + "' (expected crf or rules)").c_str());
      }
    }
    require(!list.empty(), "no systems given");
    deid::CorpusSplit split;
    split.train = train->docs;
    if (dev) split.dev = dev->docs;
    split.test = test->docs;
    std::vector<int> fr = n_fractions ? std::vector<int>(fractions, fractions + n_fractions)
                                      : deid::default_fractions();
    auto report = deid::ablation_run(list, split, fr, seed, labels_from(labels_path).categories());
    if (csv_out) *csv_out = copy_string(report.to_csv());
    if (deltas_out) *deltas_out = copy_string(report.deltas_csv());
  });
}

void deid_anon_policy_default(deid_anon_policy* policy) {
  if (!policy) return;
  deid::anon::Policy d;
  policy->mode = DEID_ANON_MASK;
  policy->mask_char = static_cast<uint32_t>(d.mask_char);
  policy->placeholder_format = nullptr;
  policy->fit_placeholder_length = d.fit_placeholder_length ? 1 : 0;
  policy->seed = d.surrogate_seed;
  policy->date_shift_min = d.date_shift_min;
  policy->date_shift_max = d.date_shift_max;
  policy->age_shift_min = d.age_shift_min;
  policy->age_shift_max = d.age_shift_max;
  policy->names_dir = nullptr;
}

deid_status deid_anonymise_text(const char* doc_id, const char* text, const deid_span* spans, size_t n_spans,
                                const deid_anon_policy* policy, char** out) {
  return guard([&] {
    require(text && out && (spans || n_spans == 0), "arguments must not be NULL");
    deid::Document doc;
    doc.id = doc_id ? doc_id : "";
    doc.text = deid::unicode::decode(text);
    std::vector<deid::Annotation> anns;
    for (size_t i = 0; i < n_spans; ++i) {
      require(spans[i].category, "span category is NULL");
      deid::Annotation a;
      a.category = spans[i].category;
      a.start = spans[i].start;
      a.end = spans[i].end;
      anns.push_back(std::move(a));
    }
    auto result = deid::anon::anonymise(doc, anns, to_policy(policy), to_resources(policy, nullptr));
    *out = copy_string(result.text);
  });
}

deid_status deid_anonymise_corpus(const deid_corpus* in, const deid_anon_policy* policy,
                                  const deid_rules* gazetteers, const char* mapping_dir, deid_corpus** out) {
  return guard([&] {
    require(in && out, "in and out must not be NULL");
    auto pol = to_policy(policy);
    auto res = to_resources(policy, gazetteers);
    deid::Corpus result;
    for (const auto& d : in->docs) {
      auto r = deid::anon::anonymise(d, d.annotations, pol, res);
      deid::Document o;
      o.id = d.id;
      o.text = deid::unicode::decode(r.text);
      for (const auto& rep : r.replacements) {
        deid::Annotation a;
        a.category = rep.category;
        a.start = rep.output_start;
        a.end = rep.output_end;
        a.surface = rep.replacement;
        o.annotations.push_back(std::move(a));
      }
      deid::renumber(o.annotations);
      if (mapping_dir)
        deid::write_file((std::filesystem::path(mapping_dir) / (d.id + ".map.json")).string(),
                         deid::anon::mapping_json(d.id, r) + "\n");
      result.push_back(std::move(o));
    }
    *out = wrap(std::move(result));
  });
}

}  // extern "C"
