// deid-cli: corpus generation, training, tagging, scoring, ablation and
// anonymisation on top of the C API.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deid/deid.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Data errors carry the library status so main() can print its name.
struct Failure {
  deid_status status;
  std::string message;
};

struct GateFailure {
  std::string message;
};

void check(deid_status s) {
  if (s != DEID_OK) throw Failure{s, deid_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Corpus = Handle<deid_corpus, deid_corpus_free>;
using Rules = Handle<deid_rules, deid_rules_free>;
using Model = Handle<deid_crf_model, deid_crf_free>;
using Report = Handle<deid_report, deid_report_free>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { deid_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string now_iso() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{DEID_IO, "cannot write " + path.string()};
  f << content;
}

// Collects what a command read and wrote; written as JSON when it ends.
class Manifest {
 public:
  Manifest(std::string command, const CLI::App* app) : command_(std::move(command)), app_(app) {
    j_["started_at"] = now_iso();
  }

  void corpus(const std::string& role, const deid_corpus* c) {
    uint64_t h = 0;
    check(deid_corpus_hash(c, &h));
    j_["corpus_hashes"][role] = hex64(h);
  }
  void seed(const std::string& name, uint64_t v) { j_["seeds"][name] = v; }
  void output(const std::string& path) { j_["outputs"].push_back(path); }
  void extra(const std::string& key, json v) { j_[key] = std::move(v); }

  void write(const fs::path& path) {
    // Everything that can change the outputs, without the config file path.
    std::string config = app_->config_to_str(true, false);
    std::stringstream in(config), kept;
    for (std::string line; std::getline(in, line);)
      if (line.rfind("config=", 0) != 0 && line.rfind("manifest=", 0) != 0) kept << line << "\n";
    j_["command"] = command_;
    j_["config"] = kept.str();
    j_["config_hash"] = hex64(fnv1a(kept.str()));
    j_["tool_version"] = deid_version();
    j_["finished_at"] = now_iso();
    write_text(path, j_.dump(2) + "\n");
  }

 private:
  std::string command_;
  const CLI::App* app_;
  json j_ = json::object();
};

fs::path manifest_path(const std::string& explicit_path, const fs::path& out) {
  if (!explicit_path.empty()) return explicit_path;
  if (fs::is_directory(out)) return out / "manifest.json";
  return fs::path(out.string() + ".manifest.json");
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--fractions", "not an integer: '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& flag, std::size_t n) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "not a number: '" + item + "'");
    }
  }
  if (out.size() != n) throw CLI::ValidationError(flag, "expected " + std::to_string(n) + " values");
  return out;
}

const char* opt_c(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct Common {
  std::string labels;
  std::string manifest;
};

void add_common(CLI::App* sub, Common& c) {
  sub->set_config("--config", "", "key=value file mirroring the command's flags");
  sub->add_option("--labels", c.labels, "category file (default: NUBes-PHI categories)");
  sub->add_option("--manifest", c.manifest, "run manifest path (default: next to the output)");
}

std::string default_resource(const std::string& rel) {
#ifdef DEID_RESOURCES_DIR
  fs::path p = fs::path(DEID_RESOURCES_DIR) / rel;
  if (fs::exists(p)) return p.string();
#endif
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"De-identification of Spanish clinical text"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(deid_version()));

  std::function<void()> run;
  Common common;

  // gen-corpus
  uint64_t seed = 0;
  std::size_t docs = 100;
  std::string out, in;
  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic BRAT corpus");
  add_common(gen, common);
  gen->add_option("--seed", seed, "generator seed")->required();
  gen->add_option("--docs", docs, "number of documents")->required();
  gen->add_option("--out", out, "output directory")->required();
  gen->callback([&] {
    run = [&] {
      Manifest m("gen-corpus", gen);
      Corpus c;
      check(deid_corpus_generate(seed, docs, c.out()));
      check(deid_corpus_write_brat(c.get(), out.c_str()));
      m.seed("generator", seed);
      m.corpus("output", c.get());
      m.output(out);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // split
  std::string ratios = "0.72,0.08,0.20";
  auto* split = app.add_subcommand("split", "document-level train/dev/test split");
  add_common(split, common);
  split->add_option("--in", in, "BRAT corpus directory")->required()->check(CLI::ExistingDirectory);
  split->add_option("--out", out, "output directory (train/, dev/, test/)")->required();
  split->add_option("--seed", seed, "shuffle seed")->required();
  split->add_option("--ratios", ratios, "train,dev,test ratios")->capture_default_str();
  split->callback([&] {
    run = [&] {
      auto r = parse_doubles(ratios, "--ratios", 3);
      Manifest m("split", split);
      Corpus c, tr, dv, te;
      check(deid_corpus_read_brat(in.c_str(), opt_c(common.labels), c.out()));
      check(deid_corpus_split(c.get(), r[0], r[1], r[2], seed, tr.out(), dv.out(), te.out()));
      const std::pair<const char*, Corpus*> parts[] = {{"train", &tr}, {"dev", &dv}, {"test", &te}};
      for (auto& [name, part] : parts) {
        auto dir = (fs::path(out) / name).string();
        check(deid_corpus_write_brat(part->get(), dir.c_str()));
        m.corpus(name, part->get());
        m.output(dir);
      }
      m.corpus("input", c.get());
      m.seed("split", seed);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // train-crf
  std::string train_dir, dev_dir, model_path;
  deid_crf_config crf;
  deid_crf_config_default(&crf);
  bool all_transitions = crf.all_transitions != 0;
  auto* train = app.add_subcommand("train-crf", "train the CRF tagger");
  add_common(train, common);
  train->add_option("--train", train_dir, "training BRAT directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--dev", dev_dir, "development BRAT directory")->check(CLI::ExistingDirectory);
  train->add_option("--model", model_path, "output model file")->required();
  train->add_option("--c1", crf.c1, "L1 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--c2", crf.c2, "L2 coefficient")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--max-iter", crf.max_iterations, "maximum iterations")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--tolerance", crf.tolerance, "convergence tolerance")->capture_default_str();
  train->add_option("--memory", crf.lbfgs_memory, "L-BFGS history size")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--all-transitions", all_transitions, "weights for unseen transitions")->capture_default_str();
  train->add_option("--threads", crf.threads, "worker threads (0: all cores)")->capture_default_str();
  train->callback([&] {
    run = [&] {
      crf.all_transitions = all_transitions ? 1 : 0;
      Manifest m("train-crf", train);
      Corpus tr, dv;
      check(deid_corpus_read_brat(train_dir.c_str(), opt_c(common.labels), tr.out()));
      if (!dev_dir.empty()) check(deid_corpus_read_brat(dev_dir.c_str(), opt_c(common.labels), dv.out()));
      Model model;
      deid_train_stats stats{};
      check(deid_crf_train(tr.get(), dv.get(), &crf, model.out(), &stats));
      check(deid_crf_save(model.get(), model_path.c_str()));
      std::printf("iterations=%d objective=%.6f parameters=%zu seconds=%.2f", stats.iterations, stats.objective,
                  stats.num_parameters, stats.wall_seconds);
      if (dv.get()) std::printf(" dev_accuracy=%.6f", stats.dev_accuracy);
      std::printf("\n");
      m.corpus("train", tr.get());
      if (dv.get()) m.corpus("dev", dv.get());
      m.extra("training", {{"iterations", stats.iterations},
                           {"objective", stats.objective},
                           {"parameters", stats.num_parameters}});
      m.output(model_path);
      m.write(manifest_path(common.manifest, model_path));
    };
  });

  // build-rules
  std::string names_path = default_resource("names/ine_names.txt");
  auto* build = app.add_subcommand("build-rules", "compile gazetteers and regexes into a rules directory");
  add_common(build, common);
  build->add_option("--train", train_dir, "training BRAT directory")->required()->check(CLI::ExistingDirectory);
  build->add_option("--names", names_path, "given-name list for the Patient detector")->capture_default_str();
  build->add_option("--out", out, "rules directory")->required();
  build->callback([&] {
    run = [&] {
      Manifest m("build-rules", build);
      Corpus tr;
      check(deid_corpus_read_brat(train_dir.c_str(), opt_c(common.labels), tr.out()));
      Rules rules;
      check(deid_rules_build(tr.get(), opt_c(names_path), rules.out()));
      check(deid_rules_save(rules.get(), out.c_str()));
      m.corpus("train", tr.get());
      m.output(out);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // tag
  std::string tagger, rules_dir, format = "brat";
  int threads = 0;
  auto* tag = app.add_subcommand("tag", "tag a corpus with the rules or CRF tagger");
  add_common(tag, common);
  tag->add_option("--tagger", tagger, "rules or crf")->required()->check(CLI::IsMember({"rules", "crf"}));
  tag->add_option("--in", in, "BRAT corpus directory")->required()->check(CLI::ExistingDirectory);
  tag->add_option("--out", out, "output directory (brat) or file (tsv)")->required();
  tag->add_option("--rules-dir", rules_dir, "rules directory (rules tagger)")->check(CLI::ExistingDirectory);
  tag->add_option("--model", model_path, "model file (crf tagger)")->check(CLI::ExistingFile);
  tag->add_option("--format", format, "brat or tsv (interchange, with input annotations as gold)")
      ->capture_default_str()
      ->check(CLI::IsMember({"brat", "tsv"}));
  tag->add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();
  tag->callback([&] {
    if (tagger == "rules" && rules_dir.empty()) throw CLI::RequiredError("--rules-dir");
    if (tagger == "crf" && model_path.empty()) throw CLI::RequiredError("--model");
    run = [&] {
      Manifest m("tag", tag);
      Corpus c, pred;
      check(deid_corpus_read_brat(in.c_str(), opt_c(common.labels), c.out()));
      if (tagger == "rules") {
        Rules rules;
        check(deid_rules_load(rules_dir.c_str(), rules.out()));
        check(deid_tag_rules(rules.get(), c.get(), threads, pred.out()));
      } else {
        Model model;
        check(deid_crf_load(model_path.c_str(), model.out()));
        check(deid_tag_crf(model.get(), c.get(), threads, pred.out()));
      }
      if (format == "brat")
        check(deid_corpus_write_brat(pred.get(), out.c_str()));
      else
        check(deid_interchange_write(c.get(), pred.get(), out.c_str()));
      m.corpus("input", c.get());
      m.corpus("predictions", pred.get());
      m.output(out);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // eval
  std::string gold_dir, pred_path, confusion_path, system = "system";
  double min_f1 = -1.0;
  auto* ev = app.add_subcommand("eval", "score predictions against gold annotations");
  add_common(ev, common);
  ev->add_option("--gold", gold_dir, "gold BRAT directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--pred", pred_path, "predicted BRAT directory or interchange TSV file")->required()->check(CLI::ExistingPath);
  ev->add_option("--out", out, "report CSV (default: stdout)");
  ev->add_option("--confusion", confusion_path, "normalized confusion matrix TSV");
  ev->add_option("--system", system, "system name in the report")->capture_default_str();
  ev->add_option("--min-f1", min_f1, "fail (exit 3) when any scenario F1 is below this");
  ev->callback([&] {
    run = [&] {
      Manifest m("eval", ev);
      Corpus gold;
      check(deid_corpus_read_brat(gold_dir.c_str(), opt_c(common.labels), gold.out()));
      Report report;
      if (fs::is_directory(pred_path)) {
        Corpus pred;
        check(deid_corpus_read_brat(pred_path.c_str(), opt_c(common.labels), pred.out()));
        check(deid_evaluate(gold.get(), pred.get(), opt_c(common.labels), report.out()));
        m.corpus("predictions", pred.get());
      } else {
        check(deid_evaluate_interchange(gold.get(), pred_path.c_str(), opt_c(common.labels), report.out()));
      }
      OwnedString csv;
      check(deid_report_csv(report.get(), system.c_str(), 100, &csv.p));
      if (out.empty()) {
        std::fputs(csv.str().c_str(), stdout);
      } else {
        write_text(out, csv.str());
        m.output(out);
      }
      if (!confusion_path.empty()) {
        OwnedString cm;
        check(deid_report_confusion(report.get(), 1, &cm.p));
        write_text(confusion_path, cm.str());
        m.output(confusion_path);
      }
      m.corpus("gold", gold.get());
      if (!out.empty() || !common.manifest.empty())
        m.write(manifest_path(common.manifest, out.empty() ? fs::path("eval") : fs::path(out)));
      double worst = 0;
      check(deid_report_min_f1(report.get(), &worst));
      if (min_f1 >= 0 && worst < min_f1) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "lowest scenario F1 %.6f is below --min-f1 %.6f", worst, min_f1);
        throw GateFailure{buf};
      }
    };
  });

  // ablate
  std::string test_dir, systems = "crf,rules", fractions = "1,5,10,20,40,60,80,100", deltas_path;
  uint64_t split_seed = 0;
  names_path = default_resource("names/ine_names.txt");
  auto* abl = app.add_subcommand("ablate", "retrain on nested training subsets and score each");
  add_common(abl, common);
  abl->add_option("--in", in, "corpus to split (alternative to --train/--test)")->check(CLI::ExistingDirectory);
  abl->add_option("--split-seed", split_seed, "seed for splitting --in")->capture_default_str();
  abl->add_option("--ratios", ratios, "train,dev,test ratios for --in")->capture_default_str();
  abl->add_option("--train", train_dir, "training BRAT directory")->check(CLI::ExistingDirectory);
  abl->add_option("--dev", dev_dir, "development BRAT directory")->check(CLI::ExistingDirectory);
  abl->add_option("--test", test_dir, "test BRAT directory")->check(CLI::ExistingDirectory);
  abl->add_option("--systems", systems, "comma-separated: crf, rules")->capture_default_str();
  abl->add_option("--fractions", fractions, "training percentages")->capture_default_str();
  abl->add_option("--seed", seed, "subsampling seed")->required();
  abl->add_option("--names", names_path, "given-name list for the rules system")->capture_default_str();
  abl->add_option("--c1", crf.c1, "CRF L1 coefficient")->capture_default_str();
  abl->add_option("--c2", crf.c2, "CRF L2 coefficient")->capture_default_str();
  abl->add_option("--max-iter", crf.max_iterations, "CRF maximum iterations")->capture_default_str();
  abl->add_option("--threads", crf.threads, "CRF worker threads")->capture_default_str();
  abl->add_option("--out", out, "report CSV")->required();
  abl->add_option("--deltas", deltas_path, "F1 deltas CSV");
  abl->callback([&] {
    if (in.empty() == (train_dir.empty() || test_dir.empty()))
      throw CLI::ValidationError("ablate", "give either --in or both --train and --test");
    run = [&] {
      auto fr = parse_ints(fractions);
      Manifest m("ablate", abl);
      Corpus whole, tr, dv, te;
      if (!in.empty()) {
        auto r = parse_doubles(ratios, "--ratios", 3);
        check(deid_corpus_read_brat(in.c_str(), opt_c(common.labels), whole.out()));
        check(deid_corpus_split(whole.get(), r[0], r[1], r[2], split_seed, tr.out(), dv.out(), te.out()));
        m.corpus("input", whole.get());
        m.seed("split", split_seed);
      } else {
        check(deid_corpus_read_brat(train_dir.c_str(), opt_c(common.labels), tr.out()));
        if (!dev_dir.empty()) check(deid_corpus_read_brat(dev_dir.c_str(), opt_c(common.labels), dv.out()));
        check(deid_corpus_read_brat(test_dir.c_str(), opt_c(common.labels), te.out()));
      }
      OwnedString csv, deltas;
      check(deid_ablate(tr.get(), dv.get(), te.get(), systems.c_str(), fr.data(), fr.size(), seed, &crf,
                        opt_c(names_path), opt_c(common.labels), &csv.p, &deltas.p));
      write_text(out, csv.str());
      m.output(out);
      if (!deltas_path.empty()) {
        write_text(deltas_path, deltas.str());
        m.output(deltas_path);
      }
      m.corpus("train", tr.get());
      m.corpus("test", te.get());
      m.seed("subsample", seed);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // anonymise
  std::string mode = "mask", names_dir = default_resource("names"), placeholder_format = "[--{CAT}--]";
  std::string date_shift = "-365,365", age_shift = "-3,3";
  bool keep_mapping = false;
  auto* anon = app.add_subcommand("anonymise", "mask, replace or fake the annotated spans");
  add_common(anon, common);
  anon->add_option("--mode", mode, "mask, placeholder or surrogate")
      ->capture_default_str()
      ->check(CLI::IsMember({"mask", "placeholder", "surrogate"}));
  anon->add_option("--seed", seed, "surrogate seed")->capture_default_str();
  anon->add_option("--in", in, "annotated BRAT corpus")->required()->check(CLI::ExistingDirectory);
  anon->add_option("--out", out, "output directory")->required();
  anon->add_option("--placeholder-format", placeholder_format, "'{CAT}' marks the category")->capture_default_str();
  anon->add_option("--names-dir", names_dir, "name pools for surrogates")->capture_default_str();
  anon->add_option("--rules-dir", rules_dir, "gazetteers for same-category surrogates")->check(CLI::ExistingDirectory);
  anon->add_option("--date-shift", date_shift, "min,max days")->capture_default_str();
  anon->add_option("--age-shift", age_shift, "min,max years")->capture_default_str();
  anon->add_flag("--keep-mapping", keep_mapping,
                 "write <out>/mapping/<id>.map.json side tables (they contain the original values)");
  anon->callback([&] {
    run = [&] {
      auto ds = parse_doubles(date_shift, "--date-shift", 2);
      auto as = parse_doubles(age_shift, "--age-shift", 2);
      Manifest m("anonymise", anon);
      deid_anon_policy p;
      deid_anon_policy_default(&p);
      p.mode = mode == "mask" ? DEID_ANON_MASK : mode == "placeholder" ? DEID_ANON_PLACEHOLDER : DEID_ANON_SURROGATE;
      p.placeholder_format = placeholder_format.c_str();
      p.seed = seed;
      p.date_shift_min = static_cast<int>(ds[0]);
      p.date_shift_max = static_cast<int>(ds[1]);
      p.age_shift_min = static_cast<int>(as[0]);
      p.age_shift_max = static_cast<int>(as[1]);
      p.names_dir = opt_c(names_dir);
      Corpus c, result;
      Rules gaz;
      check(deid_corpus_read_brat(in.c_str(), opt_c(common.labels), c.out()));
      if (!rules_dir.empty()) check(deid_rules_load(rules_dir.c_str(), gaz.out()));
      std::string mapping_dir = (fs::path(out) / "mapping").string();
      check(deid_anonymise_corpus(c.get(), &p, gaz.get(), keep_mapping ? mapping_dir.c_str() : nullptr,
                                  result.out()));
      check(deid_corpus_write_brat(result.get(), out.c_str()));
      if (keep_mapping) {
        std::fprintf(stderr, "warning: %s holds original sensitive values\n", mapping_dir.c_str());
        m.output(mapping_dir);
        m.extra("sensitive_outputs", json::array({mapping_dir}));
      }
      m.corpus("input", c.get());
      m.corpus("output", result.get());
      m.seed("surrogate", seed);
      m.output(out);
      m.write(manifest_path(common.manifest, out));
    };
  });

  // import-predictions
  auto* imp = app.add_subcommand("import-predictions", "convert interchange TSV predictions to BRAT");
  add_common(imp, common);
  imp->add_option("--gold", gold_dir, "gold BRAT directory (texts)")->required()->check(CLI::ExistingDirectory);
  imp->add_option("--pred", pred_path, "interchange TSV file")->required()->check(CLI::ExistingFile);
  imp->add_option("--out", out, "output BRAT directory")->required();
  imp->callback([&] {
    run = [&] {
      Manifest m("import-predictions", imp);
      Corpus gold, pred;
      check(deid_corpus_read_brat(gold_dir.c_str(), opt_c(common.labels), gold.out()));
      check(deid_interchange_import(gold.get(), pred_path.c_str(), opt_c(common.labels), pred.out()));
      check(deid_corpus_write_brat(pred.get(), out.c_str()));
      m.corpus("gold", gold.get());
      m.corpus("predictions", pred.get());
      m.output(out);
      m.write(manifest_path(common.manifest, out));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    run();
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", deid_status_name(f.status), f.message.c_str());
    return 1;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const GateFailure& g) {
    std::fprintf(stderr, "gate failed: %s\n", g.message.c_str());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s: %s\n", deid_status_name(DEID_IO), e.what());
    return 1;
  }
  return 0;
}
