// Exercises the shared library through its public header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "deid/deid.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  auto p = fs::temp_directory_path() / ("deid_capi_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  deid_string_free(s);
  return out;
}

deid_crf_config quick_config() {
  deid_crf_config c;
  deid_crf_config_default(&c);
  c.max_iterations = 30;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(deid_version()).size() > 0);
  CHECK(std::string(deid_status_name(DEID_OK)) == "Ok");
  CHECK(std::string(deid_status_name(DEID_OVERLAP)) == "OverlapError");
  CHECK(std::string(deid_status_name(static_cast<deid_status>(999))) == "UnknownStatus");

  deid_corpus* c = nullptr;
  CHECK(deid_corpus_generate(1, 3, nullptr) == DEID_INVALID_ARGUMENT);
  CHECK(std::string(deid_last_error()).find("NULL") != std::string::npos);
  CHECK(deid_corpus_read_brat("/nonexistent/deid", nullptr, &c) == DEID_FILE_MISSING);
  CHECK(c == nullptr);
  CHECK(std::string(deid_last_error()).size() > 0);
  size_t n = 0;
  CHECK(deid_corpus_size(nullptr, &n) == DEID_INVALID_ARGUMENT);

  deid_corpus_free(nullptr);
  deid_rules_free(nullptr);
  deid_crf_free(nullptr);
  deid_report_free(nullptr);
  deid_string_free(nullptr);
}

TEST_CASE("anonymise text") {
  const char* text = "Paciente de 64 años operado de una hernia el 12/01/2016 por la Dra Lopez";
  deid_span spans[] = {{"Age", 12, 19}, {"Date", 45, 55}, {"Doctor", 60, 72}};
  deid_anon_policy p;
  deid_anon_policy_default(&p);
  char* out = nullptr;
  REQUIRE(deid_anonymise_text("ex", text, spans, 3, &p, &out) == DEID_OK);
  CHECK(take(out) == "Paciente de XXXXXXX operado de una hernia el XXXXXXXXXX por XXXXXXXXXXXX");
  p.mode = DEID_ANON_PLACEHOLDER;
  REQUIRE(deid_anonymise_text("ex", text, spans, 3, &p, &out) == DEID_OK);
  CHECK(take(out) == "Paciente de [-AGE-] operado de una hernia el [--DATE--] por [--DOCTOR--]");

  deid_span overlapping[] = {{"Age", 12, 19}, {"Age", 15, 22}};
  CHECK(deid_anonymise_text("ex", text, overlapping, 2, &p, &out) == DEID_OVERLAP);
  deid_span unknown[] = {{"Planet", 0, 3}};
  p.mode = DEID_ANON_SURROGATE;
  CHECK(deid_anonymise_text("ex", text, unknown, 1, &p, &out) == DEID_UNKNOWN_CATEGORY);
  deid_span far[] = {{"Age", 70, 200}};
  CHECK(deid_anonymise_text("ex", text, far, 1, &p, &out) == DEID_OFFSET_OUT_OF_RANGE);
}

TEST_CASE("pipeline through the C interface") {
  deid_corpus* all = nullptr;
  REQUIRE(deid_corpus_generate(3, 80, &all) == DEID_OK);
  size_t n = 0;
  CHECK(deid_corpus_size(all, &n) == DEID_OK);
  CHECK(n == 80);
  const char* id = nullptr;
  const char* text = nullptr;
  CHECK(deid_corpus_document(all, 0, &id, &text) == DEID_OK);
  CHECK(std::strlen(text) > 0);
  CHECK(deid_corpus_document(all, 80, &id, &text) == DEID_INDEX_OUT_OF_RANGE);

  deid_corpus *train = nullptr, *dev = nullptr, *test = nullptr;
  REQUIRE(deid_corpus_split(all, 0.72, 0.08, 0.20, 5, &train, &dev, &test) == DEID_OK);
  CHECK(deid_corpus_split(all, 0.5, 0.1, 0.1, 5, &train, &dev, &test) == DEID_INVALID_ARGUMENT);

  // BRAT round trip keeps the corpus hash (documents are read back in id
  // order, which is generation order).
  auto dir = scratch("brat");
  REQUIRE(deid_corpus_write_brat(all, dir.c_str()) == DEID_OK);
  deid_corpus* reread = nullptr;
  REQUIRE(deid_corpus_read_brat(dir.c_str(), nullptr, &reread) == DEID_OK);
  uint64_t h1 = 0, h2 = 0;
  deid_corpus_hash(all, &h1);
  deid_corpus_hash(reread, &h2);
  CHECK(h1 == h2);

  // Gold against itself.
  deid_report* report = nullptr;
  REQUIRE(deid_evaluate(all, reread, nullptr, &report) == DEID_OK);
  double min_f1 = 0;
  CHECK(deid_report_min_f1(report, &min_f1) == DEID_OK);
  CHECK(min_f1 == 1.0);
  char* csv = nullptr;
  REQUIRE(deid_report_csv(report, "gold", 100, &csv) == DEID_OK);
  auto csv_text = take(csv);
  CHECK(csv_text.rfind("system,fraction,scenario,precision,recall,f1,tp,fp,fn\n", 0) == 0);
  char* confusion = nullptr;
  REQUIRE(deid_report_confusion(report, 1, &confusion) == DEID_OK);
  CHECK(take(confusion).find("Date") != std::string::npos);
  deid_report_free(report);

  // CRF train, save, load, tag.
  deid_crf_config cfg = quick_config();
  deid_crf_model* model = nullptr;
  deid_train_stats stats;
  REQUIRE(deid_crf_train(train, dev, &cfg, &model, &stats) == DEID_OK);
  CHECK(stats.num_parameters > 0);
  CHECK(stats.iterations > 0);
  auto model_path = scratch("model.bin");
  REQUIRE(deid_crf_save(model, model_path.c_str()) == DEID_OK);
  deid_crf_model* loaded = nullptr;
  REQUIRE(deid_crf_load(model_path.c_str(), &loaded) == DEID_OK);
  deid_corpus* tagged = nullptr;
  REQUIRE(deid_tag_crf(loaded, test, 1, &tagged) == DEID_OK);
  REQUIRE(deid_evaluate(test, tagged, nullptr, &report) == DEID_OK);
  deid_metric strict;
  REQUIRE(deid_report_metric(report, DEID_TOKEN_STRICT, &strict) == DEID_OK);
  CHECK(strict.f1 > 0.8);
  deid_report_free(report);

  // Interchange export of the predictions scores the same as the corpus.
  auto tsv = scratch("pred.tsv");
  REQUIRE(deid_interchange_write(test, tagged, tsv.c_str()) == DEID_OK);
  REQUIRE(deid_evaluate_interchange(test, tsv.c_str(), nullptr, &report) == DEID_OK);
  deid_metric via_tsv;
  deid_report_metric(report, DEID_TOKEN_STRICT, &via_tsv);
  CHECK(via_tsv.tp == strict.tp);
  CHECK(via_tsv.fp == strict.fp);
  deid_report_free(report);
  deid_corpus* imported = nullptr;
  REQUIRE(deid_interchange_import(test, tsv.c_str(), nullptr, &imported) == DEID_OK);
  size_t a1 = 0, a2 = 0;
  deid_corpus_annotation_count(imported, &a1);
  deid_corpus_annotation_count(tagged, &a2);
  CHECK(a1 == a2);

  // Rules.
  std::string names = std::string(DEID_RESOURCES_DIR) + "/names/ine_names.txt";
  deid_rules* rules = nullptr;
  REQUIRE(deid_rules_build(train, names.c_str(), &rules) == DEID_OK);
  auto rules_dir = scratch("rules");
  REQUIRE(deid_rules_save(rules, rules_dir.c_str()) == DEID_OK);
  deid_rules* rules2 = nullptr;
  REQUIRE(deid_rules_load(rules_dir.c_str(), &rules2) == DEID_OK);
  deid_corpus* by_rules = nullptr;
  REQUIRE(deid_tag_rules(rules2, test, 1, &by_rules) == DEID_OK);
  REQUIRE(deid_evaluate(test, by_rules, nullptr, &report) == DEID_OK);
  deid_metric det;
  deid_report_metric(report, DEID_TOKEN_DETECTION, &det);
  CHECK(det.precision > det.recall);
  deid_report_free(report);

  // Anonymise the corpus with side tables.
  deid_anon_policy p;
  deid_anon_policy_default(&p);
  p.mode = DEID_ANON_SURROGATE;
  std::string names_dir = std::string(DEID_RESOURCES_DIR) + "/names";
  p.names_dir = names_dir.c_str();
  auto maps = scratch("maps");
  deid_corpus* anon = nullptr;
  REQUIRE(deid_anonymise_corpus(test, &p, rules, maps.c_str(), &anon) == DEID_OK);
  CHECK(deid_corpus_document(test, 0, &id, &text) == DEID_OK);
  CHECK(fs::exists(maps / (std::string(id) + ".map.json")));

  // Ablation over two fractions and both systems.
  int fractions[] = {20, 100};
  char* ab_csv = nullptr;
  char* ab_deltas = nullptr;
  REQUIRE(deid_ablate(train, dev, test, "crf,rules", fractions, 2, 1, &cfg, names.c_str(), nullptr, &ab_csv,
                      &ab_deltas) == DEID_OK);
  auto ab = take(ab_csv);
  CHECK(std::count(ab.begin(), ab.end(), '\n') == 1 + 2 * 2 * 5);
  CHECK(take(ab_deltas).find("delta_f1") != std::string::npos);
  CHECK(deid_ablate(train, dev, test, "svm", fractions, 2, 1, &cfg, nullptr, nullptr, &ab_csv, nullptr) ==
        DEID_INVALID_ARGUMENT);

  // Corrupt model file.
  {
    FILE* f = std::fopen(model_path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 40, SEEK_SET);
    int c = std::fgetc(f);
    std::fseek(f, 40, SEEK_SET);
    std::fputc(c ^ 0xFF, f);
    std::fclose(f);
  }
  deid_crf_model* broken = nullptr;
  CHECK(deid_crf_load(model_path.c_str(), &broken) == DEID_CORRUPT_FILE);
  CHECK(broken == nullptr);

  for (auto* c : {all, train, dev, test, reread, tagged, imported, by_rules, anon}) deid_corpus_free(c);
  deid_rules_free(rules);
  deid_rules_free(rules2);
  deid_crf_free(model);
  deid_crf_free(loaded);
  for (auto& p : {dir, model_path, tsv, rules_dir, maps}) fs::remove_all(p);
}
