#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "document.hpp"
#include "interchange.hpp"
#include "labels.hpp"

namespace deid::eval {

enum class Scenario {
  kTokenDetection,
  kTokenRelaxed,
  kTokenStrict,
  kEntityDetection,
  kEntityClassification,
};

inline constexpr std::array<Scenario, 5> kAllScenarios = {
    Scenario::kTokenDetection, Scenario::kTokenRelaxed, Scenario::kTokenStrict,
    Scenario::kEntityDetection, Scenario::kEntityClassification};

std::string_view scenario_name(Scenario s);
bool is_token_scenario(Scenario s);

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

struct Metrics {
  Scenario scenario = Scenario::kTokenDetection;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;

  // Empty denominators give 0.
  static Metrics from_counts(Scenario s, const Counts& c);
};

// A token predicted non-O is a false positive unless it matches gold under
// the scenario; a gold non-O token is a false negative unless matched. A
// category (or, for strict, prefix) mismatch therefore counts once each way.
Counts token_counts(const LabelSequence& gold, const LabelSequence& pred, Scenario scenario);
Metrics token_metrics(const LabelSequence& gold, const LabelSequence& pred, Scenario scenario);

// Exact-offset matching; classification also requires equal categories.
Counts entity_counts(const std::vector<Annotation>& gold, const std::vector<Annotation>& pred,
                     Scenario mode);
Metrics entity_metrics(const std::vector<Annotation>& gold, const std::vector<Annotation>& pred,
                       Scenario mode);

// Rows are gold classes, columns predicted classes, both the categories
// followed by "O". Labels are compared by category only.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> categories);

  void add(const LabelSequence& gold, const LabelSequence& pred);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t count(std::size_t gold, std::size_t pred) const { return counts_[gold][pred]; }
  std::size_t row_total(std::size_t gold) const;
  std::size_t index_of(std::string_view cls) const;

  // Row-normalized proportions at two decimals. Cells round half-up; when a
  // row's rounded cells do not sum to 1.00, the shortfall or excess goes to
  // the cells with the largest (smallest) remainders. Empty rows stay zero.
  std::vector<std::vector<double>> normalized() const;

  std::string to_tsv() const;         // normalized view
  std::string counts_to_tsv() const;  // raw counts

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<std::size_t>> counts_;
};

ConfusionMatrix confusion_matrix(const LabelSequence& gold, const LabelSequence& pred,
                                 const std::vector<std::string>& categories);

// Everything needed to score one document under all five scenarios.
struct EvalDocument {
  std::string id;
  std::vector<LabelSequence> gold_labels;  // per sentence
  std::vector<LabelSequence> pred_labels;
  std::vector<Annotation> gold_spans;
  std::vector<Annotation> pred_spans;
};

struct EvalReport {
  std::map<Scenario, Metrics> metrics;
  ConfusionMatrix confusion;

  // Rows of `system,fraction,scenario,precision,recall,f1,tp,fp,fn`, no header.
  std::string csv_rows(const std::string& system, int fraction) const;
  double min_f1() const;
};

inline constexpr std::string_view kReportHeader = "system,fraction,scenario,precision,recall,f1,tp,fp,fn";

EvalReport evaluate(const std::vector<EvalDocument>& docs, const std::vector<std::string>& categories);

// Gold and predictions as BRAT corpora over the same texts. Tokens come from
// the gold text; predicted spans are snapped to them.
std::vector<EvalDocument> align_corpora(const Corpus& gold, const Corpus& pred);

// Gold BRAT corpus against token-level predictions from an interchange file
// (its pred column, decoded with the i-as-b repair for the entity scenarios).
std::vector<EvalDocument> align_interchange(const Corpus& gold, const InterchangeFile& pred);

// Gold corpus (and optionally predictions over the same texts) as an
// interchange file, one block per sentence of the gold segmentation.
InterchangeFile to_interchange(const Corpus& gold, const Corpus* pred = nullptr);

// Predictions from an interchange file as a BRAT corpus over the gold texts.
Corpus import_predictions(const Corpus& gold, const InterchangeFile& pred);

std::string format_metric(double v);

}  // namespace deid::eval
