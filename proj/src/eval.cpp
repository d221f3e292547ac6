#include "eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include "bio.hpp"
#include "error.hpp"

namespace deid::eval {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kTokenDetection: return "token-detection";
    case Scenario::kTokenRelaxed: return "token-relaxed";
    case Scenario::kTokenStrict: return "token-strict";
    case Scenario::kEntityDetection: return "entity-detection";
    case Scenario::kEntityClassification: return "entity-classification";
  }
  return "unknown";
}

bool is_token_scenario(Scenario s) {
  return s == Scenario::kTokenDetection || s == Scenario::kTokenRelaxed ||
         s == Scenario::kTokenStrict;
}

Metrics Metrics::from_counts(Scenario s, const Counts& c) {
  Metrics m;
  m.scenario = s;
  m.tp = c.tp;
  m.fp = c.fp;
  m.fn = c.fn;
  m.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Counts token_counts(const LabelSequence& gold, const LabelSequence& pred, Scenario scenario) {
  if (!is_token_scenario(scenario))
    throw Error(ErrorCode::kInvalidArgument, "token_counts needs a token scenario");
  if (gold.size() != pred.size())
    throw Error(ErrorCode::kLengthMismatch, "gold has " + std::to_string(gold.size()) +
                                                " labels, prediction " + std::to_string(pred.size()));
  Counts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = !gold[i].is_outside(), p = !pred[i].is_outside();
    bool match = false;
    if (g && p) {
      switch (scenario) {
        case Scenario::kTokenDetection: match = true; break;
        case Scenario::kTokenRelaxed: match = gold[i].category == pred[i].category; break;
        default: match = gold[i] == pred[i]; break;
      }
    }
    if (match) {
      ++c.tp;
    } else {
      if (p) ++c.fp;
      if (g) ++c.fn;
    }
  }
  return c;
}

Metrics token_metrics(const LabelSequence& gold, const LabelSequence& pred, Scenario scenario) {
  return Metrics::from_counts(scenario, token_counts(gold, pred, scenario));
}

Counts entity_counts(const std::vector<Annotation>& gold, const std::vector<Annotation>& pred,
                     Scenario mode) {
  if (mode != Scenario::kEntityDetection && mode != Scenario::kEntityClassification)
    throw Error(ErrorCode::kInvalidArgument, "entity_counts needs an entity scenario");
  using Key = std::tuple<std::size_t, std::size_t, std::string>;
  auto key = [&](const Annotation& a) {
    return Key{a.start, a.end, mode == Scenario::kEntityClassification ? a.category : std::string()};
  };
  std::vector<Key> g, p;
  for (const auto& a : gold) g.push_back(key(a));
  for (const auto& a : pred) p.push_back(key(a));
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  std::vector<Key> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  Counts c;
  c.tp = common.size();
  c.fp = p.size() - c.tp;
  c.fn = g.size() - c.tp;
  return c;
}

Metrics entity_metrics(const std::vector<Annotation>& gold, const std::vector<Annotation>& pred,
                       Scenario mode) {
  return Metrics::from_counts(mode, entity_counts(gold, pred, mode));
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> categories)
    : classes_(std::move(categories)) {
  classes_.push_back("O");
  counts_.assign(classes_.size(), std::vector<std::size_t>(classes_.size(), 0));
}

std::size_t ConfusionMatrix::index_of(std::string_view cls) const {
  auto it = std::find(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end())
    throw Error(ErrorCode::kUnknownLabel, "category '" + std::string(cls) + "' not in confusion matrix");
  return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(const LabelSequence& gold, const LabelSequence& pred) {
  if (gold.size() != pred.size())
    throw Error(ErrorCode::kLengthMismatch, "confusion matrix: sequence lengths differ");
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = index_of(gold[i].is_outside() ? "O" : gold[i].category);
    auto p = index_of(pred[i].is_outside() ? "O" : pred[i].category);
    ++counts_[g][p];
  }
}

std::size_t ConfusionMatrix::row_total(std::size_t gold) const {
  std::size_t n = 0;
  for (auto c : counts_[gold]) n += c;
  return n;
}

std::vector<std::vector<double>> ConfusionMatrix::normalized() const {
  const std::size_t K = classes_.size();
  std::vector<std::vector<double>> out(K, std::vector<double>(K, 0.0));
  for (std::size_t r = 0; r < K; ++r) {
    const std::size_t n = row_total(r);
    if (n == 0) continue;
    // Work in hundredths: cell = 100 * count / n = floor + rem / n.
    std::vector<std::size_t> floor(K), rem(K), cents(K);
    std::size_t half_up_sum = 0;
    for (std::size_t c = 0; c < K; ++c) {
      floor[c] = 100 * counts_[r][c] / n;
      rem[c] = 100 * counts_[r][c] % n;
      cents[c] = floor[c] + (2 * rem[c] >= n ? 1 : 0);
      half_up_sum += cents[c];
    }
    if (half_up_sum != 100) {
      std::size_t base = 0;
      for (auto f : floor) base += f;
      std::vector<std::size_t> order(K);
      for (std::size_t c = 0; c < K; ++c) order[c] = c;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
      cents = floor;
      for (std::size_t k = 0; base + k < 100; ++k) ++cents[order[k % K]];
    }
    for (std::size_t c = 0; c < K; ++c) out[r][c] = static_cast<double>(cents[c]) / 100.0;
  }
  return out;
}

std::string ConfusionMatrix::to_tsv() const {
  auto norm = normalized();
  std::ostringstream out;
  out << "gold\\pred";
  for (const auto& c : classes_) out << '\t' << c;
  out << '\n';
  for (std::size_t r = 0; r < classes_.size(); ++r) {
    out << classes_[r];
    for (double v : norm[r]) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string ConfusionMatrix::counts_to_tsv() const {
  std::ostringstream out;
  out << "gold\\pred";
  for (const auto& c : classes_) out << '\t' << c;
  out << '\n';
  for (std::size_t r = 0; r < classes_.size(); ++r) {
    out << classes_[r];
    for (auto v : counts_[r]) out << '\t' << v;
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion_matrix(const LabelSequence& gold, const LabelSequence& pred,
                                 const std::vector<std::string>& categories) {
  ConfusionMatrix m(categories);
  m.add(gold, pred);
  return m;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string EvalReport::csv_rows(const std::string& system, int fraction) const {
  std::ostringstream out;
  for (const auto& [s, m] : metrics)
    out << system << ',' << fraction << ',' << scenario_name(s) << ',' << format_metric(m.precision)
        << ',' << format_metric(m.recall) << ',' << format_metric(m.f1) << ',' << m.tp << ','
        << m.fp << ',' << m.fn << '\n';
  return out.str();
}

double EvalReport::min_f1() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& [s, m] : metrics) v = std::min(v, m.f1);
  return metrics.empty() ? 0.0 : v;
}

EvalReport evaluate(const std::vector<EvalDocument>& docs, const std::vector<std::string>& categories) {
  std::map<Scenario, Counts> counts;
  EvalReport report;
  report.confusion = ConfusionMatrix(categories);
  for (const auto& d : docs) {
    if (d.gold_labels.size() != d.pred_labels.size())
      throw Error(ErrorCode::kLengthMismatch, d.id + ": sentence counts differ");
    for (std::size_t s = 0; s < d.gold_labels.size(); ++s) {
      for (auto sc : {Scenario::kTokenDetection, Scenario::kTokenRelaxed, Scenario::kTokenStrict})
        counts[sc] += token_counts(d.gold_labels[s], d.pred_labels[s], sc);
      report.confusion.add(d.gold_labels[s], d.pred_labels[s]);
    }
    for (auto sc : {Scenario::kEntityDetection, Scenario::kEntityClassification})
      counts[sc] += entity_counts(d.gold_spans, d.pred_spans, sc);
  }
  for (auto sc : kAllScenarios) report.metrics[sc] = Metrics::from_counts(sc, counts[sc]);
  return report;
}

namespace {

std::map<std::string, const Document*> by_id(const Corpus& corpus) {
  std::map<std::string, const Document*> m;
  for (const auto& d : corpus) m[d.id] = &d;
  return m;
}

}  // namespace

std::vector<EvalDocument> align_corpora(const Corpus& gold, const Corpus& pred) {
  auto gold_ids = by_id(gold);
  auto pred_ids = by_id(pred);
  for (const auto& [id, doc] : pred_ids) {
    auto g = gold_ids.find(id);
    if (g == gold_ids.end())
      throw Error(ErrorCode::kCrossDocumentAnnotation, "prediction for unknown document '" + id + "'");
    for (const auto& a : doc->annotations)
      if (a.end > g->second->text.size())
        throw Error(ErrorCode::kCrossDocumentAnnotation,
                    id + ": predicted span " + a.id + " lies outside the gold text");
  }
  std::vector<EvalDocument> out;
  for (const auto& g : gold) {
    EvalDocument d;
    d.id = g.id;
    d.gold_spans = g.annotations;
    auto p = pred_ids.find(g.id);
    if (p != pred_ids.end()) d.pred_spans = normalize_annotations(p->second->annotations);
    for (const auto& s : split_sentences(g)) {
      d.gold_labels.push_back(encode_bio(s, g.annotations));
      d.pred_labels.push_back(encode_bio_first_wins(s, d.pred_spans));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<EvalDocument> align_interchange(const Corpus& gold, const InterchangeFile& pred) {
  auto gold_ids = by_id(gold);
  std::map<std::string, std::vector<const InterchangeSentence*>> grouped;
  for (const auto& s : pred.sentences) {
    auto g = gold_ids.find(s.sentence.doc_id);
    if (g == gold_ids.end())
      throw Error(ErrorCode::kCrossDocumentAnnotation,
                  "interchange sentence for unknown document '" + s.sentence.doc_id + "'");
    for (const auto& t : s.sentence.tokens)
      if (t.end > g->second->text.size())
        throw Error(ErrorCode::kCrossDocumentAnnotation,
                    s.sentence.doc_id + ": token '" + t.surface + "' lies outside the gold text");
    grouped[s.sentence.doc_id].push_back(&s);
  }
  std::vector<EvalDocument> out;
  for (const auto& g : gold) {
    EvalDocument d;
    d.id = g.id;
    d.gold_spans = g.annotations;
    auto it = grouped.find(g.id);
    if (it == grouped.end()) {
      for (const auto& s : split_sentences(g)) {
        d.gold_labels.push_back(encode_bio(s, g.annotations));
        d.pred_labels.emplace_back(s.tokens.size());
      }
    } else {
      for (const auto* s : it->second) {
        d.gold_labels.push_back(encode_bio_first_wins(s->sentence, g.annotations));
        auto labels = s->pred.empty() ? LabelSequence(s->sentence.tokens.size()) : s->pred;
        auto spans = decode_bio(s->sentence.tokens, labels, RepairPolicy::kIAsB);
        d.pred_spans.insert(d.pred_spans.end(), spans.begin(), spans.end());
        d.pred_labels.push_back(std::move(labels));
      }
      attach_surfaces(g, d.pred_spans);
    }
    out.push_back(std::move(d));
  }
  return out;
}

InterchangeFile to_interchange(const Corpus& gold, const Corpus* pred) {
  std::map<std::string, const Document*> preds;
  if (pred) preds = by_id(*pred);
  InterchangeFile out;
  for (const auto& g : gold) {
    const Document* p = nullptr;
    if (pred) {
      auto it = preds.find(g.id);
      if (it == preds.end())
        throw Error(ErrorCode::kCrossDocumentAnnotation, "no predictions for document '" + g.id + "'");
      if (it->second->text != g.text)
        throw Error(ErrorCode::kCrossDocumentAnnotation, g.id + ": predicted text differs from gold");
      p = it->second;
    }
    for (auto& s : split_sentences(g)) {
      InterchangeSentence row;
      row.gold = encode_bio(s, g.annotations);
      if (p) row.pred = encode_bio_first_wins(s, p->annotations);
      row.sentence = std::move(s);
      out.sentences.push_back(std::move(row));
    }
  }
  return out;
}

Corpus import_predictions(const Corpus& gold, const InterchangeFile& pred) {
  auto docs = align_interchange(gold, pred);
  Corpus out;
  out.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    Document d;
    d.id = gold[i].id;
    d.text = gold[i].text;
    d.annotations = std::move(docs[i].pred_spans);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace deid::eval
