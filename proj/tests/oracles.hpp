#pragma once

// Slow reference implementations used to check the library. They are written
// independently of src/ and favour obviousness over speed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "crf/model.hpp"
#include "crf/objective.hpp"
#include "document.hpp"
#include "labels.hpp"
#include "random.hpp"

namespace oracle {

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

inline Prf prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

// Token scenarios: 0 detection, 1 relaxed, 2 strict. Each sensitive token
// becomes a (position, key) item; matches are found by comparing every gold
// item with every predicted one.
inline Prf token_scores(const deid::LabelSequence& gold, const deid::LabelSequence& pred, int scenario) {
  auto key = [&](const deid::BioLabel& l) {
    if (scenario == 0) return std::string("*");
    if (scenario == 1) return l.category;
    return l.str();
  };
  std::vector<std::pair<std::size_t, std::string>> g, p;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].str() != "O") g.emplace_back(i, key(gold[i]));
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i].str() != "O") p.emplace_back(i, key(pred[i]));
  std::size_t tp = 0;
  for (const auto& a : g)
    for (const auto& b : p)
      if (a == b) ++tp;
  return prf(tp, p.size() - tp, g.size() - tp);
}

struct Span {
  std::size_t begin, end;  // token indices, end exclusive
  std::string category;
};

// I-X without an open X span starts a new span.
inline std::vector<Span> decode(const deid::LabelSequence& labels) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (l.str() == "O") continue;
    bool continues = l.prefix == deid::BioPrefix::kI && !out.empty() && out.back().end == i &&
                     out.back().category == l.category;
    if (continues)
      out.back().end = i + 1;
    else
      out.push_back({i, i + 1, l.category});
  }
  return out;
}

inline Prf entity_scores(const std::vector<Span>& gold, const std::vector<Span>& pred, bool classify) {
  std::size_t tp = 0;
  for (const auto& a : gold)
    for (const auto& b : pred)
      if (a.begin == b.begin && a.end == b.end && (!classify || a.category == b.category)) ++tp;
  return prf(tp, pred.size() - tp, gold.size() - tp);
}

inline double path_score(const deid::crf::Matrix& state, const deid::crf::Matrix& trans,
                         const std::vector<std::size_t>& path) {
  double s = 0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += state(t, path[t]);
    if (t) s += trans(path[t - 1], path[t]);
  }
  return s;
}

// Calls f(path) for every label sequence of the state matrix's length.
inline void for_each_path(std::size_t length, std::size_t labels,
                          const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> path(length, 0);
  while (true) {
    f(path);
    std::size_t t = 0;
    while (t < length && ++path[t] == labels) path[t++] = 0;
    if (t == length) return;
  }
}

inline std::vector<std::size_t> brute_force_argmax(const deid::crf::Matrix& state,
                                                   const deid::crf::Matrix& trans) {
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for_each_path(state.rows, state.cols, [&](const std::vector<std::size_t>& p) {
    double s = path_score(state, trans, p);
    if (s > best_score) {
      best_score = s;
      best = p;
    }
  });
  return best;
}

inline double brute_force_log_z(const deid::crf::Matrix& state, const deid::crf::Matrix& trans) {
  std::vector<double> scores;
  for_each_path(state.rows, state.cols,
                [&](const std::vector<std::size_t>& p) { scores.push_back(path_score(state, trans, p)); });
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  double sum = 0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

// Marginal probability of label `y` at position `t`.
inline double brute_force_marginal(const deid::crf::Matrix& state, const deid::crf::Matrix& trans,
                                   std::size_t t, std::size_t y) {
  const double log_z = brute_force_log_z(state, trans);
  double p = 0;
  for_each_path(state.rows, state.cols, [&](const std::vector<std::size_t>& path) {
    if (path[t] == y) p += std::exp(path_score(state, trans, path) - log_z);
  });
  return p;
}

inline deid::crf::Matrix random_matrix(deid::Rng& rng, std::size_t r, std::size_t c, double scale) {
  deid::crf::Matrix m(r, c);
  for (auto& v : m.data) v = (2 * deid::uniform_real(rng) - 1) * scale;
  return m;
}

// Central differences of `f` along coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> w, std::size_t k, double h) {
  const double w0 = w[k];
  w[k] = w0 + h;
  const double up = f(w);
  w[k] = w0 - h;
  const double down = f(w);
  return (up - down) / (2 * h);
}

}  // namespace oracle
