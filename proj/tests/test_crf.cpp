#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"

#include "brat.hpp"
#include "crf/features.hpp"
#include "crf/owlqn.hpp"
#include "crf/trainer.hpp"
#include "error.hpp"
#include "split.hpp"
#include "synth.hpp"

using namespace deid;
using namespace deid::crf;

namespace {

Sentence sentence(const std::string& text) {
  Sentence s;
  s.tokens = tokenize(text);
  return s;
}

bool has(const FeatureVector& fv, const std::string& name) {
  for (const auto& a : fv)
    if (a.name == name) return true;
  return false;
}

std::vector<LabelledSentence> synthetic_sentences(std::uint64_t seed, std::size_t docs) {
  auto cfg = synth::GeneratorConfig::defaults();
  cfg.seed = seed;
  cfg.n_documents = docs;
  return labelled_sentences(synth::generate(cfg));
}

// Three labels, one "bias" attribute firing for all of them, every transition.
CrfModel tiny_model() {
  CrfModel m;
  m.labels = {"O", "B-Date", "I-Date"};
  m.attributes = {"bias"};
  m.attr_offsets = {0, 3};
  m.state_labels = {0, 1, 2};
  m.transition_param.resize(9);
  for (int i = 0; i < 9; ++i) m.transition_param[i] = 3 + i;
  m.weights.assign(12, 0.0);
  m.index();
  return m;
}

}  // namespace

TEST_CASE("features of a date token") {
  auto s = sentence("operado el 12/01/2016 por");
  auto fv = extract_features(s, 2);
  CHECK(has(fv, "suffix2=16"));
  CHECK(has(fv, "prefix3=12/"));
  CHECK_FALSE(has(fv, "is_number"));
  CHECK(feature_value(fv, "punct_ratio") == doctest::Approx(0.2));
  CHECK(feature_value(fv, "digit_ratio") == doctest::Approx(0.8));
  CHECK_FALSE(has(fv, "BOS"));
  CHECK_FALSE(has(fv, "EOS"));
  CHECK(has(fv, "-1:suffix2=el"));
  CHECK(has(fv, "+1:prefix3=por"));
  CHECK(has(fv, "len=10"));
  CHECK(has(fv, "sent_len=4"));
  CHECK(extract_sentence_features(s)[2] == fv);
}

TEST_CASE("features at sentence edges and of symbols") {
  auto one = extract_features(sentence("Alta"), 0);
  CHECK(has(one, "BOS"));
  CHECK(has(one, "EOS"));
  CHECK(has(one, "casing=title"));
  auto at = extract_features(sentence("@"), 0);
  CHECK(feature_value(at, "contains_at") == 1.0);
  CHECK(feature_value(at, "is_punct") == 1.0);
  CHECK(has(at, "len=1"));
  CHECK(has(extract_features(sentence("1.5"), 0), "is_number"));
  Sentence s = sentence("vive");
  s.tokens[0].features.lemma = "vivir";
  s.tokens[0].features.pos = "VERB";
  CHECK(has(extract_features(s, 0), "lemma=vivir"));
  CHECK(has(extract_features(s, 0), "pos=VERB"));
  CHECK_THROWS_AS(extract_features(s, 1), Error);
}

TEST_CASE("objective at zero weights is log L per token") {
  auto m = tiny_model();
  std::vector<CompiledSentence> data{{{{{0, 1.0}}}, {1}}};
  Objective obj(m, data, 0.0, 1);
  std::vector<double> g;
  CHECK(obj.evaluate(m.weights, g) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  data.push_back(data[0]);
  Objective twice(m, data, 0.0, 1);
  CHECK(twice.negative_log_likelihood(m.weights) == doctest::Approx(2 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("duplicated sentences double their contribution") {
  auto train = synthetic_sentences(3, 4);
  train.resize(6);
  CrfConfig cfg;
  auto [model, data] = compile_training_set(train, cfg);
  Rng rng(9);
  std::vector<double> w(model.weights.size());
  for (auto& v : w) v = uniform_real(rng) - 0.5;
  std::vector<CompiledSentence> one{data[2]}, two{data[2], data[2]};
  Objective a(model, one, 0.0, 1), b(model, two, 0.0, 1);
  CHECK(b.negative_log_likelihood(w) == doctest::Approx(2 * a.negative_log_likelihood(w)).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto train = synthetic_sentences(seed, 6);
    CrfConfig cfg;
    auto [model, data] = compile_training_set(train, cfg);
    const double c2 = seed % 2 ? 0.1 : 0.0;
    Objective obj(model, data, c2, 2);
    Rng rng(seed * 101);
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
      double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-2});
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("forward-backward against enumeration") {
  Rng rng(77);
  for (int rep = 0; rep < 30; ++rep) {
    std::size_t T = 1 + uniform_index(rng, 5), L = 2 + uniform_index(rng, 3);
    auto state = oracle::random_matrix(rng, T, L, 3.0);
    auto trans = oracle::random_matrix(rng, L, L, 3.0);
    auto fb = forward_backward(state, trans);
    CHECK(std::abs(fb.log_z_forward - fb.log_z_backward) < 1e-8);
    CHECK(fb.log_z_forward == doctest::Approx(oracle::brute_force_log_z(state, trans)).epsilon(1e-10));
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0;
      for (std::size_t y = 0; y < L; ++y) {
        sum += fb.marginals(t, y);
        CHECK(fb.marginals(t, y) == doctest::Approx(oracle::brute_force_marginal(state, trans, t, y)));
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("forward-backward with large scores") {
  Rng rng(5);
  auto state = oracle::random_matrix(rng, 40, 5, 800.0);
  auto trans = oracle::random_matrix(rng, 5, 5, 800.0);
  auto fb = forward_backward(state, trans);
  CHECK(std::isfinite(fb.log_z_forward));
  CHECK(std::abs(fb.log_z_forward - fb.log_z_backward) < 1e-8 * std::abs(fb.log_z_forward));
}

TEST_CASE("viterbi") {
  Matrix state(1, 3), trans(3, 3);
  state(0, 0) = 2.0;
  CHECK(viterbi_decode(state, trans) == std::vector<std::size_t>{0});
  Matrix tie(2, 3), flat(3, 3);
  CHECK(viterbi_decode(tie, flat) == std::vector<std::size_t>{0, 0});

  // Labels O, B-Date, I-Date; I-Date after O is forbidden.
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto s = oracle::random_matrix(rng, 6, 3, 5.0);
    auto t = oracle::random_matrix(rng, 3, 3, 5.0);
    t(0, 2) = -1e9;
    auto path = viterbi_decode(s, t);
    for (std::size_t i = 1; i < path.size(); ++i) CHECK_FALSE((path[i - 1] == 0 && path[i] == 2));
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    std::size_t T = 1 + uniform_index(r, 6), L = 1 + uniform_index(r, 5);
    auto s = oracle::random_matrix(r, T, L, 4.0);
    auto t = oracle::random_matrix(r, L, L, 4.0);
    CHECK(viterbi_decode(s, t) == oracle::brute_force_argmax(s, t));
  }
}

TEST_CASE("owlqn on a separable quadratic") {
  // f(x) = sum (x_i - a_i)^2 with L1 c: minimizer is soft-thresholding a_i by c/2.
  std::vector<double> a{3.0, -0.2, 0.05, -4.0};
  auto f = [&](const std::vector<double>& x, std::vector<double>& g) {
    g.assign(x.size(), 0.0);
    double v = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v += (x[i] - a[i]) * (x[i] - a[i]);
      g[i] = 2 * (x[i] - a[i]);
    }
    return v;
  };
  OwlqnOptions opt;
  opt.c1 = 1.0;
  opt.tolerance = 1e-10;
  opt.max_iterations = 200;
  auto res = minimize_owlqn(f, std::vector<double>(4, 0.0), opt);
  CHECK(res.x[0] == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(res.x[1] == 0.0);
  CHECK(res.x[2] == 0.0);
  CHECK(res.x[3] == doctest::Approx(-3.5).epsilon(1e-6));
  for (std::size_t i = 1; i < res.objective.size(); ++i) CHECK(res.objective[i] <= res.objective[i - 1] + 1e-12);
}

TEST_CASE("training") {
  auto all = synthetic_sentences(17, 60);
  std::vector<LabelledSentence> train(all.begin(), all.begin() + 200), held(all.begin() + 200, all.end());
  CrfConfig cfg;
  cfg.max_iterations = 60;

  SUBCASE("fits the data") {
    auto [model, stats] = fit_crf(train, held, cfg);
    CHECK(stats.iterations > 0);
    CHECK(stats.dev_tokens > 0);
    CHECK(stats.dev_accuracy > 0.97);
    CHECK(model.labels[0] == "O");
  }
  SUBCASE("deterministic across thread counts") {
    cfg.threads = 1;
    auto a = fit_crf(train, {}, cfg).first;
    cfg.threads = 4;
    auto b = fit_crf(train, {}, cfg).first;
    auto c = fit_crf(train, {}, cfg).first;
    CHECK(a.weights == b.weights);
    CHECK(b.weights == c.weights);
  }
  SUBCASE("extreme regularization") {
    cfg.c1 = 1e6;
    cfg.c2 = 1e6;
    auto [model, stats] = fit_crf(train, {}, cfg);
    for (double w : model.weights) CHECK(std::abs(w) < 1e-4);
    for (const auto& s : held)
      for (const auto& l : model.tag(s.sentence)) CHECK(l.is_outside());
  }
  SUBCASE("empty training set") {
    CHECK_THROWS_AS(fit_crf({}, {}, cfg), Error);
    try {
      fit_crf({}, {}, cfg);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyTrainingSet);
    }
  }
  SUBCASE("invalid config") {
    cfg.c1 = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("model file") {
  auto all = synthetic_sentences(23, 40);
  CrfConfig cfg;
  cfg.max_iterations = 30;
  auto [model, stats] = fit_crf(all, {}, cfg);
  auto path = (std::filesystem::temp_directory_path() / "deid_model.bin").string();
  model.save(path);
  auto back = CrfModel::load(path);
  CHECK(back.weights == model.weights);
  CHECK(back.labels == model.labels);
  std::size_t n = 0;
  for (const auto& s : all) {
    if (++n > 100) break;
    CHECK(back.tag(s.sentence) == model.tag(s.sentence));
  }

  auto bytes = model.serialize();
  auto code = [](const std::string& b) {
    try {
      CrfModel::deserialize(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  CHECK(code(bytes.substr(0, bytes.size() / 2)) == ErrorCode::kCorruptFile);
  CHECK(code(bytes.substr(0, 5)) == ErrorCode::kCorruptFile);
  auto future = bytes;
  future[8] = 2;
  CHECK(code(future) == ErrorCode::kVersionMismatch);
  auto flipped = bytes;
  flipped[flipped.size() - 20] ^= 0x40;
  CHECK(code(flipped) == ErrorCode::kCorruptFile);
  std::filesystem::remove(path);
}
