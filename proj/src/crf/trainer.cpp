#include "crf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "crf/owlqn.hpp"
#include "error.hpp"

namespace deid::crf {

std::pair<CrfModel, std::vector<CompiledSentence>> compile_training_set(
    const std::vector<LabelledSentence>& train, const CrfConfig& config) {
  CrfModel model;
  model.config = config;

  std::set<std::string> seen_labels;
  for (const auto& s : train)
    for (const auto& l : s.labels) seen_labels.insert(l.str());
  seen_labels.erase("O");
  model.labels.push_back("O");
  model.labels.insert(model.labels.end(), seen_labels.begin(), seen_labels.end());
  std::map<std::string, std::uint32_t> label_id;
  for (std::uint32_t i = 0; i < model.labels.size(); ++i) label_id[model.labels[i]] = i;
  const std::size_t L = model.labels.size();

  // Attribute ids follow first occurrence; (attribute, label) pairs seen in
  // training become state features.
  std::unordered_map<std::string, std::uint32_t> attr_id;
  std::vector<std::set<std::uint32_t>> attr_labels;
  std::vector<bool> seen_transition(L * L, false);
  std::vector<CompiledSentence> data(train.size());

  for (std::size_t s = 0; s < train.size(); ++s) {
    const auto& ls = train[s];
    if (ls.labels.size() != ls.sentence.tokens.size())
      throw Error(ErrorCode::kLengthMismatch, "labelled sentence with mismatched label count");
    auto feats = extract_sentence_features(ls.sentence, config.window);
    auto& cs = data[s];
    cs.obs.resize(feats.size());
    for (std::size_t t = 0; t < feats.size(); ++t) {
      auto y = label_id.at(ls.labels[t].str());
      cs.labels.push_back(y);
      if (t > 0) seen_transition[cs.labels[t - 1] * L + y] = true;
      for (const auto& a : feats[t]) {
        auto [it, fresh] = attr_id.try_emplace(a.name, static_cast<std::uint32_t>(model.attributes.size()));
        if (fresh) {
          model.attributes.push_back(a.name);
          attr_labels.emplace_back();
        }
        attr_labels[it->second].insert(y);
        cs.obs[t].push_back({it->second, a.value});
      }
    }
  }

  model.attr_offsets.push_back(0);
  for (const auto& ls : attr_labels) {
    model.state_labels.insert(model.state_labels.end(), ls.begin(), ls.end());
    model.attr_offsets.push_back(static_cast<std::uint32_t>(model.state_labels.size()));
  }
  std::size_t next = model.state_labels.size();
  model.transition_param.assign(L * L, CrfModel::kNoParam);
  for (std::size_t i = 0; i < L * L; ++i)
    if (config.all_transitions || seen_transition[i])
      model.transition_param[i] = static_cast<std::int32_t>(next++);
  model.weights.assign(next, 0.0);
  model.index();
  return {std::move(model), std::move(data)};
}

std::pair<CrfModel, TrainingStats> fit_crf(const std::vector<LabelledSentence>& train,
                                           const std::vector<LabelledSentence>& dev,
                                           const CrfConfig& config) {
  config.validate();
  auto started = std::chrono::steady_clock::now();
  bool any_tokens = std::any_of(train.begin(), train.end(),
                                [](const LabelledSentence& s) { return !s.sentence.tokens.empty(); });
  if (!any_tokens) throw Error(ErrorCode::kEmptyTrainingSet, "no training tokens");

  auto [model, data] = compile_training_set(train, config);
  Objective objective(model, data, config.c2, config.threads);

  OwlqnOptions opt;
  opt.max_iterations = config.max_iterations;
  opt.c1 = config.c1;
  opt.tolerance = config.convergence_tol;
  opt.memory = config.lbfgs_memory;
  auto result = minimize_owlqn(
      [&](const std::vector<double>& w, std::vector<double>& g) { return objective.evaluate(w, g); },
      model.weights, opt);
  if (result.increases > 5)
    throw Error(ErrorCode::kDivergenceDetected,
                "objective increased on " + std::to_string(result.increases) + " accepted steps");
  model.weights = std::move(result.x);

  TrainingStats stats;
  stats.iterations = result.iterations;
  stats.evaluations = result.evaluations;
  stats.objective = std::move(result.objective);
  stats.gradient_norm = result.pseudo_gradient_norm;
  stats.stop_reason = result.stop_reason;
  stats.num_parameters = model.weights.size();

  std::size_t correct = 0;
  for (const auto& s : dev) {
    auto pred = model.tag(s.sentence);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == s.labels[i];
    stats.dev_tokens += pred.size();
  }
  if (stats.dev_tokens) stats.dev_accuracy = static_cast<double>(correct) / stats.dev_tokens;

  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {std::move(model), std::move(stats)};
}

}  // namespace deid::crf
