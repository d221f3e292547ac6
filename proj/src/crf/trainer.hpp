#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bio.hpp"
#include "crf/model.hpp"
#include "crf/objective.hpp"

namespace deid::crf {

struct TrainingStats {
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> objective;  // penalized, per accepted iteration
  double gradient_norm = 0.0;     // pseudo-gradient norm at stop
  double wall_seconds = 0.0;
  std::string stop_reason;
  std::size_t num_parameters = 0;
  std::size_t dev_tokens = 0;
  double dev_accuracy = 0.0;  // token accuracy on the dev set, when given
};

// Model skeleton (alphabets, state features, transition slots, zero weights)
// and the training set compiled against it.
std::pair<CrfModel, std::vector<CompiledSentence>> compile_training_set(
    const std::vector<LabelledSentence>& train, const CrfConfig& config);

// Penalized maximum-likelihood training with OWL-QN. Throws
// kEmptyTrainingSet and kDivergenceDetected.
std::pair<CrfModel, TrainingStats> fit_crf(const std::vector<LabelledSentence>& train,
                                           const std::vector<LabelledSentence>& dev,
                                           const CrfConfig& config);

}  // namespace deid::crf
