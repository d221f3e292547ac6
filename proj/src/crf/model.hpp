#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "crf/features.hpp"
#include "labels.hpp"
#include "tokenizer.hpp"

namespace deid::crf {

struct CrfConfig {
  int max_iterations = 100;
  double c1 = 0.1;  // L1 coefficient
  double c2 = 0.1;  // L2 coefficient
  bool all_transitions = true;
  Window window = default_window();
  double convergence_tol = 1e-5;
  int lbfgs_memory = 6;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  bool operator==(const CrfConfig&) const = default;
};

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Highest-scoring path given per-position state scores (T x L) and
// transition scores (L x L, from row to column). Ties go to the lowest
// label id at every step.
std::vector<std::size_t> viterbi_decode(const Matrix& state, const Matrix& transition);

// One position's attributes resolved to alphabet ids.
struct Observation {
  std::uint32_t attr;
  double value;
};

class CrfModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr std::int32_t kNoParam = -1;

  // Label alphabet; id 0 is "O" by convention of the trainer.
  std::vector<std::string> labels;
  // Attribute alphabet.
  std::vector<std::string> attributes;
  // State features in CSR form: attribute a owns entries
  // [attr_offsets[a], attr_offsets[a+1]) of state_labels / parameter ids.
  std::vector<std::uint32_t> attr_offsets;
  std::vector<std::uint32_t> state_labels;
  // Parameter id of transition (from, to), or kNoParam.
  std::vector<std::int32_t> transition_param;
  // All parameters: state features first, then transitions.
  std::vector<double> weights;
  CrfConfig config;

  std::size_t num_labels() const { return labels.size(); }
  std::size_t num_state_features() const { return state_labels.size(); }
  double transition(std::size_t from, std::size_t to) const {
    auto p = transition_param[from * labels.size() + to];
    return p == kNoParam ? 0.0 : weights[static_cast<std::size_t>(p)];
  }

  // Rebuilds the attribute-name lookup after alphabets change.
  void index();
  // Attribute id or -1 for names unseen in training.
  std::int64_t attribute_id(const std::string& name) const;

  // Unseen attributes are dropped.
  std::vector<std::vector<Observation>> observe(const Sentence& sentence) const;

  // State scores (T x L) under `w` (defaults to the model weights).
  Matrix state_scores(const std::vector<std::vector<Observation>>& obs,
                      const std::vector<double>* w = nullptr) const;
  Matrix transition_scores(const std::vector<double>* w = nullptr) const;

  LabelSequence tag(const Sentence& sentence) const;

  void save(const std::string& path) const;
  static CrfModel load(const std::string& path);
  std::string serialize() const;
  static CrfModel deserialize(const std::string& bytes);

 private:
  std::unordered_map<std::string, std::uint32_t> attr_lookup_;
};

}  // namespace deid::crf
