#pragma once

#include <cstdint>
#include <vector>

#include "crf/model.hpp"

namespace deid::crf {

// Forward-backward over one sequence. Potentials are shifted by their maxima
// before exponentiation and rescaled at every position; when the scaled
// recursion underflows anyway (score ranges beyond ~700 nats), it is redone
// in the log domain.
struct ForwardBackward {
  double log_z_forward = 0.0;
  double log_z_backward = 0.0;
  Matrix marginals;  // T x L, rows sum to 1
  bool log_domain = false;

  // Scaled quantities, or log alpha / log beta and raw scores when
  // log_domain is set.
  Matrix alpha, beta, exp_state, exp_trans;
  std::vector<double> scale;

  // P(y_{t-1} = p, y_t = y), t >= 1.
  double pair_marginal(std::size_t t, std::size_t p, std::size_t y) const;
};

// Throws kNumericalOverflow on non-finite scores.
ForwardBackward forward_backward(const Matrix& state, const Matrix& transition);

struct CompiledSentence {
  std::vector<std::vector<Observation>> obs;
  std::vector<std::uint32_t> labels;
};

// Negative conditional log-likelihood plus c2 * ||w||^2. The L1 term is left
// to the optimizer.
class Objective {
 public:
  Objective(const CrfModel& structure, const std::vector<CompiledSentence>& data, double c2,
            int threads = 0);

  // Returns the objective and writes its gradient (resized to match `w`).
  double evaluate(const std::vector<double>& w, std::vector<double>& grad) const;

  // Unpenalized negative log-likelihood.
  double negative_log_likelihood(const std::vector<double>& w) const;

  std::size_t dimension() const { return structure_.weights.size(); }

 private:
  double accumulate(const std::vector<double>& w, std::vector<double>* grad) const;

  const CrfModel& structure_;
  const std::vector<CompiledSentence>& data_;
  double c2_;
  int threads_;
};

}  // namespace deid::crf
