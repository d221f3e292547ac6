#pragma once

#include <functional>
#include <string>
#include <vector>

namespace deid::crf {

struct OwlqnOptions {
  int max_iterations = 100;
  double c1 = 0.0;          // L1 coefficient; 0 gives plain L-BFGS
  double tolerance = 1e-5;  // on ||pseudo-gradient|| / max(1, ||x||)
  int memory = 6;
  int max_linesearch = 40;
};

struct OwlqnResult {
  std::vector<double> x;
  int iterations = 0;
  int evaluations = 0;
  // Penalized objective at the start and after every accepted step.
  std::vector<double> objective;
  double pseudo_gradient_norm = 0.0;
  std::string stop_reason;
  int increases = 0;  // accepted steps that raised the objective
};

// Smooth part: returns f(x) and writes its gradient into g.
using SmoothObjective = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;

// Orthant-wise limited-memory quasi-Newton minimization of f(x) + c1 * |x|_1.
OwlqnResult minimize_owlqn(const SmoothObjective& f, std::vector<double> x0,
                           const OwlqnOptions& options);

}  // namespace deid::crf
