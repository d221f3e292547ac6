#include "crf/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "error.hpp"

namespace deid::crf {

namespace {

// Sentences are cut into this many contiguous blocks whatever the thread
// count, and block results are summed in block order, so objective and
// gradient are bit-identical across machines.
constexpr std::size_t kBlocks = 8;

double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// Scaled recursion; false when a scaling constant underflows.
bool scaled_pass(const Matrix& state, const Matrix& transition, ForwardBackward& fb) {
  const std::size_t T = state.rows, L = state.cols;
  double tmax = -std::numeric_limits<double>::infinity();
  for (double v : transition.data) tmax = std::max(tmax, v);
  if (!std::isfinite(tmax)) tmax = 0.0;
  fb.exp_trans = Matrix(L, L);
  for (std::size_t i = 0; i < L * L; ++i) fb.exp_trans.data[i] = std::exp(transition.data[i] - tmax);

  double shift = static_cast<double>(T - 1) * tmax;
  fb.exp_state = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    double m = state(t, 0);
    for (std::size_t y = 1; y < L; ++y) m = std::max(m, state(t, y));
    shift += m;
    for (std::size_t y = 0; y < L; ++y) fb.exp_state(t, y) = std::exp(state(t, y) - m);
  }

  auto bad = [](double c) { return !(c > 0.0) || !std::isfinite(c); };
  fb.alpha = Matrix(T, L);
  fb.scale.assign(T, 0.0);
  for (std::size_t y = 0; y < L; ++y) fb.alpha(0, y) = fb.exp_state(0, y);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (std::size_t y = 0; y < L; ++y) fb.alpha(t, y) = 0.0;
      for (std::size_t p = 0; p < L; ++p) {
        double a = fb.alpha(t - 1, p);
        if (a == 0.0) continue;
        const double* row = &fb.exp_trans.data[p * L];
        for (std::size_t y = 0; y < L; ++y) fb.alpha(t, y) += a * row[y];
      }
      for (std::size_t y = 0; y < L; ++y) fb.alpha(t, y) *= fb.exp_state(t, y);
    }
    double c = 0.0;
    for (std::size_t y = 0; y < L; ++y) c += fb.alpha(t, y);
    if (bad(c)) return false;
    fb.scale[t] = c;
    for (std::size_t y = 0; y < L; ++y) fb.alpha(t, y) /= c;
  }

  fb.beta = Matrix(T, L);
  for (std::size_t y = 0; y < L; ++y) fb.beta(T - 1, y) = 1.0;
  std::vector<double> tmp(L);
  for (std::size_t t = T - 1; t > 0; --t) {
    for (std::size_t y = 0; y < L; ++y) tmp[y] = fb.exp_state(t, y) * fb.beta(t, y);
    for (std::size_t p = 0; p < L; ++p) {
      const double* row = &fb.exp_trans.data[p * L];
      double s = 0.0;
      for (std::size_t y = 0; y < L; ++y) s += row[y] * tmp[y];
      fb.beta(t - 1, p) = s / fb.scale[t];
    }
  }

  double sum_log_scale = 0.0;
  for (double c : fb.scale) sum_log_scale += std::log(c);
  fb.log_z_forward = sum_log_scale + shift;

  double z0 = 0.0;
  for (std::size_t y = 0; y < L; ++y) z0 += fb.exp_state(0, y) * fb.beta(0, y);
  if (bad(z0)) return false;
  fb.log_z_backward = std::log(z0) + (sum_log_scale - std::log(fb.scale[0])) + shift;

  for (std::size_t t = 0; t < T; ++t) {
    double row = 0.0;
    for (std::size_t y = 0; y < L; ++y) row += fb.marginals(t, y) = fb.alpha(t, y) * fb.beta(t, y);
    if (bad(row)) return false;
  }
  return true;
}

void log_pass(const Matrix& state, const Matrix& transition, ForwardBackward& fb) {
  const std::size_t T = state.rows, L = state.cols;
  fb.log_domain = true;
  fb.exp_state = state;
  fb.exp_trans = transition;
  fb.scale.clear();
  fb.alpha = Matrix(T, L);
  fb.beta = Matrix(T, L);
  std::vector<double> tmp(L);
  for (std::size_t y = 0; y < L; ++y) fb.alpha(0, y) = state(0, y);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) tmp[p] = fb.alpha(t - 1, p) + transition(p, y);
      fb.alpha(t, y) = log_sum_exp(tmp.data(), L) + state(t, y);
    }
  for (std::size_t t = T - 1; t > 0; --t)
    for (std::size_t p = 0; p < L; ++p) {
      for (std::size_t y = 0; y < L; ++y) tmp[y] = transition(p, y) + state(t, y) + fb.beta(t, y);
      fb.beta(t - 1, p) = log_sum_exp(tmp.data(), L);
    }
  fb.log_z_forward = log_sum_exp(&fb.alpha.data[(T - 1) * L], L);
  for (std::size_t y = 0; y < L; ++y) tmp[y] = state(0, y) + fb.beta(0, y);
  fb.log_z_backward = log_sum_exp(tmp.data(), L);
  if (!std::isfinite(fb.log_z_forward) || !std::isfinite(fb.log_z_backward))
    throw Error(ErrorCode::kNumericalOverflow, "partition function is not finite");
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < L; ++y)
      fb.marginals(t, y) = std::exp(fb.alpha(t, y) + fb.beta(t, y) - fb.log_z_forward);
}

}  // namespace

double ForwardBackward::pair_marginal(std::size_t t, std::size_t p, std::size_t y) const {
  if (log_domain)
    return std::exp(alpha(t - 1, p) + exp_trans(p, y) + exp_state(t, y) + beta(t, y) - log_z_forward);
  return alpha(t - 1, p) * exp_trans(p, y) * exp_state(t, y) * beta(t, y) / scale[t];
}

ForwardBackward forward_backward(const Matrix& state, const Matrix& transition) {
  const std::size_t T = state.rows, L = state.cols;
  ForwardBackward fb;
  fb.marginals = Matrix(T, L);
  if (T == 0 || L == 0) return fb;
  for (double v : state.data)
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumericalOverflow, "non-finite state score");
  for (double v : transition.data)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw Error(ErrorCode::kNumericalOverflow, "non-finite transition score");
  if (!scaled_pass(state, transition, fb)) {
    fb.marginals = Matrix(T, L);
    log_pass(state, transition, fb);
  }
  return fb;
}

Objective::Objective(const CrfModel& structure, const std::vector<CompiledSentence>& data,
                     double c2, int threads)
    : structure_(structure), data_(data), c2_(c2), threads_(threads) {}

double Objective::accumulate(const std::vector<double>& w, std::vector<double>* grad) const {
  const std::size_t P = w.size();
  const std::size_t L = structure_.num_labels();
  const Matrix trans = structure_.transition_scores(&w);

  const std::size_t blocks = std::min(kBlocks, std::max<std::size_t>(1, data_.size()));
  std::vector<double> block_nll(blocks, 0.0);
  std::vector<std::vector<double>> block_grad(grad ? blocks : 0);

  auto run_block = [&](std::size_t b) {
    const std::size_t lo = data_.size() * b / blocks, hi = data_.size() * (b + 1) / blocks;
    std::vector<double>* g = nullptr;
    if (grad) {
      block_grad[b].assign(P, 0.0);
      g = &block_grad[b];
    }
    double nll = 0.0;
    for (std::size_t s = lo; s < hi; ++s) {
      const auto& sent = data_[s];
      const std::size_t T = sent.labels.size();
      if (T == 0) continue;
      Matrix state = structure_.state_scores(sent.obs, &w);
      ForwardBackward fb = forward_backward(state, trans);

      double gold = state(0, sent.labels[0]);
      for (std::size_t t = 1; t < T; ++t)
        gold += state(t, sent.labels[t]) + trans(sent.labels[t - 1], sent.labels[t]);
      nll += fb.log_z_forward - gold;
      if (!g) continue;

      for (std::size_t t = 0; t < T; ++t) {
        for (const auto& o : sent.obs[t]) {
          for (auto k = structure_.attr_offsets[o.attr]; k < structure_.attr_offsets[o.attr + 1]; ++k) {
            auto y = structure_.state_labels[k];
            double expected = fb.marginals(t, y);
            double empirical = y == sent.labels[t] ? 1.0 : 0.0;
            (*g)[k] += o.value * (expected - empirical);
          }
        }
      }
      for (std::size_t t = 1; t < T; ++t) {
        for (std::size_t p = 0; p < L; ++p) {
          for (std::size_t y = 0; y < L; ++y) {
            auto param = structure_.transition_param[p * L + y];
            if (param == CrfModel::kNoParam) continue;
            (*g)[static_cast<std::size_t>(param)] += fb.pair_marginal(t, p, y);
          }
        }
        auto param = structure_.transition_param[sent.labels[t - 1] * L + sent.labels[t]];
        if (param != CrfModel::kNoParam) (*g)[static_cast<std::size_t>(param)] -= 1.0;
      }
    }
    block_nll[b] = nll;
  };

  std::size_t workers = threads_ > 0 ? static_cast<std::size_t>(threads_)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t k = 0; k < workers; ++k)
      pool.emplace_back([&, k] {
        try {
          for (std::size_t b = k; b < blocks; b += workers) run_block(b);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  double nll = 0.0;
  for (double v : block_nll) nll += v;
  if (grad) {
    grad->assign(P, 0.0);
    for (const auto& bg : block_grad)
      for (std::size_t i = 0; i < P; ++i) (*grad)[i] += bg[i];
  }
  return nll;
}

double Objective::evaluate(const std::vector<double>& w, std::vector<double>& grad) const {
  double f = accumulate(w, &grad);
  if (c2_ > 0.0) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      norm2 += w[i] * w[i];
      grad[i] += 2.0 * c2_ * w[i];
    }
    f += c2_ * norm2;
  }
  return f;
}

double Objective::negative_log_likelihood(const std::vector<double>& w) const {
  return accumulate(w, nullptr);
}

}  // namespace deid::crf
