#include "crf/owlqn.hpp"

#include <cmath>
#include <deque>

namespace deid::crf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

void pseudo_gradient(const std::vector<double>& x, const std::vector<double>& g, double c1,
                     std::vector<double>& pg) {
  pg.resize(x.size());
  if (c1 == 0.0) {
    pg = g;
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0) pg[i] = g[i] + c1;
    else if (x[i] < 0) pg[i] = g[i] - c1;
    else if (g[i] + c1 < 0) pg[i] = g[i] + c1;
    else if (g[i] - c1 > 0) pg[i] = g[i] - c1;
    else pg[i] = 0.0;
  }
}

struct Correction {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

OwlqnResult minimize_owlqn(const SmoothObjective& f, std::vector<double> x0,
                           const OwlqnOptions& opt) {
  OwlqnResult res;
  const std::size_t n = x0.size();
  std::vector<double> x = std::move(x0), g(n), pg(n), d(n), xn(n), gn(n), orthant(n);
  const bool l1_active = opt.c1 > 0.0;

  double fx = f(x, g) + opt.c1 * l1(x);
  ++res.evaluations;
  res.objective.push_back(fx);
  std::deque<Correction> history;

  for (;;) {
    pseudo_gradient(x, g, opt.c1, pg);
    double pg_norm = std::sqrt(dot(pg, pg));
    res.pseudo_gradient_norm = pg_norm;
    double x_norm = std::sqrt(dot(x, x));
    if (pg_norm / std::max(1.0, x_norm) < opt.tolerance) {
      res.stop_reason = "converged";
      break;
    }
    if (res.iterations >= opt.max_iterations) {
      res.stop_reason = "max_iterations";
      break;
    }

    // Two-loop recursion on the pseudo-gradient.
    std::vector<double> q = pg;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * dot(history[k].s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * history[k].y[i];
    }
    if (!history.empty()) {
      const auto& h = history.back();
      double gamma = dot(h.s, h.y) / dot(h.y, h.y);
      for (auto& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      double beta = history[k].rho * dot(history[k].y, q);
      for (std::size_t i = 0; i < n; ++i) q[i] += history[k].s[i] * (alpha[k] - beta);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -q[i];
    if (l1_active)
      for (std::size_t i = 0; i < n; ++i)
        if (d[i] * pg[i] >= 0) d[i] = 0.0;

    double slope = dot(d, pg);
    if (slope >= 0) {
      // Curvature information turned unusable; restart from steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
      slope = dot(d, pg);
    }
    for (std::size_t i = 0; i < n; ++i) orthant[i] = x[i] != 0 ? (x[i] > 0 ? 1.0 : -1.0) : (pg[i] < 0 ? 1.0 : -1.0);

    double step = history.empty() ? 1.0 / std::sqrt(dot(d, d)) : 1.0;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < n; ++i) {
        xn[i] = x[i] + step * d[i];
        if (l1_active && xn[i] * orthant[i] <= 0) xn[i] = 0.0;
      }
      fn = f(xn, gn) + opt.c1 * l1(xn);
      ++res.evaluations;
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += pg[i] * (xn[i] - x[i]);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line_search_failed";
      break;
    }

    Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = xn[i] - x[i];
      c.y[i] = gn[i] - g[i];
    }
    double sy = dot(c.s, c.y);
    if (sy > 1e-12) {
      c.rho = 1.0 / sy;
      history.push_back(std::move(c));
      if (history.size() > static_cast<std::size_t>(opt.memory)) history.pop_front();
    }
    if (fn > fx) ++res.increases;
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    ++res.iterations;
    res.objective.push_back(fx);
  }
  res.x = std::move(x);
  return res;
}

}  // namespace deid::crf
