#include "wsvm/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wsvm {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::size_t iteration_cap(const SmoConfig& cfg, std::size_t n) {
  return cfg.max_iter > 0 ? cfg.max_iter : std::max<std::size_t>(1'000'000, 1000 * n);
}

SolutionState finish(const DualProblem& prob, std::vector<double> alpha, double b,
                     std::span<const double> c) {
  SolutionState st;
  st.alpha = std::move(alpha);
  st.b = b;
  refresh_margins(prob, st);
  classify_sets(prob, st, c);
  return st;
}

// Bias from the gradient G = Qα − p, as the average over free variables or the
// midpoint of the admissible interval.
double bias_from_gradient(const DualProblem& prob, std::span<const double> alpha,
                          std::span<const double> g, std::span<const double> c) {
  double sum = 0.0;
  std::size_t nfree = 0;
  double ub = inf, lb = -inf;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    if (c[v] <= 0.0) continue;
    const double yg = prob.y(v) * g[v];
    if (alpha[v] >= c[v]) {
      if (prob.y(v) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[v] <= 0.0) {
      if (prob.y(v) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      sum += yg;
      ++nfree;
    }
  }
  double rho;
  if (nfree > 0) {
    rho = sum / static_cast<double>(nfree);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  } else {
    return prob.default_bias();
  }
  return -rho;
}

}  // namespace

void SmoConfig::validate() const {
  if (!(tau > 0.0)) throw ArgumentError("SMO tolerance must be positive");
}

std::vector<double> seed_alpha(const DualProblem& prob, std::span<const double> alpha,
                               std::span<const double> c) {
  const std::size_t n = prob.size();
  std::vector<double> a(n);
  std::vector<char> clipped(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    double x = alpha.empty() ? 0.0 : alpha[v];
    if (x < 0.0) { x = 0.0; clipped[v] = 1; }
    if (x > c[v]) { x = c[v]; clipped[v] = 1; }
    a[v] = x;
  }
  if (!prob.has_bias()) return a;
  double r = 0.0;
  for (std::size_t v = 0; v < n; ++v) r += prob.y(v) * a[v];
  if (r == 0.0) return a;
  // r > 0 needs y=+1 coordinates to shrink or y=−1 ones to grow; the slack of
  // v in that direction is its room to move.
  const double dir = r > 0.0 ? 1.0 : -1.0;
  auto slack = [&](std::size_t v) {
    return prob.y(v) * dir > 0.0 ? a[v] : c[v] - a[v];
  };
  for (int pass = 0; pass < 2 && std::abs(r) > 0.0; ++pass) {
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (pass == 1 || !clipped[v]) total += slack(v);
    if (total <= 0.0) continue;
    const double share = std::min(1.0, std::abs(r) / total);
    for (std::size_t v = 0; v < n; ++v) {
      if (pass == 0 && clipped[v]) continue;
      const double move = share * slack(v);
      a[v] -= prob.y(v) * dir * move;
      a[v] = std::clamp(a[v], 0.0, c[v]);
    }
    r = 0.0;
    for (std::size_t v = 0; v < n; ++v) r += prob.y(v) * a[v];
  }
  return a;
}

SolutionState smo_solve(const DualProblem& prob, std::span<const double> c,
                        const SolutionState* warm, const SmoConfig& cfg, SmoStats* stats) {
  if (!prob.has_bias()) return smo_solve_no_bias(prob, c, warm, cfg, stats);
  cfg.validate();
  const std::size_t n = prob.size();
  if (c.size() != n) throw ArgumentError("smo_solve: weight length differs from problem size");

  std::vector<double> alpha =
      seed_alpha(prob, warm ? std::span<const double>(warm->alpha) : std::span<const double>{}, c);
  std::vector<double> g = prob.q_times(alpha);
  for (std::size_t v = 0; v < n; ++v) g[v] -= prob.p(v);
  std::vector<double> qd(n);
  for (std::size_t v = 0; v < n; ++v) qd[v] = prob.q(v, v);

  std::vector<double> scratch(prob.items()), qi(n), qj(n);
  const std::size_t cap = iteration_cap(cfg, n);
  std::size_t it = 0;
  double gap = 0.0;
  for (;; ++it) {
    double gmax = -inf, gmin = inf;
    std::ptrdiff_t i = -1, j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (c[t] <= 0.0) continue;
      const double yt = prob.y(t);
      const double val = -yt * g[t];
      const bool up = yt > 0 ? alpha[t] < c[t] : alpha[t] > 0.0;
      const bool low = yt > 0 ? alpha[t] > 0.0 : alpha[t] < c[t];
      if (up && val > gmax) { gmax = val; i = static_cast<std::ptrdiff_t>(t); }
      if (low && val < gmin) { gmin = val; j = static_cast<std::ptrdiff_t>(t); }
    }
    gap = (i < 0 || j < 0) ? 0.0 : gmax - gmin;
    if (gap < cfg.tau) break;
    if (it >= cap) {
      const double b = bias_from_gradient(prob, alpha, g, c);
      throw ConvergenceError("SMO did not converge in " + std::to_string(cap) +
                                 " iterations (gap " + std::to_string(gap) + ")",
                             finish(prob, alpha, b, c));
    }
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    prob.q_row(ui, qi, scratch);
    prob.q_row(uj, qj, scratch);
    const double ci = c[ui], cj = c[uj];
    const double ai_old = alpha[ui], aj_old = alpha[uj];
    double& ai = alpha[ui];
    double& aj = alpha[uj];
    if (prob.y(ui) != prob.y(uj)) {
      double quad = qd[ui] + qd[uj] + 2.0 * qi[uj];
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (-g[ui] - g[uj]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > ci - cj) {
        if (ai > ci) { ai = ci; aj = ci - diff; }
      } else {
        if (aj > cj) { aj = cj; ai = cj + diff; }
      }
    } else {
      double quad = qd[ui] + qd[uj] - 2.0 * qi[uj];
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (g[ui] - g[uj]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) { ai = ci; aj = sum - ci; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > cj) {
        if (aj > cj) { aj = cj; ai = sum - cj; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    const double dai = ai - ai_old, daj = aj - aj_old;
    for (std::size_t t = 0; t < n; ++t) g[t] += qi[t] * dai + qj[t] * daj;
    if (cfg.record_objective && stats) {
      double obj = 0.0;
      for (std::size_t t = 0; t < n; ++t)
        obj += alpha[t] * (prob.p(t) - 0.5 * (g[t] + prob.p(t)));
      stats->objective.push_back(obj);
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->final_gap = gap;
  }
  const double b = bias_from_gradient(prob, alpha, g, c);
  return finish(prob, std::move(alpha), b, c);
}

SolutionState smo_solve_no_bias(const DualProblem& prob, std::span<const double> c,
                                const SolutionState* warm, const SmoConfig& cfg,
                                SmoStats* stats) {
  cfg.validate();
  const std::size_t n = prob.size();
  if (c.size() != n)
    throw ArgumentError("smo_solve_no_bias: weight length differs from problem size");
  std::vector<double> alpha(n, 0.0);
  if (warm) {
    for (std::size_t v = 0; v < n; ++v) alpha[v] = std::clamp(warm->alpha[v], 0.0, c[v]);
  }
  std::vector<double> g = prob.q_times(alpha);
  for (std::size_t v = 0; v < n; ++v) g[v] -= prob.p(v);
  std::vector<double> scratch(prob.items()), qv(n);
  const std::size_t cap = iteration_cap(cfg, n);
  std::size_t it = 0;
  double worst = 0.0;
  for (;; ++it) {
    worst = 0.0;
    std::ptrdiff_t pick = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (c[t] <= 0.0) continue;
      double viol = 0.0;
      if (alpha[t] < c[t] && g[t] < 0.0) viol = -g[t];
      if (alpha[t] > 0.0 && g[t] > 0.0) viol = g[t];
      if (viol > worst) { worst = viol; pick = static_cast<std::ptrdiff_t>(t); }
    }
    if (pick < 0 || worst < cfg.tau) break;
    if (it >= cap) {
      throw ConvergenceError("bias-free SMO did not converge in " + std::to_string(cap) +
                                 " iterations",
                             finish(prob, alpha, 0.0, c));
    }
    const auto v = static_cast<std::size_t>(pick);
    const double qvv = prob.q(v, v);
    const double old = alpha[v];
    alpha[v] = std::clamp(old - g[v] / std::max(qvv, 1e-12), 0.0, c[v]);
    const double da = alpha[v] - old;
    prob.q_row(v, qv, scratch);
    for (std::size_t t = 0; t < n; ++t) g[t] += qv[t] * da;
    if (cfg.record_objective && stats) {
      double obj = 0.0;
      for (std::size_t t = 0; t < n; ++t)
        obj += alpha[t] * (prob.p(t) - 0.5 * (g[t] + prob.p(t)));
      stats->objective.push_back(obj);
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->final_gap = worst;
  }
  return finish(prob, std::move(alpha), 0.0, c);
}

}  // namespace wsvm
