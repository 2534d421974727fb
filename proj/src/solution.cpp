#include "wsvm/solution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wsvm {

char to_char(SetKind s) {
  switch (s) {
    case SetKind::O: return 'O';
    case SetKind::M: return 'M';
    case SetKind::I: return 'I';
  }
  return '?';
}

std::size_t SolutionState::count(SetKind s) const {
  return static_cast<std::size_t>(std::count(sets.begin(), sets.end(), s));
}

void refresh_margins(const DualProblem& prob, SolutionState& st) {
  st.margin = prob.q_times(st.alpha);
  if (prob.has_bias()) {
    for (std::size_t v = 0; v < prob.size(); ++v) st.margin[v] += prob.y(v) * st.b;
  }
}

void classify_sets(const DualProblem& prob, SolutionState& st, std::span<const double> c,
                   double eps) {
  const std::size_t n = prob.size();
  st.sets.assign(n, SetKind::O);
  for (std::size_t v = 0; v < n; ++v) {
    const double e = eps < 0.0 ? default_set_tol(c[v]) : eps;
    if (c[v] <= 0.0 || st.alpha[v] <= e) {
      st.sets[v] = SetKind::O;
    } else if (st.alpha[v] >= c[v] - e) {
      st.sets[v] = SetKind::I;
    } else {
      st.sets[v] = SetKind::M;
    }
  }
}

double dual_objective(const DualProblem& prob, const SolutionState& st) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    const double a = st.alpha[v];
    if (a == 0.0) continue;
    lin += prob.p(v) * a;
    const double qa = st.margin[v] - (prob.has_bias() ? prob.y(v) * st.b : 0.0);
    quad += a * qa;
  }
  return lin - 0.5 * quad;
}

double dual_objective(const DualProblem& prob, std::span<const double> alpha) {
  const std::vector<double> qa = prob.q_times(alpha);
  double lin = 0.0, quad = 0.0;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    lin += prob.p(v) * alpha[v];
    quad += alpha[v] * qa[v];
  }
  return lin - 0.5 * quad;
}

double KktReport::max() const { return std::max({equality, box, lower, upper, free}); }

std::string KktReport::summary() const {
  std::ostringstream os;
  os << "equality=" << equality << " box=" << box << " lower=" << lower
     << " upper=" << upper << " free=" << free;
  return os.str();
}

KktReport kkt_report(const DualProblem& prob, std::span<const double> alpha, double b,
                     std::span<const double> c, double bound_tol) {
  KktReport r;
  std::vector<double> h = prob.q_times(alpha);
  double eq = 0.0;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    const double a = alpha[v];
    if (prob.has_bias()) {
      h[v] += prob.y(v) * b;
      eq += prob.y(v) * a;
    }
    r.box = std::max({r.box, -a, a - c[v]});
    const double gap = h[v] - prob.p(v);
    const bool at_lo = a <= bound_tol;
    const bool at_hi = a >= c[v] - bound_tol;
    if (at_lo && at_hi) continue;  // c_v = 0: any margin is admissible
    if (at_lo) {
      r.lower = std::max(r.lower, -gap);
    } else if (at_hi) {
      r.upper = std::max(r.upper, gap);
    } else {
      r.free = std::max(r.free, std::abs(gap));
    }
  }
  r.equality = std::abs(eq);
  return r;
}

KktReport kkt_report(const DualProblem& prob, const SolutionState& st,
                     std::span<const double> c, double bound_tol) {
  return kkt_report(prob, st.alpha, st.b, c, bound_tol);
}

double decision_value(const DualProblem& prob, std::span<const double> alpha, double b,
                      std::span<const double> x) {
  std::vector<double> kx(prob.items());
  prob.kernel().cross_row(x, kx);
  const auto& t = prob.terms();
  double f = prob.has_bias() ? b : 0.0;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    if (alpha[v] != 0.0) f += alpha[v] * t.gather(v, kx);
  }
  return f;
}

std::vector<double> decision_values(const DualProblem& prob, std::span<const double> alpha,
                                    double b, const Dataset& points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = decision_value(prob, alpha, b, points.row(i));
  return out;
}

}  // namespace wsvm
