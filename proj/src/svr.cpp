#include "wsvm/svr.hpp"

#include <cmath>
#include <ostream>

namespace wsvm {

char to_char(SvrSet s) {
  switch (s) {
    case SvrSet::E: return 'E';
    case SvrSet::O: return 'O';
    case SvrSet::I: return 'I';
  }
  return '?';
}

double SvrState::alpha_sum() const {
  double s = 0.0;
  for (double a : alpha) s += a;
  return s;
}

namespace {

void require_regression(const DualProblem& prob) {
  if (prob.kind() != ProblemKind::regression)
    throw ArgumentError("SVR routines need a regression problem");
}

}  // namespace

SvrState to_svr_state(const DualProblem& prob, const SolutionState& st,
                      std::span<const double> targets, std::span<const double> c) {
  require_regression(prob);
  const std::size_t n = prob.instances();
  SvrState s;
  s.alpha = prob.combine(st.alpha);
  s.b = st.b;
  s.epsilon = prob.epsilon();
  s.sets.assign(n, SvrSet::I);
  s.sign.assign(n, 0);
  s.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // margin of α⁺ is f(x_i) plus its ridge term.
    const double f = st.margin[i] - prob.ridge() * st.alpha[i];
    s.residual[i] = targets[i] - f;
    const SetKind plus = st.sets[i], minus = st.sets[n + i];
    if (plus == SetKind::M) {
      s.sets[i] = SvrSet::E;
      s.sign[i] = 1;
    } else if (minus == SetKind::M) {
      s.sets[i] = SvrSet::E;
      s.sign[i] = -1;
    } else if (plus == SetKind::I && c[i] > 0.0) {
      s.sets[i] = SvrSet::O;
      s.sign[i] = 1;
    } else if (minus == SetKind::I && c[i] > 0.0) {
      s.sets[i] = SvrSet::O;
      s.sign[i] = -1;
    } else {
      s.sets[i] = SvrSet::I;
      s.sign[i] = s.residual[i] > 0 ? 1 : (s.residual[i] < 0 ? -1 : 0);
    }
  }
  return s;
}

SvrAffine svr_affine_solution(const KernelMatrix& k, std::span<const double> targets,
                              double epsilon, double ridge, const SvrState& st,
                              std::span<const double> c) {
  const std::size_t n = k.size();
  std::vector<std::size_t> e, o;
  for (std::size_t i = 0; i < n; ++i) {
    if (st.sets[i] == SvrSet::E) e.push_back(i);
    if (st.sets[i] == SvrSet::O) o.push_back(i);
  }
  if (e.empty()) throw ArgumentError("svr_affine_solution: E is empty");
  const std::size_t m = e.size();
  std::vector<double> inner(m * m), ones(m, 1.0), r(m);
  double r0 = 0.0;
  for (std::size_t j : o) r0 -= st.sign[j] * c[j];
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) inner[a * m + b] = k(e[a], e[b]);
    inner[a * m + a] += ridge;
    double v = targets[e[a]] - epsilon * st.sign[e[a]];
    for (std::size_t j : o) v -= k(e[a], j) * st.sign[j] * c[j];
    r[a] = v;
  }
  const auto f = BorderedFactor::factor(inner, ones, true);
  const auto sol = f.solve(r0, r);
  return {sol.x0, sol.x};
}

SvrState svr_baseline_solve(const DualProblem& prob, std::span<const double> targets,
                            std::span<const double> c, const SolutionState* warm,
                            const SmoConfig& cfg, SolutionState* raw) {
  require_regression(prob);
  const std::vector<double> cv = expand_weights(prob, c);
  SolutionState st = smo_solve(prob, cv, warm, cfg);
  SvrState s = to_svr_state(prob, st, targets, c);
  if (raw) *raw = std::move(st);
  return s;
}

PathTrace svr_follow_path(const DualProblem& prob, const SolutionState& start,
                          std::span<const double> c_old, std::span<const double> c_new,
                          const PathOptions& opt) {
  require_regression(prob);
  const std::vector<double> a = expand_weights(prob, c_old);
  const std::vector<double> b = expand_weights(prob, c_new);
  return follow_path(prob, start, a, b, opt);
}

KktReport svr_kkt_report(const DualProblem& prob, const SolutionState& st,
                         std::span<const double> c_instance, double bound_tol) {
  require_regression(prob);
  const std::vector<double> cv = expand_weights(prob, c_instance);
  return kkt_report(prob, st, cv, bound_tol);
}

void write_svr_trace_csv(std::ostream& out, const PathTrace& trace, std::size_t instances) {
  out << "event_ordinal,theta,kind,index,sign,m,o,i,b,objective\n";
  out.precision(17);
  for (const auto& e : trace.events) {
    Index idx = e.index;
    char sign = ' ';
    if (idx >= 0) {
      const auto u = static_cast<std::size_t>(idx);
      sign = u < instances ? '+' : '-';
      idx = static_cast<Index>(u % instances);
    }
    out << e.ordinal << ',' << e.theta << ',' << to_string(e.kind) << ',' << idx << ','
        << (idx >= 0 ? std::string(1, sign) : std::string()) << ',' << e.m << ',' << e.o
        << ',' << e.i << ',' << e.b << ',' << e.objective << '\n';
  }
}

}  // namespace wsvm
