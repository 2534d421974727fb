#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsvm/problem.hpp"

namespace wsvm {

/// O: α = 0, margin ≥ target. M: strictly inside the box, margin = target.
/// I: α = c, margin ≤ target.
enum class SetKind : std::uint8_t { O = 0, M = 1, I = 2 };

char to_char(SetKind s);

/// A dual point of a DualProblem. `margin[v]` caches h_v = (Qα)_v + y_v b,
/// which is y_i f(x_i) for classification.
struct SolutionState {
  std::vector<double> alpha;
  double b = 0.0;
  std::vector<SetKind> sets;
  std::vector<double> margin;

  std::size_t count(SetKind s) const;
};

/// ε used when reading sets off an approximate α.
inline double default_set_tol(double c) { return 1e-8 * std::max(1.0, c); }

/// Recomputes `margin` from α and b.
void refresh_margins(const DualProblem& prob, SolutionState& st);

/// α ≤ ε_v → O, α ≥ c_v − ε_v → I, otherwise M; c_v = 0 → O. A negative
/// `eps` selects default_set_tol per variable.
void classify_sets(const DualProblem& prob, SolutionState& st, std::span<const double> c,
                   double eps = -1.0);

/// pᵀα − ½αᵀQα (the maximized form), from cached margins.
double dual_objective(const DualProblem& prob, const SolutionState& st);
/// Same value computed from scratch.
double dual_objective(const DualProblem& prob, std::span<const double> alpha);

struct KktReport {
  double equality = 0.0;  ///< |Σ y α|
  double box = 0.0;       ///< max over v of max(−α_v, α_v − c_v)
  double lower = 0.0;     ///< α_v at 0 with margin below target
  double upper = 0.0;     ///< α_v at c_v with margin above target
  double free = 0.0;      ///< interior α_v with margin off target
  double max() const;
  bool passes(double tol) const { return max() <= tol; }
  std::string summary() const;
};

/// Set-free KKT check from scratch: α_v within `bound_tol` of 0 or c_v counts
/// as at that bound. Margins are recomputed from α and b.
KktReport kkt_report(const DualProblem& prob, std::span<const double> alpha, double b,
                     std::span<const double> c, double bound_tol = 1e-9);
KktReport kkt_report(const DualProblem& prob, const SolutionState& st,
                     std::span<const double> c, double bound_tol = 1e-9);

/// Decision value at an arbitrary input: Σ α_v Σ coef K(x, item) + b.
double decision_value(const DualProblem& prob, std::span<const double> alpha, double b,
                      std::span<const double> x);
/// Decision values at many inputs (row-major).
std::vector<double> decision_values(const DualProblem& prob, std::span<const double> alpha,
                                    double b, const Dataset& points);

}  // namespace wsvm
