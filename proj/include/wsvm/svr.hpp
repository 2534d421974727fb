#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "wsvm/path.hpp"

namespace wsvm {

/// E: |y − f| = ε with 0 < |α| < c. O: |α| = c. I: α = 0.
enum class SvrSet : std::uint8_t { E, O, I };

char to_char(SvrSet s);

/// Instance-level view of a regression solution (α_i = α⁺_i − α⁻_i).
struct SvrState {
  std::vector<double> alpha;
  double b = 0.0;
  double epsilon = 0.0;
  std::vector<SvrSet> sets;
  std::vector<int> sign;          ///< s_i = sign(y_i − f(x_i)) on E and O
  std::vector<double> residual;   ///< y_i − f(x_i)

  double alpha_sum() const;
};

/// Reads an instance-level state off a solution of DualProblem::regression.
/// `c` is instance level.
SvrState to_svr_state(const DualProblem& prob, const SolutionState& st,
                      std::span<const double> targets, std::span<const double> c);

struct SvrAffine {
  double b = 0.0;
  std::vector<double> alpha_e;  ///< aligned with the E indices in index order
};

/// Solves the bordered system [[0, 1ᵀ], [1, K_E + ridge·I]] for (b, α_E)
/// given the set partition and signs of `st`; α_O = s_O c_O and α_I = 0.
SvrAffine svr_affine_solution(const KernelMatrix& k, std::span<const double> targets,
                              double epsilon, double ridge, const SvrState& st,
                              std::span<const double> c);

/// SMO on the doubled dual; KKT within cfg.tau. All-zero weights give
/// α = 0 and b = median(y).
SvrState svr_baseline_solve(const DualProblem& prob, std::span<const double> targets,
                            std::span<const double> c, const SolutionState* warm = nullptr,
                            const SmoConfig& cfg = {}, SolutionState* raw = nullptr);

/// Weighted SVR path with instance-level weights. `start` is a solution of
/// the doubled problem at c_old (for example from svr_baseline_solve's raw
/// output or a previous terminal state).
PathTrace svr_follow_path(const DualProblem& prob, const SolutionState& start,
                          std::span<const double> c_old, std::span<const double> c_new,
                          const PathOptions& opt = {});

/// KKT report in instance terms: Σα, |α| ≤ c, and the ε-tube conditions.
KktReport svr_kkt_report(const DualProblem& prob, const SolutionState& st,
                         std::span<const double> c_instance, double bound_tol = 1e-9);

/// Trace CSV with an extra sign column; `index` is the instance index.
void write_svr_trace_csv(std::ostream& out, const PathTrace& trace, std::size_t instances);

}  // namespace wsvm
