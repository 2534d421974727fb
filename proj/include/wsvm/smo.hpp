#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "wsvm/solution.hpp"

namespace wsvm {

struct SmoConfig {
  /// Stop when the maximal violating pair gap (or single-variable violation
  /// without a bias) drops below tau.
  double tau = 1e-3;
  /// 0 selects max(10⁶, 1000·n).
  std::size_t max_iter = 0;
  /// Record the dual objective after every iteration (tests only; O(n) each).
  bool record_objective = false;

  void validate() const;
};

struct SmoStats {
  std::size_t iterations = 0;
  double final_gap = 0.0;
  std::vector<double> objective;
};

/// Thrown when the iteration cap is hit; carries the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SolutionState best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SolutionState& best() const noexcept { return best_; }

 private:
  SolutionState best_;
};

/// Clips a warm-start α into the boxes and restores yᵀα = 0 by spreading the
/// imbalance over unclipped coordinates in proportion to their slack (falling
/// back to all coordinates when those cannot absorb it).
std::vector<double> seed_alpha(const DualProblem& prob, std::span<const double> alpha,
                               std::span<const double> c);

/// Weighted SMO with the maximal violating pair rule. Dispatches to the
/// bias-free variant when the problem has no bias. The result has sets
/// classified with default_set_tol and margins refreshed.
SolutionState smo_solve(const DualProblem& prob, std::span<const double> c,
                        const SolutionState* warm = nullptr, const SmoConfig& cfg = {},
                        SmoStats* stats = nullptr);

/// One coordinate per iteration, picking the maximal violator.
SolutionState smo_solve_no_bias(const DualProblem& prob, std::span<const double> c,
                                const SolutionState* warm = nullptr,
                                const SmoConfig& cfg = {}, SmoStats* stats = nullptr);

}  // namespace wsvm
