#pragma once

#include <memory>
#include <vector>

#include "wsvm/path.hpp"

namespace wsvm {

/// Cost-sensitive toy setup: D1 weights move c1_from → c1_to while D2 stays
/// at c2. Inputs are normalized into [0, 1]².
struct ToyExperiment {
  Dataset train;
  NormalizationSpec norm;
  std::vector<int> cost_group;
  std::shared_ptr<const KernelMatrix> kernel;
  std::shared_ptr<DualProblem> problem;
  std::vector<double> c_old, c_new;
  double c1_from = 0.0, c1_to = 10.0;

  double c1_at(double theta) const { return c1_from + theta * (c1_to - c1_from); }
};

ToyExperiment make_toy_experiment(std::size_t n, std::uint64_t seed, const KernelSpec& kernel,
                                  double c1_from = 0.0, double c1_to = 10.0, double c2 = 10.0);

/// Validation draw from the same generator, normalized with the training
/// map; costs are the misclassification costs (1 or 2).
struct ToyValidation {
  Dataset data;
  std::vector<double> costs;
};
ToyValidation make_toy_validation(const ToyExperiment& toy, std::size_t n, std::uint64_t seed);

struct BenchOptions {
  std::size_t reps = 3;
  /// 0: SMO at every breakpoint θ; otherwise at `grid` uniform θ in (0, 1].
  std::size_t grid = 0;
  bool clear_cache = false;
  bool run_smo = true;
  SmoConfig smo;
  PathOptions path;
};

struct BenchReport {
  double path_seconds = 0.0;   ///< median over reps
  double smo_seconds = 0.0;    ///< median over reps
  std::size_t events = 0;
  double mean_margin = 0.0;
  std::size_t smo_solves = 0;
  std::size_t smo_failures = 0;
  std::vector<double> path_runs, smo_runs;
  double speedup() const { return path_seconds > 0.0 ? smo_seconds / path_seconds : 0.0; }
};

/// Times follow_path from an exact start against a chain of warm-started SMO
/// solves at the breakpoints (or grid points) of the same segment.
BenchReport bench_path_vs_smo(const DualProblem& prob, const SolutionState& start,
                              std::span<const double> c_old, std::span<const double> c_new,
                              const BenchOptions& opt = {});

double median(std::vector<double> v);

}  // namespace wsvm
