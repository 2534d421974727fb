#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "wsvm/path.hpp"

namespace wsvm {

/// f(x_i) = a[i]·θ + b[i] on one region of a trace.
struct LineSet {
  double theta0 = 0.0, theta1 = 0.0;
  std::vector<double> a, b;
  double at(std::size_t i, double theta) const { return a[i] * theta + b[i]; }
};

/// Cross-kernel between validation inputs and the items of a problem.
class ValidationKernel {
 public:
  ValidationKernel(const DualProblem& prob, const Dataset& validation);
  std::size_t size() const noexcept { return nv_; }
  /// g_v(x_i) = Σ coef K(x_i, item) for variable v.
  double g(std::size_t i, std::size_t v) const;
  const DualProblem& problem() const noexcept { return *prob_; }

 private:
  const DualProblem* prob_;
  std::size_t nv_, ni_;
  std::vector<double> k_;  // nv x ni
};

/// Per-region validation lines, one LineSet per trace segment.
LineSet validation_coefficients(const PathTrace& trace, const Segment& seg,
                                const ValidationKernel& vk);

/// Piecewise-constant metric over θ. Pieces cover [0, 1] in order; the value
/// on each piece holds on [from, to) (right-continuous), the last also at 1.
struct SelectionPath {
  struct Piece {
    double from = 0.0, to = 0.0;
    double metric = 0.0;
    long cause = -1;  ///< validation index (or first item of a crossing pair) at `from`
    long cause2 = -1; ///< second item of a crossing pair
  };
  std::vector<Piece> pieces;

  double value_at(double theta) const;
  std::vector<double> change_points() const;
  /// Piece with the smallest metric (first on ties), or largest when `maximize`.
  const Piece& best(bool maximize = false) const;
};

/// 0-1 validation error path. `costs` (optional) weights each validation
/// point; the metric is the cost-weighted error fraction. A point with
/// f ≡ 0 counts as an error.
SelectionPath zero_one_error_path(const PathTrace& trace, const ValidationKernel& vk,
                                  std::span<const double> labels,
                                  std::span<const double> costs = {});

/// Same, from precomputed region lines (ordered, covering [0, 1]).
SelectionPath zero_one_error_path(std::span<const LineSet> lines, std::span<const double> labels,
                                  std::span<const double> costs = {});

/// Direct evaluation of the same metric from decision values.
double zero_one_error(std::span<const double> f, std::span<const double> labels,
                      std::span<const double> costs = {});

struct SquaredLossBest {
  double theta = 0.0;
  double loss = 0.0;  ///< Σ (y − f)²
};
SquaredLossBest squared_loss_best_theta(const PathTrace& trace, const ValidationKernel& vk,
                                        std::span<const double> targets);
SquaredLossBest squared_loss_best_theta(std::span<const LineSet> lines,
                                        std::span<const double> targets);

/// NDCG@k of one query: gain 2^y − 1 at rank 1 and (2^y − 1)/log₂(j) at rank
/// j > 1, normalized by the ideal ordering. Equal scores rank by index. An
/// all-zero ideal gain gives 1.
double ndcg_at_k(std::span<const double> scores, std::span<const double> relevance,
                 std::size_t k);
/// Mean NDCG@k over queries.
double mean_ndcg(std::span<const double> scores, std::span<const double> relevance,
                 std::span<const int> queries, std::size_t k);

enum class NdcgSweep { all_pairs, top_k };

/// NDCG@k path over θ for a bias-free ranking trace. all_pairs checks every
/// crossing between differently graded items of a query; top_k follows the
/// sorted order and only tracks swaps that touch the first k + 1 ranks.
SelectionPath ndcg_path(const PathTrace& trace, const ValidationKernel& vk,
                        std::span<const double> relevance, std::span<const int> queries,
                        std::size_t k, NdcgSweep sweep = NdcgSweep::top_k);
SelectionPath ndcg_path(std::span<const LineSet> lines, std::span<const double> relevance,
                        std::span<const int> queries, std::size_t k,
                        NdcgSweep sweep = NdcgSweep::top_k);

/// Region lines of every nonempty segment of a trace.
std::vector<LineSet> trace_lines(const PathTrace& trace, const ValidationKernel& vk);

/// CSV: theta_from,theta_to,metric,cause.
void write_selection_csv(std::ostream& out, const SelectionPath& path);

}  // namespace wsvm
