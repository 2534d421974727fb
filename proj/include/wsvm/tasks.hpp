#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wsvm/path.hpp"
#include "wsvm/svr.hpp"

namespace wsvm {

// ---------------------------------------------------------------------------
// Weight schedules

/// C_i = C0 · 2 / (1 + exp(a − 2a·i/n)) for i = 1..n (oldest first).
std::vector<double> time_series_weights(double c0, double a, std::size_t n);

/// Sliding window of a time-series classifier.
struct OnlineWindow {
  Dataset data;
  SolutionState state;  ///< exact for time_series_weights(c0, a, data.size())
  KernelSpec kernel;
  double c0 = 1.0, a = 0.0;
};

struct OnlineStep {
  PathTrace trace;        ///< over the stacked (old ∪ incoming) problem
  KktReport kkt;          ///< terminal KKT at the new schedule
  std::vector<double> dropped_alpha;
};

/// Builds the initial window with an exact solve at the schedule weights.
OnlineWindow make_online_window(const Dataset& data, const KernelSpec& kernel, double c0,
                                double a, const PathOptions& opt = {});

/// Appends `incoming` at weight 0, and in one path drives the oldest `drop`
/// instances to weight 0 while the rest move to the reindexed schedule.
/// The window keeps size() − drop + incoming.size() instances afterwards.
OnlineStep online_window_update(OnlineWindow& w, const Dataset& incoming, std::size_t drop,
                                const PathOptions& opt = {});

/// Path from uniform C0 to C0·r_i (instance level, any problem kind).
PathTrace covariate_shift_path(const DualProblem& prob, const SolutionState& start, double c0,
                               std::span<const double> ratios, const PathOptions& opt = {});

/// C_i = C0·σ̂/|e_i| with σ̂ the root mean square residual, capped at cap·C0.
/// All-zero residuals give uniform C0.
std::vector<double> hetero_weights(std::span<const double> residuals, double c0,
                                   double cap = 100.0);

struct HeteroIteration {
  std::size_t iteration = 0;
  double relative_change = 0.0;
  std::size_t events = 0;
  double kkt = 0.0;
};

struct HeteroResult {
  SvrState state;
  SolutionState raw;
  std::vector<double> weights;
  std::vector<HeteroIteration> log;
  bool converged = false;
};

struct HeteroConfig {
  double c0 = 1.0;
  double epsilon = 0.1;
  double cap = 100.0;
  double tol = 1e-3;
  std::size_t max_iter = 50;
  PathOptions path;
};

/// Alternates hetero_weights and the SVR path until the mean relative
/// residual change is at most cfg.tol. Residuals with |e| < 1e-12 are left
/// out of that mean.
HeteroResult heteroscedastic_fit(const DualProblem& prob, std::span<const double> targets,
                                 const HeteroConfig& cfg);

// ---------------------------------------------------------------------------
// Ranking

using PairSet = std::vector<std::pair<std::size_t, std::size_t>>;

/// (i, j) for every i, j in the same query with y_i > y_j.
PairSet build_pairs(const Dataset& ds);

enum class PairWeightMode { flat, relevance };
PairWeightMode parse_pair_weight_mode(const std::string& s);

/// flat: C0. relevance: (2^{y_i} − 2^{y_j})·C0.
std::vector<double> pair_weights(const Dataset& ds, const PairSet& pairs, PairWeightMode mode,
                                 double c0);

struct RankingRun {
  PairSet pairs;
  std::vector<double> c_flat, c_relevance;
  PathTrace trace;
  std::size_t max_margin = 0;
};

/// Bias-free pairwise path from flat to relevance weights.
RankingRun rsvm_path(const DualProblem& prob, const Dataset& ds, const PairSet& pairs, double c0,
                     const PathOptions& opt = {});

// ---------------------------------------------------------------------------
// Transductive SVM

struct TsvmConfig {
  double c = 1.0;       ///< labeled weight
  double c_star = 1.0;  ///< final unlabeled weight
  double init_scale = 1e-5;
  /// Switches tried per round before moving on.
  std::size_t max_switches = 0;  ///< 0 selects 10·k
  PathOptions path;
};

/// round(k · positives / labeled).
std::size_t tsvm_positive_quota(std::size_t k, std::size_t positives, std::size_t labeled);

/// Number of rounds the weight doubling needs: ⌈log₂(C*/min init)⌉ + 1.
std::size_t tsvm_round_bound(double c_star, double c_neg0, double c_pos0);

struct TsvmLogEntry {
  std::size_t round = 0;
  std::string what;  ///< "round", "switch" or "rejected"
  double c_neg = 0.0, c_pos = 0.0;
  double objective = 0.0;
  Index first = -1, second = -1;  ///< unlabeled indices of a switched pair
};

struct TsvmResult {
  std::vector<double> labels;  ///< ±1 per unlabeled point
  SolutionState state;         ///< over labeled then unlabeled variables
  std::shared_ptr<DualProblem> problem;
  std::vector<TsvmLogEntry> log;
  std::size_t positive_quota = 0;
  std::size_t rounds = 0;
  double c_neg0 = 0.0, c_pos0 = 0.0;
  std::size_t switches = 0, rejected = 0, path_failures = 0;
};

/// ½‖w‖² + Σ c_v ξ_v with ξ_v = max(0, 1 − y_v f(x_v)).
double weighted_primal_objective(const DualProblem& prob, const SolutionState& st,
                                 std::span<const double> c);

TsvmResult tsvm_train(const Dataset& labeled, const Dataset& unlabeled, const KernelSpec& kernel,
                      const TsvmConfig& cfg);

}  // namespace wsvm
