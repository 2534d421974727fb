#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsvm/linalg.hpp"
#include "wsvm/smo.hpp"
#include "wsvm/solution.hpp"

namespace wsvm {

enum class EventKind { m_to_o, m_to_i, o_to_m, i_to_m, empty_margin, completion };

std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& s);

struct PathEvent {
  std::size_t ordinal = 0;
  double theta = 0.0;
  EventKind kind = EventKind::completion;
  Index index = -1;  ///< variable that moved, -1 for completion
  std::size_t m = 0, o = 0, i = 0;
  double b = 0.0;
  double objective = 0.0;
};

/// One critical region [theta0, theta1]: α_M and b are affine in θ, α_O = 0
/// and α_I = c(θ).
struct Segment {
  double theta0 = 0.0, theta1 = 0.0;
  double b0 = 0.0, rate_b = 0.0;
  std::vector<std::int32_t> m_ids;
  std::vector<double> alpha0, rate;
  std::vector<std::int32_t> i_ids;
};

struct PathTrace {
  bool has_bias = true;
  std::vector<double> c_old, c_new;  ///< variable level
  std::vector<PathEvent> events;
  std::vector<Segment> segments;
  SolutionState terminal;
  std::size_t refreshes = 0;
  std::size_t ridge_escalations = 0;
  double final_ridge = 0.0;
  /// How the start state was made exact: "given", "refined" or "zero-path".
  std::string start_method = "given";

  /// Breakpoint events (everything except the final completion).
  std::size_t breakpoints() const;
  /// Mean of |M| over events, the statistic tracked per run.
  double mean_margin_size() const;

  /// Right-continuous: the segment with theta0 ≤ θ < theta1, the last one at θ = 1.
  const Segment* segment_at(double theta) const;
  std::vector<double> alpha_at(double theta) const;
  double bias_at(double theta) const;
  double weight(std::size_t v, double theta) const {
    return c_old[v] + theta * (c_new[v] - c_old[v]);
  }
};

struct PathOptions {
  std::size_t refresh_every = 100;
  double residual_tol = 1e-6;
  double rate_tol = 1e-12;
  double tie_tol = 1e-12;
  /// Event budget is budget_factor · (number of variables).
  std::size_t budget_factor = 100;
  double max_ridge = 1e-3;
  std::size_t cycle_limit = 3;
  bool parallel = true;
  bool record_segments = true;
  /// Tolerance for accepting a supplied start state as exact.
  double start_tol = 1e-8;
};

/// Low-level path engine over one weight segment. Exposed for tests; most
/// callers use follow_path.
class PathFollower {
 public:
  /// `start` must be exact for c_old (sets consistent, KKT within tolerance).
  PathFollower(const DualProblem& prob, const SolutionState& start,
               std::span<const double> c_old, std::span<const double> c_new,
               PathOptions opt = {});

  struct Rates {
    double b = 0.0;
    std::vector<double> m;  ///< aligned with margin_list()
  };
  struct Step {
    double dtheta = 0.0;
    EventKind kind = EventKind::completion;
    Index index = -1;
  };

  /// φ for the current margin set (requires M nonempty, or no bias).
  Rates compute_phi();
  /// ψ_v for every variable (rates of h_v; zero on M up to rounding).
  std::vector<double> compute_psi(const Rates& phi) const;
  Step max_step(const Rates& phi, std::span<const double> psi) const;
  /// Moves along the current region by dtheta.
  void advance(double dtheta, const Rates& phi, std::span<const double> psi);
  void apply_event(const Step& s);
  /// Handles M = ∅ for problems with a bias. Returns the step taken; the
  /// event kind is empty_margin or completion.
  Step empty_margin_step();

  /// Runs to θ = 1.
  PathTrace run();

  double theta() const noexcept { return theta_; }
  const SolutionState& state() const noexcept { return st_; }
  const std::vector<std::size_t>& margin_list() const noexcept { return mlist_; }
  const BorderedFactor& factor() const noexcept { return factor_; }
  double delta() const noexcept { return delta_; }
  double weight(std::size_t v) const { return c0_[v] + theta_ * d_[v]; }
  const DualProblem& problem() const noexcept { return prob_; }

  /// Rebuilds factor, caches and the affine (b, α_M) from scratch.
  void refresh();

 private:
  void add_to_margin(std::size_t v);
  void remove_from_margin(std::size_t v);
  void add_to_bound(std::size_t v, double sign);
  void record_event(EventKind kind, Index index);
  void record_segment(double theta0, double b0, const Rates& phi,
                      const std::vector<double>& alpha_m0);
  void escalate_ridge(const std::string& why);
  bool frozen(std::size_t v) const { return c0_[v] == 0.0 && d_[v] == 0.0; }

  DualProblem prob_;
  PathOptions opt_;
  std::size_t n_;
  std::vector<double> c0_, d_, cnew_;
  double theta_ = 0.0;
  SolutionState st_;
  std::vector<std::size_t> mlist_;
  std::vector<std::ptrdiff_t> mpos_;
  BorderedFactor factor_;
  std::vector<double> u_;  ///< Σ_{I} d coef K(item, ·)
  double delta_ = 0.0;     ///< Σ_{I} y d
  mutable std::vector<double> scratch_, cand_;
  mutable std::vector<std::uint8_t> cand_kind_;

  PathTrace trace_;
  std::size_t since_refresh_ = 0;
  std::size_t zero_streak_ = 0;
  double cycle_theta_ = -1.0;
  std::vector<std::size_t> cycle_count_;
  std::vector<std::size_t> cycle_touched_;
};

/// Checks that a state is an exact optimum at c (no approximation slack).
KktReport exactness_report(const DualProblem& prob, const SolutionState& st,
                           std::span<const double> c);

/// Produces an exact start state at c: refines `approx` via its sets and an
/// affine re-solve, then tries a tight SMO solve (warm-started from `approx`
/// when given), and finally follows a path from all-zero weights. `method`
/// receives how it was made.
SolutionState exact_solve(const DualProblem& prob, std::span<const double> c,
                          const SolutionState* approx = nullptr,
                          const PathOptions& opt = {}, std::string* method = nullptr);

/// Full path run: makes `start` exact for c_old, then follows to c_new.
/// Weights are variable level (see expand_weights).
PathTrace follow_path(const DualProblem& prob, const SolutionState& start,
                      std::span<const double> c_old, std::span<const double> c_new,
                      const PathOptions& opt = {});

/// Trace CSV: event_ordinal,theta,kind,index,m,o,i,b,objective.
void write_trace_csv(std::ostream& out, const PathTrace& trace);
/// Lossless JSON form of a trace (segments and weights), for later
/// validation-path evaluation.
std::string trace_to_json(const PathTrace& trace);
PathTrace trace_from_json(const std::string& text);

}  // namespace wsvm
