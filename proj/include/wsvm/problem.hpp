#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "wsvm/dataset.hpp"
#include "wsvm/kernel.hpp"
#include "wsvm/parallel_kernels.hpp"

namespace wsvm {

enum class ProblemKind { classification, regression, ranking };

/// Weighted box-constrained dual
///
///     min ½ αᵀQα − pᵀα   s.t.  yᵀα = 0 (when has_bias),  0 ≤ α_v ≤ c_v
///
/// over variables that are signed combinations of items of one kernel:
/// Q_vw = Σ coef·coef·K(item, item) + ridge·[v == w]. Classification uses one
/// term per instance with coef = y_i. Regression doubles the variables into
/// (α⁺, α⁻). Ranking uses one variable per preference pair (i, j) with terms
/// +K(i, ·) − K(j, ·) and no bias.
class DualProblem {
 public:
  static DualProblem classification(std::shared_ptr<const KernelMatrix> k,
                                    std::span<const double> labels, double ridge);
  static DualProblem regression(std::shared_ptr<const KernelMatrix> k,
                                std::span<const double> targets, double epsilon,
                                double ridge);
  static DualProblem ranking(std::shared_ptr<const KernelMatrix> k,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs,
                             double ridge);

  ProblemKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t items() const noexcept { return kernel_->size(); }
  bool has_bias() const noexcept { return has_bias_; }
  double ridge() const noexcept { return ridge_; }
  void set_ridge(double r) { ridge_ = r; }
  double epsilon() const noexcept { return epsilon_; }

  const KernelMatrix& kernel() const noexcept { return *kernel_; }
  std::shared_ptr<const KernelMatrix> kernel_ptr() const noexcept { return kernel_; }
  const kernels::TermMap& terms() const noexcept { return terms_; }

  double y(std::size_t v) const { return y_[v]; }
  double p(std::size_t v) const { return p_[v]; }
  std::span<const double> border() const { return y_; }
  std::span<const double> target() const { return p_; }

  /// Bias reported when no variable constrains it (all weights zero).
  double default_bias() const noexcept { return default_bias_; }

  double q(std::size_t v, std::size_t w) const;
  /// Item-level combination Σ_t coef_t K(item_t, ·) for variable v, added with
  /// scale `a` into `out` (length items()).
  void add_item_row(std::size_t v, double a, std::span<double> out) const;
  /// Full Q row of variable v; `scratch` has length items().
  void q_row(std::size_t v, std::span<double> out, std::span<double> scratch) const;
  std::vector<double> dense_q() const;

  /// f(x) − b at every item for the given α: Σ_v α_v Σ_t coef_t K(item_t, j).
  std::vector<double> item_scores(std::span<const double> alpha) const;
  /// (Qα)_v for every variable.
  std::vector<double> q_times(std::span<const double> alpha) const;

  /// Swaps the label of a classification variable (coef and border).
  void flip_label(std::size_t v);

  /// Number of original instances (items for classification/regression).
  std::size_t instances() const noexcept { return instances_; }
  /// For regression, α_i = α⁺_i − α⁻_i.
  std::vector<double> combine(std::span<const double> alpha) const;

 private:
  ProblemKind kind_ = ProblemKind::classification;
  std::shared_ptr<const KernelMatrix> kernel_;
  kernels::TermMap terms_;
  std::vector<double> y_, p_;
  bool has_bias_ = true;
  double ridge_ = 0.0;
  double epsilon_ = 0.0;
  double default_bias_ = 0.0;
  std::size_t instances_ = 0;
};

/// Weight vector expanded to the variables of a problem: regression repeats
/// c for α⁺ and α⁻.
std::vector<double> expand_weights(const DualProblem& prob, std::span<const double> c);

}  // namespace wsvm
