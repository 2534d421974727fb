#pragma once
// Independent reference computations for the tests. Everything here is
// dense and built on Eigen, separate from the library's own solvers.

#include <functional>
#include <span>
#include <vector>

#include "wsvm/path.hpp"

namespace oracle {

struct QpSolution {
  std::vector<double> alpha;
  double b = 0.0;
  std::size_t iterations = 0;
  double gap = 0.0;
};

/// min ½ αᵀQα − pᵀα s.t. yᵀα = 0 (when y is nonempty), 0 ≤ α ≤ c, by a
/// primal-dual interior point method. Variables with c = 0 are fixed at 0.
/// Q is row-major n x n.
QpSolution dense_qp(std::span<const double> q, std::span<const double> p,
                    std::span<const double> y, std::span<const double> c);

/// Same, taking Q, p and y from a problem.
QpSolution dense_qp(const wsvm::DualProblem& prob, std::span<const double> c);

/// Solves [[0, yᵀ], [y, A]] [x0; x] = [r0; r] (or A x = r without a border).
std::vector<double> bordered_solve(std::span<const double> a, std::span<const double> y,
                                   double r0, std::span<const double> r, bool bordered);

/// Lower Cholesky factor of a row-major SPD matrix.
std::vector<double> cholesky(std::span<const double> a, std::size_t n);

/// Decision values Σ α_v Σ coef K(x, item) + b evaluated directly.
std::vector<double> decision(const wsvm::DualProblem& prob, std::span<const double> alpha,
                             double b, const wsvm::Dataset& points);

/// Central difference of a vector-valued function.
std::vector<double> central_difference(const std::function<std::vector<double>(double)>& f,
                                       double x, double h);

/// Separable-ish random binary data in [0, 1]^p.
wsvm::Dataset random_classification(std::size_t n, std::size_t p, std::uint64_t seed);

/// Random real targets y = sin(3 x_0) + noise on [−1, 1]^p.
wsvm::Dataset random_regression(std::size_t n, std::size_t p, std::uint64_t seed);

/// Random weights in [lo, hi]; each entry is zero with probability `zero`.
std::vector<double> random_weights(std::size_t n, double lo, double hi, double zero,
                                   wsvm::Rng& rng);

/// Values of θ in (0, 1) spread evenly and jittered.
std::vector<double> theta_samples(std::size_t count, wsvm::Rng& rng);

}  // namespace oracle
