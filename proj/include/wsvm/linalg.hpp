#pragma once

#include <span>
#include <vector>

#include "wsvm/error.hpp"

namespace wsvm {

/// Factor of the bordered symmetric system
///
///     [ 0  yᵀ ] [x0]   [r0]
///     [ y  A  ] [x ] = [r ]
///
/// kept as a lower Cholesky factor L of the inner block A plus z = L⁻¹y and
/// the Schur scalar s = zᵀz. Without a border the system is just A x = r.
/// Indices are appended at the end and removed at any position; removal
/// restores triangularity with Givens rotations.
class BorderedFactor {
 public:
  /// Pivots with L_kk² at or below this value are rejected.
  static constexpr double pivot_tol = 1e-12;

  explicit BorderedFactor(bool bordered = true) : bordered_(bordered) {}

  /// From-scratch factor of a k x k row-major inner block.
  static BorderedFactor factor(std::span<const double> inner, std::span<const double> border,
                               bool bordered = true);

  std::size_t size() const noexcept { return k_; }
  bool empty() const noexcept { return k_ == 0; }
  bool bordered() const noexcept { return bordered_; }

  /// Appends an index. `cross` holds A(new, j) for the existing j.
  void add_index(std::span<const double> cross, double diag, double border = 1.0);
  void remove_index(std::size_t pos);

  struct Solution {
    double x0 = 0.0;
    std::vector<double> x;
  };
  Solution solve(double r0, std::span<const double> r) const;

  /// max |M sol - rhs| using the stored inner block.
  double residual(const Solution& sol, double r0, std::span<const double> r) const;

  double lower(std::size_t i, std::size_t j) const { return j <= i ? l_[i * cap_ + j] : 0.0; }
  double inner(std::size_t i, std::size_t j) const { return a_[i * cap_ + j]; }
  double border(std::size_t i) const { return y_[i]; }
  std::span<const double> border_solve() const { return {z_.data(), k_}; }
  double schur() const noexcept { return s_; }

 private:
  void reserve(std::size_t k);
  void forward(std::span<double> v) const;   // v <- L⁻¹ v
  void backward(std::span<double> v) const;  // v <- L⁻ᵀ v

  bool bordered_;
  std::size_t k_ = 0;
  std::size_t cap_ = 0;
  std::vector<double> l_;  // cap_ x cap_, lower triangle used
  std::vector<double> a_;  // cap_ x cap_, inner block copy
  std::vector<double> y_;
  std::vector<double> z_;
  double s_ = 0.0;
};

/// Dense lower Cholesky of a row-major SPD matrix; throws SingularityError.
std::vector<double> cholesky(std::span<const double> a, std::size_t n);

}  // namespace wsvm
