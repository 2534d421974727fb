#pragma once

// Data-parallel inner loops of the solvers. Each kernel has a serial
// reference next to its OpenMP version; tests check they agree and
// bench/kernels_bench.cpp times them against each other.

#include <cstdint>
#include <span>
#include <vector>

#include "wsvm/kernel.hpp"

namespace wsvm::kernels {

/// Loops shorter than this stay serial in the parallel versions.
inline constexpr std::size_t parallel_threshold = 2048;

/// Full Gram matrix of row-major inputs x (n x p). Lower triangle computed,
/// mirrored to the upper one.
void gram_serial(const KernelSpec& spec, std::span<const double> x, std::size_t n,
                 std::size_t p, std::span<double> out);
void gram_parallel(const KernelSpec& spec, std::span<const double> x, std::size_t n,
                   std::size_t p, std::span<double> out);

/// y += a * x
void axpy_serial(double a, std::span<const double> x, std::span<double> y);
void axpy_parallel(double a, std::span<const double> x, std::span<double> y);

/// Each variable v is coef0[v] * item0[v] (+ coef1[v] * item1[v] when
/// item1[v] >= 0). Gather evaluates out[v] = sum of coef * vals[item].
struct TermMap {
  std::vector<std::int32_t> item0, item1;
  std::vector<double> coef0, coef1;
  std::size_t size() const noexcept { return item0.size(); }
  double gather(std::size_t v, std::span<const double> vals) const {
    double s = coef0[v] * vals[static_cast<std::size_t>(item0[v])];
    if (item1[v] >= 0) s += coef1[v] * vals[static_cast<std::size_t>(item1[v])];
    return s;
  }
};

void gather_serial(const TermMap& terms, std::span<const double> vals,
                   std::span<double> out);
void gather_parallel(const TermMap& terms, std::span<const double> vals,
                     std::span<double> out);

/// Smallest entry of `cand` (entries < 0 are ignored). Entries within
/// `tie_tol` of the minimum are ties; the smallest index among them wins.
/// Returns {+inf, -1} when nothing qualifies.
struct ArgMin {
  double value;
  std::ptrdiff_t index;
};
ArgMin argmin_serial(std::span<const double> cand, double tie_tol);
ArgMin argmin_parallel(std::span<const double> cand, double tie_tol);

}  // namespace wsvm::kernels
