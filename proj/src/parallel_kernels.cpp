#include "wsvm/parallel_kernels.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wsvm::kernels {

namespace {

inline double eval_rows(const KernelSpec& spec, const double* a, const double* b,
                        std::size_t p) {
  if (spec.kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += a[k] * b[k];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double t = a[k] - b[k];
    d2 += t * t;
  }
  return std::exp(-spec.gamma / static_cast<double>(p) * d2);
}

}  // namespace

void gram_serial(const KernelSpec& spec, std::span<const double> x, std::size_t n,
                 std::size_t p, std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out[i * n + j] = eval_rows(spec, &x[i * p], &x[j * p], p);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = out[j * n + i];
}

void gram_parallel(const KernelSpec& spec, std::span<const double> x, std::size_t n,
                   std::size_t p, std::span<double> out) {
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j <= i; ++j) {
      out[i * n + j] = eval_rows(spec, &x[i * p], &x[j * p], p);
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = out[j * n + i];
  }
}

void axpy_serial(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_parallel(double a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  if (y.size() < parallel_threshold) return axpy_serial(a, x, y);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gather_serial(const TermMap& terms, std::span<const double> vals,
                   std::span<double> out) {
  for (std::size_t v = 0; v < terms.size(); ++v) out[v] = terms.gather(v, vals);
}

void gather_parallel(const TermMap& terms, std::span<const double> vals,
                     std::span<double> out) {
  if (terms.size() < parallel_threshold) return gather_serial(terms, vals, out);
  const auto n = static_cast<std::ptrdiff_t>(terms.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    out[v] = terms.gather(static_cast<std::size_t>(v), vals);
  }
}

namespace {

ArgMin resolve_ties(std::span<const double> cand, double best, std::size_t lo,
                    std::size_t hi, double tie_tol) {
  for (std::size_t i = lo; i < hi; ++i) {
    if (cand[i] >= 0.0 && cand[i] <= best + tie_tol) {
      return {best, static_cast<std::ptrdiff_t>(i)};
    }
  }
  return {std::numeric_limits<double>::infinity(), -1};
}

}  // namespace

ArgMin argmin_serial(std::span<const double> cand, double tie_tol) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : cand) {
    if (c >= 0.0 && c < best) best = c;
  }
  if (!std::isfinite(best)) return {best, -1};
  return resolve_ties(cand, best, 0, cand.size(), tie_tol);
}

ArgMin argmin_parallel(std::span<const double> cand, double tie_tol) {
  if (cand.size() < parallel_threshold) return argmin_serial(cand, tie_tol);
  const auto n = static_cast<std::ptrdiff_t>(cand.size());
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : best) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double c = cand[static_cast<std::size_t>(i)];
    if (c >= 0.0 && c < best) best = c;
  }
  if (!std::isfinite(best)) return {best, -1};
  std::ptrdiff_t first = n;
#pragma omp parallel for reduction(min : first) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double c = cand[static_cast<std::size_t>(i)];
    if (c >= 0.0 && c <= best + tie_tol && i < first) first = i;
  }
  return {best, first};
}

}  // namespace wsvm::kernels
