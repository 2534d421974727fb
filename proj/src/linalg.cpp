#include "wsvm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsvm {

std::vector<double> cholesky(std::span<const double> a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (s <= BorderedFactor::pivot_tol)
          throw SingularityError("cholesky: non-positive pivot " + std::to_string(s) +
                                 " at row " + std::to_string(i));
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  return l;
}

void BorderedFactor::reserve(std::size_t k) {
  if (k <= cap_) return;
  std::size_t cap = std::max<std::size_t>(8, cap_);
  while (cap < k) cap *= 2;
  std::vector<double> l(cap * cap, 0.0), a(cap * cap, 0.0);
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      l[i * cap + j] = l_[i * cap_ + j];
      a[i * cap + j] = a_[i * cap_ + j];
    }
  }
  l_.swap(l);
  a_.swap(a);
  cap_ = cap;
}

BorderedFactor BorderedFactor::factor(std::span<const double> inner,
                                      std::span<const double> border, bool bordered) {
  const std::size_t k = border.size();
  if (inner.size() != k * k) throw ArgumentError("BorderedFactor::factor: size mismatch");
  BorderedFactor f(bordered);
  if (k == 0) return f;
  const std::vector<double> l = cholesky(inner, k);
  f.reserve(k);
  f.k_ = k;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      f.l_[i * f.cap_ + j] = l[i * k + j];
      f.a_[i * f.cap_ + j] = inner[i * k + j];
    }
  }
  f.y_.assign(border.begin(), border.end());
  f.z_ = f.y_;
  f.forward(f.z_);
  f.s_ = 0.0;
  for (double v : f.z_) f.s_ += v * v;
  return f;
}

void BorderedFactor::forward(std::span<double> v) const {
  for (std::size_t i = 0; i < k_; ++i) {
    double s = v[i];
    const double* li = &l_[i * cap_];
    for (std::size_t j = 0; j < i; ++j) s -= li[j] * v[j];
    v[i] = s / li[i];
  }
}

void BorderedFactor::backward(std::span<double> v) const {
  for (std::size_t ii = k_; ii-- > 0;) {
    double s = v[ii];
    for (std::size_t j = ii + 1; j < k_; ++j) s -= l_[j * cap_ + ii] * v[j];
    v[ii] = s / l_[ii * cap_ + ii];
  }
}

void BorderedFactor::add_index(std::span<const double> cross, double diag, double border) {
  if (cross.size() != k_) throw ArgumentError("BorderedFactor::add_index: cross size mismatch");
  std::vector<double> l(cross.begin(), cross.end());
  forward(l);
  double lam2 = diag;
  for (double v : l) lam2 -= v * v;
  if (lam2 <= pivot_tol)
    throw SingularityError("BorderedFactor::add_index: pivot " + std::to_string(lam2) +
                           " not positive");
  const double lam = std::sqrt(lam2);
  reserve(k_ + 1);
  const std::size_t n = k_;
  for (std::size_t j = 0; j < n; ++j) {
    l_[n * cap_ + j] = l[j];
    a_[n * cap_ + j] = cross[j];
    a_[j * cap_ + n] = cross[j];
  }
  l_[n * cap_ + n] = lam;
  a_[n * cap_ + n] = diag;
  for (std::size_t j = n + 1; j < cap_; ++j) l_[n * cap_ + j] = 0.0;
  double lz = 0.0;
  for (std::size_t j = 0; j < n; ++j) lz += l[j] * z_[j];
  const double znew = (border - lz) / lam;
  y_.push_back(border);
  z_.push_back(znew);
  s_ += znew * znew;
  k_ = n + 1;
}

void BorderedFactor::remove_index(std::size_t pos) {
  if (pos >= k_) throw ArgumentError("BorderedFactor::remove_index: position out of range");
  const std::size_t k = k_;
  // Drop row `pos` of L; rows below it keep one entry above the diagonal.
  for (std::size_t i = pos; i + 1 < k; ++i)
    for (std::size_t j = 0; j <= i + 1; ++j) l_[i * cap_ + j] = l_[(i + 1) * cap_ + j];
  for (std::size_t j = pos; j + 1 < k; ++j) {
    const double a = l_[j * cap_ + j];
    const double b = l_[j * cap_ + j + 1];
    const double r = std::hypot(a, b);
    const double c = a / r;
    const double s = b / r;
    for (std::size_t i = j; i + 1 < k; ++i) {
      const double u = l_[i * cap_ + j];
      const double v = l_[i * cap_ + j + 1];
      l_[i * cap_ + j] = c * u + s * v;
      l_[i * cap_ + j + 1] = -s * u + c * v;
    }
    l_[j * cap_ + j + 1] = 0.0;
    const double zu = z_[j];
    const double zv = z_[j + 1];
    z_[j] = c * zu + s * zv;
    z_[j + 1] = -s * zu + c * zv;
  }
  for (std::size_t j = 0; j < k; ++j) l_[(k - 1) * cap_ + j] = 0.0;
  z_.pop_back();
  for (std::size_t i = pos; i + 1 < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a_[i * cap_ + j] = a_[(i + 1) * cap_ + j];
  }
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = pos; j + 1 < k; ++j) a_[i * cap_ + j] = a_[i * cap_ + j + 1];
  }
  y_.erase(y_.begin() + static_cast<std::ptrdiff_t>(pos));
  k_ = k - 1;
  s_ = 0.0;
  for (std::size_t i = 0; i < k_; ++i) s_ += z_[i] * z_[i];
}

BorderedFactor::Solution BorderedFactor::solve(double r0, std::span<const double> r) const {
  if (k_ == 0) throw ArgumentError("BorderedFactor::solve on an empty factor");
  if (r.size() != k_) throw ArgumentError("BorderedFactor::solve: rhs size mismatch");
  Solution sol;
  sol.x.assign(r.begin(), r.end());
  forward(sol.x);
  if (bordered_) {
    if (!(s_ > 0.0)) throw SingularityError("BorderedFactor::solve: zero Schur scalar");
    double zt = 0.0;
    for (std::size_t i = 0; i < k_; ++i) zt += z_[i] * sol.x[i];
    sol.x0 = (zt - r0) / s_;
    for (std::size_t i = 0; i < k_; ++i) sol.x[i] -= z_[i] * sol.x0;
  }
  backward(sol.x);
  return sol;
}

double BorderedFactor::residual(const Solution& sol, double r0,
                                std::span<const double> r) const {
  double worst = 0.0;
  if (bordered_) {
    double e = -r0;
    for (std::size_t i = 0; i < k_; ++i) e += y_[i] * sol.x[i];
    worst = std::abs(e);
  }
  for (std::size_t i = 0; i < k_; ++i) {
    double e = -r[i];
    if (bordered_) e += y_[i] * sol.x0;
    for (std::size_t j = 0; j < k_; ++j) e += a_[i * cap_ + j] * sol.x[j];
    worst = std::max(worst, std::abs(e));
  }
  return worst;
}

}  // namespace wsvm
