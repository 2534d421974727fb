#include "wsvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsvm/parallel_kernels.hpp"

namespace wsvm {

void KernelSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ArgumentError("kernel gamma must be a finite nonnegative number");
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw ArgumentError("kernel ridge must be a finite nonnegative number");
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "gaussian" || s == "rbf") return KernelKind::gaussian;
  if (s == "linear") return KernelKind::linear;
  throw ArgumentError("unknown kernel '" + s + "' (expected gaussian or linear)");
}

std::string to_string(KernelKind k) {
  return k == KernelKind::gaussian ? "gaussian" : "linear";
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z) {
  if (x.size() != z.size())
    throw ArgumentError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) +
                        " vs " + std::to_string(z.size()) + ")");
  const std::size_t p = x.size();
  if (spec.kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += x[k] * z[k];
    return s;
  }
  if (p == 0) return 1.0;
  double d2 = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double t = x[k] - z[k];
    d2 += t * t;
  }
  return std::exp(-spec.gamma / static_cast<double>(p) * d2);
}

KernelMatrix::KernelMatrix(const Dataset& ds, KernelSpec spec, std::size_t full_cap,
                           std::size_t cache_rows)
    : n_(ds.size()), p_(ds.dim()), spec_(spec), x_(ds.inputs()) {
  spec_.validate();
  if (n_ <= full_cap) {
    full_.assign(n_ * n_, 0.0);
    kernels::gram_parallel(spec_, x_, n_, p_, full_);
  } else {
    lru_.capacity = cache_rows > 0 ? cache_rows : std::max<std::size_t>(64, full_cap);
  }
}

double KernelMatrix::operator()(std::size_t i, std::size_t j) const {
  if (is_full()) return full_[i * n_ + j];
  return kernel_eval(spec_, input(i), input(j));
}

KernelRow KernelMatrix::row(std::size_t i) const {
  if (is_full()) return {full_.data() + i * n_, n_};
  std::lock_guard<std::mutex> lock(mu_);
  auto it = lru_.rows.find(i);
  if (it != lru_.rows.end()) {
    lru_.order.splice(lru_.order.begin(), lru_.order, it->second.second);
    const auto& keep = it->second.first;
    return {keep->data(), n_, keep};
  }
  ++lru_.misses;
  auto data = std::make_shared<std::vector<double>>(n_);
  for (std::size_t j = 0; j < n_; ++j) (*data)[j] = kernel_eval(spec_, input(i), input(j));
  if (lru_.rows.size() >= lru_.capacity && !lru_.order.empty()) {
    lru_.rows.erase(lru_.order.back());
    lru_.order.pop_back();
  }
  lru_.order.push_front(i);
  std::shared_ptr<const std::vector<double>> keep = data;
  lru_.rows.emplace(i, std::make_pair(keep, lru_.order.begin()));
  return {keep->data(), n_, keep};
}

void KernelMatrix::cross_row(std::span<const double> z, std::span<double> out) const {
  if (z.size() != p_) throw ArgumentError("cross_row: dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) out[i] = kernel_eval(spec_, z, input(i));
}

void KernelMatrix::clear_cache() const {
  std::lock_guard<std::mutex> lock(mu_);
  lru_.rows.clear();
  lru_.order.clear();
}

std::size_t KernelMatrix::cache_misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lru_.misses;
}

QMatrix::QMatrix(std::shared_ptr<const KernelMatrix> k, std::vector<double> signs,
                 double ridge)
    : kernel_(std::move(k)), signs_(std::move(signs)), ridge_(ridge) {
  if (!signs_.empty() && signs_.size() != kernel_->size())
    throw ArgumentError("QMatrix: sign vector length differs from kernel size");
}

void QMatrix::row(std::size_t i, std::span<double> out) const {
  const KernelRow r = kernel_->row(i);
  const double si = sign(i);
  for (std::size_t j = 0; j < size(); ++j) out[j] = si * sign(j) * r[j];
  out[i] += ridge_;
}

std::vector<double> QMatrix::dense() const {
  const std::size_t n = size();
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) row(i, std::span<double>(q.data() + i * n, n));
  return q;
}

QMatrix build_q(const Dataset& ds, const KernelSpec& spec, bool is_signed,
                std::size_t full_cap) {
  auto k = std::make_shared<const KernelMatrix>(ds, spec, full_cap);
  std::vector<double> signs;
  if (is_signed) signs = ds.labels();
  return QMatrix(std::move(k), std::move(signs), spec.ridge);
}

}  // namespace wsvm
