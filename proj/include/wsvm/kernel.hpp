#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsvm/dataset.hpp"

namespace wsvm {

enum class KernelKind { gaussian, linear };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  /// Gaussian width; the exponent is scaled by gamma / p.
  double gamma = 1.0;
  /// Added to the diagonal of the working (signed or unsigned) Q matrix.
  double ridge = 1e-6;

  void validate() const;
};

KernelKind parse_kernel_kind(const std::string& s);
std::string to_string(KernelKind k);

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z);

/// A kernel row that stays valid while the handle lives, even if the row
/// cache evicts it.
class KernelRow {
 public:
  KernelRow() = default;
  KernelRow(const double* data, std::size_t n,
            std::shared_ptr<const std::vector<double>> keep = nullptr)
      : data_(data), n_(n), keep_(std::move(keep)) {}
  const double* data() const noexcept { return data_; }
  std::size_t size() const noexcept { return n_; }
  double operator[](std::size_t j) const { return data_[j]; }
  std::span<const double> span() const { return {data_, n_}; }

 private:
  const double* data_ = nullptr;
  std::size_t n_ = 0;
  std::shared_ptr<const std::vector<double>> keep_;
};

/// Item kernel K(x_i, x_j) over one dataset, without labels or ridge.
/// Held in full for n <= full_cap, otherwise rows are computed on demand and
/// kept in an LRU cache guarded by a mutex.
class KernelMatrix {
 public:
  static constexpr std::size_t default_full_cap = 4000;

  KernelMatrix(const Dataset& ds, KernelSpec spec,
               std::size_t full_cap = default_full_cap, std::size_t cache_rows = 0);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return p_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  bool is_full() const noexcept { return !full_.empty(); }

  double operator()(std::size_t i, std::size_t j) const;
  KernelRow row(std::size_t i) const;
  std::span<const double> input(std::size_t i) const { return {x_.data() + i * p_, p_}; }

  /// K(z, x_i) for every item i.
  void cross_row(std::span<const double> z, std::span<double> out) const;

  /// Drops cached rows (on-demand mode only).
  void clear_cache() const;
  std::size_t cache_misses() const;

 private:
  std::size_t n_, p_;
  KernelSpec spec_;
  std::vector<double> x_;
  std::vector<double> full_;

  struct Lru {
    std::size_t capacity = 0;
    std::list<std::size_t> order;
    std::unordered_map<std::size_t,
                       std::pair<std::shared_ptr<const std::vector<double>>,
                                 std::list<std::size_t>::iterator>>
        rows;
    std::size_t misses = 0;
  };
  mutable std::mutex mu_;
  mutable Lru lru_;
};

/// Q_ij = s_i s_j K(x_i, x_j) + ridge * [i == j], with s = y for the signed
/// (classification) form and s = 1 otherwise.
class QMatrix {
 public:
  QMatrix(std::shared_ptr<const KernelMatrix> k, std::vector<double> signs, double ridge);

  std::size_t size() const noexcept { return kernel_->size(); }
  double ridge() const noexcept { return ridge_; }
  bool is_signed() const noexcept { return !signs_.empty(); }
  double sign(std::size_t i) const { return signs_.empty() ? 1.0 : signs_[i]; }
  const KernelMatrix& kernel() const noexcept { return *kernel_; }
  std::shared_ptr<const KernelMatrix> kernel_ptr() const noexcept { return kernel_; }

  double operator()(std::size_t i, std::size_t j) const {
    return sign(i) * sign(j) * (*kernel_)(i, j) + (i == j ? ridge_ : 0.0);
  }
  void row(std::size_t i, std::span<double> out) const;
  /// Row-major dense copy (tests and small oracles).
  std::vector<double> dense() const;

 private:
  std::shared_ptr<const KernelMatrix> kernel_;
  std::vector<double> signs_;
  double ridge_;
};

QMatrix build_q(const Dataset& ds, const KernelSpec& spec, bool is_signed,
                std::size_t full_cap = KernelMatrix::default_full_cap);

}  // namespace wsvm
