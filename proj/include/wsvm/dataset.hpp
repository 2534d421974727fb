#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wsvm/error.hpp"

namespace wsvm {

enum class LabelKind { binary, real, graded };

/// Dense row-major n x p inputs with one label per row. Graded data also
/// carries a query id per row.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t p, LabelKind kind) : p_(p), kind_(kind) {}

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return p_; }
  LabelKind kind() const noexcept { return kind_; }

  std::span<const double> row(std::size_t i) const {
    return {inputs_.data() + i * p_, p_};
  }
  std::span<double> row(std::size_t i) { return {inputs_.data() + i * p_, p_}; }
  double label(std::size_t i) const { return labels_[i]; }
  int query(std::size_t i) const { return queries_.empty() ? 0 : queries_[i]; }

  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<int>& queries() const noexcept { return queries_; }
  const std::vector<double>& inputs() const noexcept { return inputs_; }

  /// Appends a row; validates dimension and binary labels.
  void push_back(std::span<const double> x, double y, int qid = 0);

  Dataset subset(std::span<const std::size_t> rows) const;
  void set_label(std::size_t i, double y);

  /// Throws ArgumentError unless n >= 1, p >= 1 and labels are valid.
  void validate() const;

 private:
  std::size_t p_ = 0;
  LabelKind kind_ = LabelKind::binary;
  std::vector<double> inputs_;
  std::vector<double> labels_;
  std::vector<int> queries_;
};

enum class NormMode { unit_box, signed_box, none };

struct NormalizationSpec {
  NormMode mode = NormMode::none;
  std::vector<double> min;
  std::vector<double> max;

  /// Affine map into the box; constant features go to the box midpoint.
  void transform(std::span<double> x) const;
  void inverse(std::span<double> x) const;
  Dataset apply(const Dataset& ds) const;
};

struct Normalized {
  Dataset data;
  NormalizationSpec spec;
  std::vector<std::size_t> constant_features;
};

Normalized normalize(const Dataset& ds, NormMode mode);

NormMode parse_norm_mode(const std::string& s);
std::string to_string(NormMode m);
LabelKind parse_label_kind(const std::string& s);
std::string to_string(LabelKind k);

/// LIBSVM sparse text, optionally with a "qid:Q" token after the label.
/// `dim` = 0 infers the dimension from the largest index seen.
Dataset load_libsvm(const std::string& path, LabelKind kind, std::size_t dim = 0);
Dataset read_libsvm(std::istream& in, LabelKind kind, std::size_t dim = 0);
void write_libsvm(std::ostream& out, const Dataset& ds);
void save_libsvm(const std::string& path, const Dataset& ds);

/// One nonnegative real per line.
std::vector<double> load_weights_csv(const std::string& path);
std::vector<double> read_weights_csv(std::istream& in);
void write_weights_csv(std::ostream& out, std::span<const double> w);

// ---------------------------------------------------------------------------
// Random numbers

/// splitmix-seeded xoshiro256** with a Box-Muller normal transform, so that
/// a seed reproduces the same stream on every build of this library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::size_t below(std::size_t n);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Generators

/// Two-dimensional cost-sensitive toy data: four Gaussian cases of n/4
/// points each. `cost_group[i]` is 1 or 2 (the misclassification cost).
struct ToyData {
  Dataset data;
  std::vector<int> cost_group;
};

ToyData gen_toy_classification(std::size_t n, std::uint64_t seed);

/// Random-walk closing prices with AR(1) log returns.
std::vector<double> gen_price_series(std::size_t days, std::uint64_t seed,
                                     double phi = 0.1, double vol = 0.01);

/// EMA15 and RDP-5/-10/-15/-20 features with sign(RDP+5) labels. RDP
/// values beyond two standard deviations are clipped to that boundary.
/// Row t corresponds to day t + 20.
Dataset rdp_features(std::span<const double> prices);

/// Regression data y = sinc-like signal + noise whose standard deviation is
/// `low_sd` for x_0 < 0 and `high_sd` otherwise; inputs in [-1, 1]^p.
Dataset gen_two_regime_regression(std::size_t n, std::size_t p,
                                  std::uint64_t seed, double low_sd = 0.05,
                                  double high_sd = 0.5);

/// Queries with graded relevance 0..max_grade whose expected grade grows
/// with a hidden linear score of the features.
Dataset gen_ranking(std::size_t queries, std::size_t docs_per_query,
                    std::size_t p, int max_grade, std::uint64_t seed);

}  // namespace wsvm
