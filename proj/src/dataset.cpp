#include "wsvm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace wsvm {

void Dataset::push_back(std::span<const double> x, double y, int qid) {
  if (x.size() != p_) {
    throw ArgumentError("row has " + std::to_string(x.size()) +
                        " features, dataset dimension is " + std::to_string(p_));
  }
  if (kind_ == LabelKind::binary && y != 1.0 && y != -1.0) {
    throw ArgumentError("binary labels must be -1 or +1");
  }
  inputs_.insert(inputs_.end(), x.begin(), x.end());
  labels_.push_back(y);
  if (kind_ == LabelKind::graded) queries_.push_back(qid);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(p_, kind_);
  for (auto r : rows) out.push_back(row(r), labels_[r], query(r));
  return out;
}

void Dataset::set_label(std::size_t i, double y) {
  if (kind_ == LabelKind::binary && y != 1.0 && y != -1.0) {
    throw ArgumentError("binary labels must be -1 or +1");
  }
  labels_[i] = y;
}

void Dataset::validate() const {
  if (size() == 0) throw ArgumentError("no instances");
  if (p_ == 0) throw ArgumentError("feature dimension is zero");
  if (kind_ == LabelKind::binary) {
    for (double y : labels_) {
      if (y != 1.0 && y != -1.0) throw ArgumentError("binary labels must be -1 or +1");
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> box_of(NormMode m) {
  return m == NormMode::signed_box ? std::pair{-1.0, 1.0} : std::pair{0.0, 1.0};
}

}  // namespace

void NormalizationSpec::transform(std::span<double> x) const {
  if (mode == NormMode::none) return;
  const auto [lo, hi] = box_of(mode);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double span = max[j] - min[j];
    x[j] = span > 0.0 ? lo + (hi - lo) * (x[j] - min[j]) / span : 0.5 * (lo + hi);
  }
}

void NormalizationSpec::inverse(std::span<double> x) const {
  if (mode == NormMode::none) return;
  const auto [lo, hi] = box_of(mode);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double span = max[j] - min[j];
    x[j] = span > 0.0 ? min[j] + span * (x[j] - lo) / (hi - lo) : min[j];
  }
}

Dataset NormalizationSpec::apply(const Dataset& ds) const {
  Dataset out(ds.dim(), ds.kind());
  std::vector<double> x(ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto r = ds.row(i);
    std::copy(r.begin(), r.end(), x.begin());
    transform(x);
    out.push_back(x, ds.label(i), ds.query(i));
  }
  return out;
}

Normalized normalize(const Dataset& ds, NormMode mode) {
  Normalized out;
  out.spec.mode = mode;
  const std::size_t p = ds.dim();
  out.spec.min.assign(p, 0.0);
  out.spec.max.assign(p, 0.0);
  if (ds.size() > 0) {
    for (std::size_t j = 0; j < p; ++j) {
      out.spec.min[j] = out.spec.max[j] = ds.row(0)[j];
    }
    for (std::size_t i = 1; i < ds.size(); ++i) {
      auto r = ds.row(i);
      for (std::size_t j = 0; j < p; ++j) {
        out.spec.min[j] = std::min(out.spec.min[j], r[j]);
        out.spec.max[j] = std::max(out.spec.max[j], r[j]);
      }
    }
  }
  if (mode != NormMode::none) {
    for (std::size_t j = 0; j < p; ++j) {
      if (!(out.spec.max[j] > out.spec.min[j])) {
        out.constant_features.push_back(j);
        std::cerr << "warning: feature " << j + 1
                  << " is constant; mapped to the box midpoint\n";
      }
    }
  }
  out.data = out.spec.apply(ds);
  return out;
}

NormMode parse_norm_mode(const std::string& s) {
  if (s == "unit" || s == "unit-box" || s == "[0,1]") return NormMode::unit_box;
  if (s == "signed" || s == "signed-box" || s == "[-1,1]") return NormMode::signed_box;
  if (s == "none") return NormMode::none;
  throw ArgumentError("unknown normalization mode '" + s + "'");
}

std::string to_string(NormMode m) {
  switch (m) {
    case NormMode::unit_box: return "unit-box";
    case NormMode::signed_box: return "signed-box";
    case NormMode::none: return "none";
  }
  return "none";
}

LabelKind parse_label_kind(const std::string& s) {
  if (s == "binary" || s == "classification") return LabelKind::binary;
  if (s == "real" || s == "regression") return LabelKind::real;
  if (s == "graded" || s == "ranking") return LabelKind::graded;
  throw ArgumentError("unknown label kind '" + s + "'");
}

std::string to_string(LabelKind k) {
  switch (k) {
    case LabelKind::binary: return "binary";
    case LabelKind::real: return "real";
    case LabelKind::graded: return "graded";
  }
  return "binary";
}

// ---------------------------------------------------------------------------
// LIBSVM text

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_long(std::string_view s, long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tok;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tok.push_back(line.substr(i, j - i));
    i = j;
  }
  return tok;
}

struct SparseRow {
  double label;
  int qid;
  std::vector<std::pair<long, double>> entries;
};

}  // namespace

Dataset read_libsvm(std::istream& in, LabelKind kind, std::size_t dim) {
  std::vector<SparseRow> rows;
  std::string line;
  std::size_t lineno = 0;
  long max_index = 0;
  bool saw_zero_label = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    SparseRow row{};
    if (!parse_double(tok[0], row.label)) {
      throw ParseError("bad label '" + std::string(tok[0]) + "'", lineno);
    }
    std::size_t t = 1;
    if (t < tok.size() && tok[t].substr(0, 4) == "qid:") {
      long q = 0;
      if (!parse_long(tok[t].substr(4), q)) throw ParseError("bad qid token", lineno);
      row.qid = static_cast<int>(q);
      ++t;
    } else if (kind == LabelKind::graded) {
      throw ParseError("graded data requires a qid:Q token", lineno);
    }
    long prev = 0;
    for (; t < tok.size(); ++t) {
      auto colon = tok[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected idx:val, got '" + std::string(tok[t]) + "'", lineno);
      }
      long idx = 0;
      double val = 0.0;
      if (!parse_long(tok[t].substr(0, colon), idx) || idx < 1) {
        throw ParseError("bad feature index in '" + std::string(tok[t]) + "'", lineno);
      }
      if (!parse_double(tok[t].substr(colon + 1), val)) {
        throw ParseError("bad feature value in '" + std::string(tok[t]) + "'", lineno);
      }
      if (idx <= prev) throw ParseError("feature indices must be ascending", lineno);
      prev = idx;
      row.entries.emplace_back(idx, val);
    }
    max_index = std::max(max_index, prev);
    if (kind == LabelKind::binary && row.label != 1.0 && row.label != -1.0) {
      if (row.label == 0.0) saw_zero_label = true;
      if (!(row.label == 0.0 || row.label == 1.0)) {
        throw ParseError("binary labels must be -1 or +1", lineno);
      }
    }
    if (kind == LabelKind::graded && row.label != std::floor(row.label)) {
      throw ParseError("relevance grades must be integers", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no instances");
  if (saw_zero_label) {
    throw ParseError("binary labels must be -1 or +1; remap {0,1} labels to {-1,+1}");
  }
  const std::size_t p = dim ? dim : static_cast<std::size_t>(std::max<long>(max_index, 1));
  if (static_cast<std::size_t>(max_index) > p) {
    throw ParseError("feature index " + std::to_string(max_index) +
                     " exceeds declared dimension " + std::to_string(p));
  }
  Dataset ds(p, kind);
  std::vector<double> x(p);
  for (const auto& r : rows) {
    std::fill(x.begin(), x.end(), 0.0);
    for (auto [idx, val] : r.entries) x[static_cast<std::size_t>(idx - 1)] = val;
    ds.push_back(x, r.label, r.qid);
  }
  return ds;
}

Dataset load_libsvm(const std::string& path, LabelKind kind, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_libsvm(in, kind, dim);
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_libsvm(std::ostream& out, const Dataset& ds) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double y = ds.label(i);
    if (ds.kind() == LabelKind::binary && y > 0) out << '+';
    put_double(out, y);
    if (ds.kind() == LabelKind::graded) out << " qid:" << ds.query(i);
    auto r = ds.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] == 0.0) continue;
      out << ' ' << j + 1 << ':';
      put_double(out, r[j]);
    }
    out << '\n';
  }
}

void save_libsvm(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  write_libsvm(out, ds);
}

std::vector<double> read_weights_csv(std::istream& in) {
  std::vector<double> w;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    std::string_view t = tok[0];
    if (!t.empty() && t.back() == ',') t.remove_suffix(1);
    double v = 0.0;
    if (tok.size() != 1 || !parse_double(t, v)) {
      throw ParseError("expected one number per line", lineno);
    }
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ParseError("weights must be finite and nonnegative", lineno);
    }
    w.push_back(v);
  }
  return w;
}

std::vector<double> load_weights_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_weights_csv(in);
}

void write_weights_csv(std::ostream& out, std::span<const double> w) {
  for (double v : w) {
    put_double(out, v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Rng

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0, 1] x [0, 1).
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::size_t Rng::below(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

// ---------------------------------------------------------------------------
// Generators

ToyData gen_toy_classification(std::size_t n, std::uint64_t seed) {
  if (n < 4 || n % 4 != 0) throw ArgumentError("n must be a positive multiple of 4");
  struct Case {
    double mx, my, vx, vy, label;
    int cost;
  };
  // (K+1 or K-1) x (D1 or D2)
  constexpr Case cases[4] = {
      {1.0, 0.0, 1.0, 0.5, +1.0, 1},
      {0.0, 0.0, 0.5, 0.5, +1.0, 2},
      {0.0, 1.0, 1.0, 0.5, -1.0, 1},
      {1.0, 1.0, 0.5, 0.5, -1.0, 2},
  };
  Rng rng(seed);
  ToyData out{Dataset(2, LabelKind::binary), {}};
  const std::size_t per = n / 4;
  for (const auto& c : cases) {
    for (std::size_t i = 0; i < per; ++i) {
      const double x[2] = {c.mx + std::sqrt(c.vx) * rng.normal(),
                           c.my + std::sqrt(c.vy) * rng.normal()};
      out.data.push_back(x, c.label);
      out.cost_group.push_back(c.cost);
    }
  }
  return out;
}

std::vector<double> gen_price_series(std::size_t days, std::uint64_t seed, double phi,
                                     double vol) {
  Rng rng(seed);
  std::vector<double> p(days);
  double price = 100.0, r = 0.0;
  for (auto& v : p) {
    r = phi * r + vol * rng.normal();
    price *= std::exp(r);
    v = price;
  }
  return p;
}

namespace {

std::vector<double> ema(std::span<const double> p, int k) {
  std::vector<double> e(p.size());
  if (p.empty()) return e;
  const double a = 2.0 / (k + 1.0);
  e[0] = p[0];
  for (std::size_t i = 1; i < p.size(); ++i) e[i] = a * p[i] + (1.0 - a) * e[i - 1];
  return e;
}

void clip_two_sd(std::span<double> v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  for (auto& x : v) x = std::clamp(x, mean - 2.0 * sd, mean + 2.0 * sd);
}

}  // namespace

Dataset rdp_features(std::span<const double> prices) {
  constexpr std::size_t lag = 20, ahead = 5;
  if (prices.size() < lag + ahead + 1) {
    throw ArgumentError("price series too short for RDP features");
  }
  const auto e15 = ema(prices, 15);
  const auto e3 = ema(prices, 3);
  const std::size_t m = prices.size() - lag - ahead;
  std::vector<double> cols[5];
  std::vector<double> target(m);
  for (auto& c : cols) c.resize(m);
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t i = t + lag;
    cols[0][t] = prices[i] - e15[i];
    for (int k = 1; k <= 4; ++k) {
      const double prev = prices[i - 5 * static_cast<std::size_t>(k)];
      cols[k][t] = (prices[i] - prev) / prev * 100.0;
    }
    target[t] = (e3[i + ahead] - e3[i]) / e3[i] * 100.0;
  }
  for (int k = 1; k <= 4; ++k) clip_two_sd(cols[k]);
  clip_two_sd(target);
  Dataset ds(5, LabelKind::binary);
  double x[5];
  for (std::size_t t = 0; t < m; ++t) {
    for (int k = 0; k < 5; ++k) x[k] = cols[k][t];
    ds.push_back(x, target[t] >= 0.0 ? 1.0 : -1.0);
  }
  return ds;
}

Dataset gen_two_regime_regression(std::size_t n, std::size_t p, std::uint64_t seed,
                                  double low_sd, double high_sd) {
  if (n == 0 || p == 0) throw ArgumentError("n and p must be positive");
  Rng rng(seed);
  Dataset ds(p, LabelKind::real);
  std::vector<double> x(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += x[j] / static_cast<double>(j + 1);
    const double signal = std::sin(2.0 * s) + 0.5 * s;
    const double sd = x[0] < 0.0 ? low_sd : high_sd;
    ds.push_back(x, signal + sd * rng.normal());
  }
  return ds;
}

Dataset gen_ranking(std::size_t queries, std::size_t docs, std::size_t p, int max_grade,
                    std::uint64_t seed) {
  if (queries == 0 || docs == 0 || p == 0 || max_grade < 1) {
    throw ArgumentError("ranking generator needs positive sizes and max_grade >= 1");
  }
  Rng rng(seed);
  std::vector<double> w(p);
  for (auto& v : w) v = rng.normal();
  Dataset ds(p, LabelKind::graded);
  std::vector<double> x(p);
  for (std::size_t q = 0; q < queries; ++q) {
    for (std::size_t d = 0; d < docs; ++d) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        x[j] = rng.uniform();
        s += w[j] * (x[j] - 0.5);
      }
      const double z = s / std::sqrt(static_cast<double>(p) / 12.0) + 0.5 * rng.normal();
      // Standard normal mapped to grades by equal-width bins on [-1.5, 1.5].
      const double u = std::clamp((z + 1.5) / 3.0, 0.0, 0.999999);
      const int grade = static_cast<int>(u * (max_grade + 1));
      ds.push_back(x, grade, static_cast<int>(q + 1));
    }
  }
  return ds;
}

}  // namespace wsvm
