#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/linalg.hpp"

using namespace wsvm;

namespace {

// Random SPD matrix B Bᵀ + n I, row-major.
std::vector<double> random_spd(std::size_t n, Rng& rng) {
  std::vector<double> b(n * n), a(n * n, 0.0);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) a[i * n + j] += b[i * n + k] * b[j * n + k];
      if (i == j) a[i * n + j] += static_cast<double>(n);
    }
  return a;
}

std::vector<double> random_signs(std::size_t n, Rng& rng) {
  std::vector<double> y(n);
  for (auto& v : y) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return y;
}

std::vector<double> sub(const std::vector<double>& a, std::size_t n,
                        const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size() * idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out[i * idx.size() + j] = a[idx[i] * n + idx[j]];
  return out;
}

double max_factor_gap(const BorderedFactor& inc, const BorderedFactor& ref) {
  double gap = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j)
      gap = std::max(gap, std::abs(inc.lower(i, j) - ref.lower(i, j)));
    gap = std::max(gap, std::abs(inc.border_solve()[i] - ref.border_solve()[i]));
  }
  if (ref.bordered()) gap = std::max(gap, std::abs(inc.schur() - ref.schur()));
  return gap;
}

BorderedFactor grow(const std::vector<double>& a, std::size_t n, const std::vector<double>& y,
                    const std::vector<std::size_t>& idx, bool bordered) {
  BorderedFactor f(bordered);
  for (std::size_t t = 0; t < idx.size(); ++t) {
    std::vector<double> cross(t);
    for (std::size_t s = 0; s < t; ++s) cross[s] = a[idx[t] * n + idx[s]];
    f.add_index(cross, a[idx[t] * n + idx[t]], y[idx[t]]);
  }
  return f;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

TEST_CASE("2x2 bordered system by hand") {
  const std::vector<double> inner{1.0}, border{1.0};
  BorderedFactor f = BorderedFactor::factor(inner, border);
  const auto s = f.solve(0.0, std::vector<double>{1.0});
  CHECK(s.x0 == doctest::Approx(1.0));
  CHECK(std::abs(s.x[0]) <= 1e-15);
}

TEST_CASE("identity inner block with opposite borders") {
  const std::vector<double> inner{1.0, 0.0, 0.0, 1.0}, border{1.0, -1.0};
  BorderedFactor f = BorderedFactor::factor(inner, border);
  const auto s = f.solve(0.0, std::vector<double>{1.0, 1.0});
  CHECK(std::abs(s.x0) <= 1e-15);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(1.0));
}

TEST_CASE("random 6x6 bordered solve matches dense LU") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6;
    const auto a = random_spd(n, rng);
    const auto y = random_signs(n, rng);
    std::vector<double> r(n);
    for (auto& v : r) v = rng.uniform(-2.0, 2.0);
    const double r0 = rng.uniform(-1.0, 1.0);
    for (bool bordered : {true, false}) {
      BorderedFactor f = BorderedFactor::factor(a, y, bordered);
      const auto s = f.solve(r0, r);
      const auto ref = oracle::bordered_solve(a, y, r0, r, bordered);
      const std::size_t off = bordered ? 1 : 0;
      if (bordered) CHECK(std::abs(s.x0 - ref[0]) <= 1e-10);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(s.x[i] - ref[i + off]) <= 1e-10);
      CHECK(f.residual(s, r0, r) <= 1e-10);
    }
  }
}

TEST_CASE("cholesky matches the dense oracle") {
  Rng rng(7);
  const auto a = random_spd(9, rng);
  const auto l = cholesky(a, 9);
  const auto ref = oracle::cholesky(a, 9);
  for (std::size_t i = 0; i < l.size(); ++i) CHECK(std::abs(l[i] - ref[i]) <= 1e-12);
  const std::vector<double> bad{1.0, 2.0, 2.0, 1.0};
  CHECK_THROWS_AS(cholesky(bad, 2), SingularityError);
}

TEST_CASE("add to an empty factor") {
  BorderedFactor f(false);
  f.add_index({}, 4.0);
  REQUIRE(f.size() == 1);
  CHECK(f.lower(0, 0) == doctest::Approx(2.0));
  CHECK(f.solve(0.0, std::vector<double>{3.0}).x[0] == doctest::Approx(0.75));

  BorderedFactor g(true);
  g.add_index({}, 4.0, -1.0);
  const auto s = g.solve(1.0, std::vector<double>{2.0});
  // [[0, -1], [-1, 4]] [b; a] = [1; 2]
  CHECK(s.x[0] == doctest::Approx(-1.0));
  CHECK(s.x0 == doctest::Approx(-6.0));
}

TEST_CASE("non-PD extension is rejected") {
  BorderedFactor f(false);
  f.add_index({}, 1.0);
  CHECK_THROWS_AS(f.add_index(std::vector<double>{1.0}, 1.0), SingularityError);
  CHECK(f.size() == 1);
  const std::vector<double> singular{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(BorderedFactor::factor(singular, std::vector<double>{1.0, 1.0}, false),
                  SingularityError);
}

TEST_CASE("add then remove restores the factor") {
  Rng rng(8);
  const std::size_t n = 7;
  const auto a = random_spd(n, rng);
  const auto y = random_signs(n, rng);
  std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
  BorderedFactor f = grow(a, n, y, idx, true);
  const BorderedFactor before = f;
  std::vector<double> cross(idx.size());
  for (std::size_t s = 0; s < idx.size(); ++s) cross[s] = a[6 * n + idx[s]];
  f.add_index(cross, a[6 * n + 6], y[6]);
  f.remove_index(f.size() - 1);
  CHECK(max_factor_gap(f, before) <= 1e-10);

  // Remove a middle index, then add it back at the end.
  BorderedFactor g = before;
  g.remove_index(2);
  std::vector<std::size_t> rest{0, 1, 3, 4, 5};
  std::vector<double> back(rest.size());
  for (std::size_t s = 0; s < rest.size(); ++s) back[s] = a[2 * n + rest[s]];
  g.add_index(back, a[2 * n + 2], y[2]);
  std::vector<std::size_t> order{0, 1, 3, 4, 5, 2};
  CHECK(max_factor_gap(g, BorderedFactor::factor(sub(a, n, order), gather(y, order))) <= 1e-10);
}

TEST_CASE("remove the only index") {
  BorderedFactor f(true);
  f.add_index({}, 2.0, 1.0);
  f.remove_index(0);
  CHECK(f.empty());
  CHECK(f.schur() == 0.0);
}

TEST_CASE("grow 1 to 8 and shrink 8 to 1 against from-scratch") {
  Rng rng(9);
  const std::size_t n = 8;
  const auto a = random_spd(n, rng);
  const auto y = random_signs(n, rng);
  BorderedFactor f(true);
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> cross(t);
    for (std::size_t s = 0; s < t; ++s) cross[s] = a[t * n + s];
    f.add_index(cross, a[t * n + t], y[t]);
    idx.push_back(t);
    CHECK(max_factor_gap(f, BorderedFactor::factor(sub(a, n, idx), gather(y, idx))) <= 1e-8);
  }
  while (idx.size() > 1) {
    const std::size_t pos = rng.below(idx.size());
    f.remove_index(pos);
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(pos));
    CHECK(max_factor_gap(f, BorderedFactor::factor(sub(a, n, idx), gather(y, idx))) <= 1e-8);
  }
}
