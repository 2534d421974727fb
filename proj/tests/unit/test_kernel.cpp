#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "wsvm/kernel.hpp"

using namespace wsvm;

TEST_CASE("gaussian kernel values") {
  KernelSpec g;
  const std::vector<double> x{0.0, 0.0}, z{1.0, 1.0}, w{0.3, -2.0};
  CHECK(kernel_eval(g, x, x) == 1.0);
  CHECK(kernel_eval(g, w, w) == 1.0);
  CHECK(kernel_eval(g, x, z) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  g.gamma = 0.0;
  CHECK(kernel_eval(g, x, z) == 1.0);
  CHECK(kernel_eval(g, w, z) == 1.0);
  g.gamma = 4.0;
  const double v = kernel_eval(g, w, z);
  CHECK(v > 0.0);
  CHECK(v <= 1.0);
}

TEST_CASE("linear kernel and dimension mismatch") {
  KernelSpec l{KernelKind::linear, 1.0, 0.0};
  CHECK(kernel_eval(l, std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) == 32.0);
  CHECK_THROWS_AS(kernel_eval(l, std::vector<double>{1, 2}, std::vector<double>{1}),
                  ArgumentError);
  CHECK(parse_kernel_kind("linear") == KernelKind::linear);
  CHECK(to_string(parse_kernel_kind("gaussian")) == "gaussian");
  CHECK_THROWS_AS(parse_kernel_kind("poly"), ArgumentError);
  KernelSpec bad;
  bad.gamma = -1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("signed Q entries") {
  Dataset ds(1, LabelKind::binary);
  ds.push_back(std::vector<double>{0.0}, 1.0);
  ds.push_back(std::vector<double>{0.0}, -1.0);
  ds.push_back(std::vector<double>{1.0}, -1.0);
  KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
  QMatrix q = build_q(ds, g, true);
  CHECK(q(0, 0) == doctest::Approx(1.0 + 1e-6).epsilon(1e-15));
  CHECK(q(0, 1) == doctest::Approx(-1.0));
  CHECK(q(1, 2) == doctest::Approx(std::exp(-1.0)));
  CHECK(q(0, 2) == doctest::Approx(-std::exp(-1.0)));

  // K = 0.5 between a positive and a negative point.
  Dataset two(1, LabelKind::binary);
  two.push_back(std::vector<double>{0.0}, 1.0);
  two.push_back(std::vector<double>{std::sqrt(std::log(2.0))}, -1.0);
  QMatrix q2 = build_q(two, g, true);
  CHECK(q2(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("unsigned Q ignores labels") {
  ToyData a = gen_toy_classification(20, 3);
  Dataset b = a.data;
  for (std::size_t i = 0; i < b.size(); ++i) b.set_label(i, -b.label(i));
  KernelSpec g;
  CHECK(build_q(a.data, g, false).dense() == build_q(b, g, false).dense());
  CHECK(build_q(a.data, g, true).dense() != build_q(b, g, false).dense());
}

TEST_CASE("signed Q is D K D plus ridge") {
  Dataset ds = oracle::random_classification(15, 3, 8);
  KernelSpec g{KernelKind::gaussian, 2.0, 1e-4};
  const auto n = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      K(i, j) = kernel_eval(g, ds.row(static_cast<std::size_t>(i)),
                            ds.row(static_cast<std::size_t>(j)));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = ds.label(static_cast<std::size_t>(i));
  Eigen::MatrixXd expect = y.asDiagonal() * K * y.asDiagonal();
  expect.diagonal().array() += 1e-4;
  const auto q = build_q(ds, g, true).dense();
  double err = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      err = std::max(err, std::abs(q[static_cast<std::size_t>(i * n + j)] - expect(i, j)));
  CHECK(err <= 1e-15);
}

TEST_CASE("gaussian Gram matrix is positive semidefinite") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset ds = oracle::random_classification(30, 2, seed);
    KernelSpec g{KernelKind::gaussian, 10.0, 0.0};
    const auto q = build_q(ds, g, true).dense();
    const auto n = static_cast<Eigen::Index>(ds.size());
    Eigen::MatrixXd M = Eigen::Map<const Eigen::MatrixXd>(q.data(), n, n);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("on-demand rows match the full matrix") {
  Dataset ds = oracle::random_classification(60, 4, 2);
  KernelSpec g{KernelKind::gaussian, 3.0, 0.0};
  KernelMatrix full(ds, g);
  KernelMatrix lazy(ds, g, 0, 5);
  REQUIRE(full.is_full());
  REQUIRE(!lazy.is_full());
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < ds.size(); i += 7) {
      KernelRow a = full.row(i), b = lazy.row(i);
      for (std::size_t j = 0; j < ds.size(); ++j) {
        CHECK(a[j] == b[j]);
        CHECK(lazy(i, j) == full(i, j));
      }
    }
  }
  const std::size_t misses = lazy.cache_misses();
  CHECK(misses > 0);
  KernelRow keep = lazy.row(1);
  lazy.clear_cache();
  for (std::size_t i = 10; i < 30; ++i) lazy.row(i);
  CHECK(keep[3] == full(1, 3));
  CHECK(lazy.cache_misses() > misses);
}

TEST_CASE("cross row") {
  Dataset ds = oracle::random_classification(10, 3, 4);
  KernelSpec g{KernelKind::gaussian, 1.5, 0.0};
  KernelMatrix k(ds, g);
  const std::vector<double> z{0.1, 0.7, 0.4};
  std::vector<double> out(ds.size());
  k.cross_row(z, out);
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(out[i] == doctest::Approx(kernel_eval(g, z, ds.row(i))).epsilon(1e-15));
}
