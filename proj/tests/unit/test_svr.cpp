#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/svr.hpp"

using namespace wsvm;

namespace {

struct Reg {
  Dataset data;
  std::shared_ptr<const KernelMatrix> kernel;
  std::shared_ptr<DualProblem> prob;
};

Reg make_reg(const Dataset& ds, KernelSpec g, double eps) {
  Reg r{ds, std::make_shared<const KernelMatrix>(ds, g), nullptr};
  r.prob = std::make_shared<DualProblem>(
      DualProblem::regression(r.kernel, r.data.labels(), eps, g.ridge));
  return r;
}

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("affine solution with a single E point") {
  Dataset ds(1, LabelKind::real);
  ds.push_back(std::vector<double>{0.0}, 0.7);
  KernelMatrix k(ds, {KernelKind::gaussian, 1.0, 0.0});
  SvrState st;
  st.sets = {SvrSet::E};
  st.sign = {1};
  std::vector<double> c{1.0};
  SvrAffine a = svr_affine_solution(k, ds.labels(), 0.1, 0.0, st, c);
  CHECK(std::abs(a.alpha_e[0]) <= 1e-15);
  CHECK(a.b == doctest::Approx(0.6));
  st.sign = {-1};
  CHECK(svr_affine_solution(k, ds.labels(), 0.1, 0.0, st, c).b == doctest::Approx(0.8));
}

TEST_CASE("O points with zero weight do not matter") {
  Dataset ds = oracle::random_regression(6, 1, 3);
  KernelMatrix k(ds, {KernelKind::gaussian, 2.0, 0.0});
  SvrState st;
  st.sets = {SvrSet::E, SvrSet::E, SvrSet::O, SvrSet::I, SvrSet::O, SvrSet::E};
  st.sign = {1, -1, 1, 1, -1, 1};
  std::vector<double> c{1, 1, 0, 1, 0, 1};
  SvrAffine a = svr_affine_solution(k, ds.labels(), 0.1, 1e-6, st, c);
  st.sign[2] = -1;
  st.sets[4] = SvrSet::I;
  SvrAffine b = svr_affine_solution(k, ds.labels(), 0.1, 1e-6, st, c);
  CHECK(a.b == doctest::Approx(b.b).epsilon(1e-14));
  CHECK(linf(a.alpha_e, b.alpha_e) <= 1e-14);
  st.sets = {SvrSet::O, SvrSet::O, SvrSet::O, SvrSet::I, SvrSet::O, SvrSet::I};
  CHECK_THROWS_AS(svr_affine_solution(k, ds.labels(), 0.1, 1e-6, st, c), ArgumentError);
}

TEST_CASE("baseline agrees with the dense QP oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Reg r = make_reg(oracle::random_regression(seed % 2 ? 8 : 10, 2, seed),
                     {KernelKind::gaussian, 3.0, 1e-6}, 0.1);
    const std::size_t n = r.data.size();
    Rng rng(seed);
    auto c = oracle::random_weights(n, 0.2, 3.0, 0.1, rng);
    SmoConfig cfg;
    cfg.tau = 1e-10;
    SvrState st = svr_baseline_solve(*r.prob, r.data.labels(), c, nullptr, cfg);
    auto ref = oracle::dense_qp(*r.prob, expand_weights(*r.prob, c));
    CHECK(linf(st.alpha, r.prob->combine(ref.alpha)) <= 1e-5);
    CHECK(std::abs(st.alpha_sum()) <= 1e-9);
  }
}

TEST_CASE("path terminal agrees with the dense QP oracle") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Reg r = make_reg(oracle::random_regression(8, 2, seed), {KernelKind::gaussian, 3.0, 1e-6}, 0.1);
    Rng rng(seed + 50);
    auto c0 = oracle::random_weights(8, 0.2, 3.0, 0.0, rng);
    auto c1 = oracle::random_weights(8, 0.2, 3.0, 0.2, rng);
    SolutionState raw;
    svr_baseline_solve(*r.prob, r.data.labels(), c0, nullptr, {}, &raw);
    PathTrace t = svr_follow_path(*r.prob, raw, c0, c1);
    auto ref = oracle::dense_qp(*r.prob, expand_weights(*r.prob, c1));
    CHECK(linf(r.prob->combine(t.terminal.alpha), r.prob->combine(ref.alpha)) <= 1e-5);
    CHECK(svr_kkt_report(*r.prob, t.terminal, c1).max() <= 1e-6);
  }
}

TEST_CASE("zero weights give alpha = 0 and the median bias") {
  Dataset ds(1, LabelKind::real);
  for (double y : {3.0, -1.0, 0.5, 8.0, 2.0}) ds.push_back(std::vector<double>{y / 10}, y);
  Reg r = make_reg(ds, {KernelKind::gaussian, 1.0, 1e-6}, 0.1);
  std::vector<double> c(5, 0.0);
  SvrState st = svr_baseline_solve(*r.prob, ds.labels(), c);
  for (double a : st.alpha) CHECK(a == 0.0);
  CHECK(st.b == doctest::Approx(2.0));
}

TEST_CASE("mirrored targets give the mean as bias") {
  Dataset ds(1, LabelKind::real);
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) ds.push_back(std::vector<double>{x}, 1.0 + x);
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) ds.push_back(std::vector<double>{x}, 1.0 - x);
  Reg r = make_reg(ds, {KernelKind::gaussian, 1.0, 1e-6}, 0.05);
  std::vector<double> c(10, 0.5);
  SmoConfig cfg;
  cfg.tau = 1e-9;
  SvrState st = svr_baseline_solve(*r.prob, ds.labels(), c, nullptr, cfg);
  CHECK(st.b == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("five points on a line, weights doubled") {
  Dataset ds(1, LabelKind::real);
  const double ys[5] = {0.1, 0.5, 0.2, 0.9, 0.4};
  for (int i = 0; i < 5; ++i) ds.push_back(std::vector<double>{0.25 * i}, ys[i]);
  Reg r = make_reg(ds, {KernelKind::gaussian, 1.0, 1e-6}, 0.05);
  std::vector<double> c0(5, 1.0), c1(5, 2.0);
  SolutionState raw;
  svr_baseline_solve(*r.prob, ds.labels(), c0, nullptr, {}, &raw);
  PathTrace t = svr_follow_path(*r.prob, raw, c0, c1);
  SmoConfig cfg;
  SolutionState fresh;
  svr_baseline_solve(*r.prob, ds.labels(), c1, nullptr, cfg, &fresh);
  const auto grid = [] {
    Dataset g(1, LabelKind::real);
    for (int i = 0; i <= 20; ++i) g.push_back(std::vector<double>{0.05 * i}, 0.0);
    return g;
  }();
  const auto fp = decision_values(*r.prob, t.terminal.alpha, t.terminal.b, grid);
  const auto fs = decision_values(*r.prob, fresh.alpha, fresh.b, grid);
  CHECK(linf(fp, fs) <= 10 * cfg.tau);
}

TEST_CASE("sum of alpha stays zero along the path") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Reg r =
        make_reg(oracle::random_regression(30, 2, seed), {KernelKind::gaussian, 3.0, 1e-6}, 0.1);
    std::vector<double> c0(30, 0.5), c1(30);
    for (std::size_t i = 0; i < 30; ++i) c1[i] = 0.1 + 0.2 * static_cast<double>(i % 7);
    SolutionState raw;
    svr_baseline_solve(*r.prob, r.data.labels(), c0, nullptr, {}, &raw);
    PathTrace t = svr_follow_path(*r.prob, raw, c0, c1);
    for (const auto& s : t.segments) {
      for (double th : {s.theta0, 0.5 * (s.theta0 + s.theta1)}) {
        const auto a = r.prob->combine(t.alpha_at(th));
        double sum = 0.0;
        for (double x : a) sum += x;
        CHECK(std::abs(sum) <= 1e-9);
      }
    }
    SvrState end = to_svr_state(*r.prob, t.terminal, r.data.labels(), c1);
    CHECK(std::abs(end.alpha_sum()) <= 1e-9);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(std::abs(end.alpha[i]) <= c1[i] + 1e-12);
      // The diagonal ridge widens the tube by ridge·|α| on E.
      if (end.sets[i] == SvrSet::E)
        CHECK(std::abs(std::abs(end.residual[i]) - 0.1) <= 1e-6 * std::abs(end.alpha[i]) + 1e-9);
      if (end.sets[i] == SvrSet::I) CHECK(std::abs(end.residual[i]) <= 0.1 + 1e-6);
      if (end.sets[i] == SvrSet::O) CHECK(std::abs(end.residual[i]) >= 0.1 - 1e-6);
    }
  }
}

TEST_CASE("svr identity path and trace csv") {
  Reg r = make_reg(oracle::random_regression(10, 1, 4), {KernelKind::gaussian, 1.0, 1e-6}, 0.1);
  std::vector<double> c(10, 1.0);
  SolutionState raw;
  svr_baseline_solve(*r.prob, r.data.labels(), c, nullptr, {}, &raw);
  PathTrace t = svr_follow_path(*r.prob, raw, c, c);
  CHECK(t.events.size() == 1);
  std::ostringstream out;
  write_svr_trace_csv(out, t, 10);
  CHECK(out.str().rfind("event_ordinal,theta,kind,index,sign,", 0) == 0);

  Dataset cls = oracle::random_classification(6, 2, 1);
  auto k = std::make_shared<const KernelMatrix>(cls, KernelSpec{});
  auto p = DualProblem::classification(k, cls.labels(), 1e-6);
  CHECK_THROWS_AS(svr_baseline_solve(p, cls.labels(), c), ArgumentError);
}

TEST_CASE("svr path from all-zero weights") {
  Reg r = make_reg(oracle::random_regression(12, 2, 9), {KernelKind::gaussian, 3.0, 1e-6}, 0.1);
  std::vector<double> zero(12, 0.0), c(12, 1.0);
  SolutionState raw;
  svr_baseline_solve(*r.prob, r.data.labels(), zero, nullptr, {}, &raw);
  PathTrace t = svr_follow_path(*r.prob, raw, zero, c);
  auto ref = oracle::dense_qp(*r.prob, expand_weights(*r.prob, c));
  CHECK(linf(r.prob->combine(t.terminal.alpha), r.prob->combine(ref.alpha)) <= 1e-5);
}
