#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/tasks.hpp"

using namespace wsvm;

namespace {

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Dataset rdp_window(std::uint64_t seed, std::size_t days) {
  return normalize(rdp_features(gen_price_series(days, seed)), NormMode::signed_box).data;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> r;
  for (std::size_t i = a; i < b; ++i) r.push_back(i);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Time series

TEST_CASE("time series weights") {
  auto flat = time_series_weights(2.5, 0.0, 7);
  for (double c : flat) CHECK(c == 2.5);
  auto w = time_series_weights(1.0, 3.0, 10);
  CHECK(w[4] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[9] == doctest::Approx(2.0 / (1.0 + std::exp(-3.0))).epsilon(1e-15));
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] > w[i - 1]);
  CHECK_THROWS_AS(time_series_weights(0.0, 1.0, 5), ArgumentError);
  CHECK_THROWS_AS(time_series_weights(1.0, -1.0, 5), ArgumentError);
}

TEST_CASE("online window: nothing in, nothing out") {
  Dataset ds = rdp_window(1, 120);
  KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
  OnlineWindow w = make_online_window(ds.subset(range(0, 60)), g, 1.0, 2.0);
  const SolutionState before = w.state;
  OnlineStep s = online_window_update(w, Dataset(ds.dim(), LabelKind::binary), 0);
  CHECK(s.trace.events.size() == 1);
  CHECK(linf(w.state.alpha, before.alpha) <= 1e-12);
  CHECK(s.kkt.max() <= 1e-6);
  CHECK_THROWS_AS(online_window_update(w, Dataset(ds.dim(), LabelKind::binary), 61), ArgumentError);
}

TEST_CASE("online window loop keeps exact solutions") {
  Dataset ds = rdp_window(2, 200);
  KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
  const std::size_t width = 60, stride = 5;
  OnlineWindow w = make_online_window(ds.subset(range(0, width)), g, 1.0, 3.0);
  for (std::size_t step = 0; step < 5; ++step) {
    const std::size_t lo = width + step * stride;
    OnlineStep s = online_window_update(w, ds.subset(range(lo, lo + stride)), stride);
    CHECK(s.kkt.max() <= 1e-6);
    CHECK(w.data.size() == width);
    CHECK(s.dropped_alpha.size() == stride);
    for (double a : s.dropped_alpha) CHECK(a == 0.0);
    // The window state is its own exact solution at the schedule.
    auto k = std::make_shared<const KernelMatrix>(w.data, g);
    auto prob = DualProblem::classification(k, w.data.labels(), g.ridge);
    const auto c = time_series_weights(1.0, 3.0, width);
    CHECK(kkt_report(prob, w.state, c).max() <= 1e-6);
    CHECK(w.data.row(0)[0] == ds.row(lo + stride - width)[0]);
  }
}

// ---------------------------------------------------------------------------
// Covariate shift

TEST_CASE("covariate shift: unit ratios are an identity path") {
  Dataset ds = oracle::random_classification(30, 2, 3);
  auto k = std::make_shared<const KernelMatrix>(ds, KernelSpec{KernelKind::gaussian, 5.0, 1e-6});
  auto prob = DualProblem::classification(k, ds.labels(), 1e-6);
  std::vector<double> c(30, 2.0);
  SolutionState st = exact_solve(prob, c);
  PathTrace t = covariate_shift_path(prob, st, 2.0, std::vector<double>(30, 1.0));
  CHECK(t.events.size() == 1);
  std::vector<double> bad(30, 1.0);
  bad[3] = -0.5;
  CHECK_THROWS_AS(covariate_shift_path(prob, st, 2.0, bad), ArgumentError);
  CHECK_THROWS_AS(covariate_shift_path(prob, st, 2.0, std::vector<double>(4, 1.0)), ArgumentError);
}

TEST_CASE("covariate shift: constant ratio matches a scalar weight path") {
  Dataset ds = oracle::random_classification(40, 2, 4);
  auto k = std::make_shared<const KernelMatrix>(ds, KernelSpec{KernelKind::gaussian, 5.0, 1e-6});
  auto prob = DualProblem::classification(k, ds.labels(), 1e-6);
  std::vector<double> c(40, 1.0), c3(40, 3.0);
  SolutionState st = exact_solve(prob, c);
  PathTrace a = covariate_shift_path(prob, st, 1.0, std::vector<double>(40, 3.0));
  PathTrace b = follow_path(prob, st, c, c3);
  CHECK(a.events.size() == b.events.size());
  CHECK(linf(a.terminal.alpha, b.terminal.alpha) <= 1e-12);
  Rng rng(4);
  std::vector<double> r(40);
  for (auto& x : r) x = rng.uniform(0.0, 3.0);
  PathTrace t = covariate_shift_path(prob, st, 1.0, r);
  CHECK(kkt_report(prob, t.terminal, r).max() <= 1e-6);
}

// ---------------------------------------------------------------------------
// Heteroscedastic SVR

TEST_CASE("hetero weights") {
  auto same = hetero_weights(std::vector<double>{0.3, -0.3, 0.3}, 2.0);
  for (double c : same) CHECK(c == doctest::Approx(2.0));
  auto w = hetero_weights(std::vector<double>{1.0, 2.0}, 1.5);
  const double s = std::sqrt(2.5);
  CHECK(w[0] == doctest::Approx(1.5 * s).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(1.5 * s / 2.0).epsilon(1e-15));
  auto z = hetero_weights(std::vector<double>{0.0, 1.0, -2.0}, 1.0);
  CHECK(z[0] == 100.0);
  CHECK(z[1] < 100.0);
  auto all0 = hetero_weights(std::vector<double>{0.0, 0.0}, 0.7);
  CHECK(all0 == std::vector<double>{0.7, 0.7});
  CHECK(hetero_weights(std::vector<double>{1e-9, 1.0}, 1.0, 10.0)[0] == 10.0);
}

namespace {

HeteroResult hetero_run(std::uint64_t seed, double low, double high) {
  Dataset ds = gen_two_regime_regression(120, 2, seed, low, high);
  KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
  auto k = std::make_shared<const KernelMatrix>(ds, g);
  auto prob = DualProblem::regression(k, ds.labels(), 0.1, g.ridge);
  HeteroConfig cfg;
  cfg.epsilon = 0.1;
  return heteroscedastic_fit(prob, ds.labels(), cfg);
}

}  // namespace

TEST_CASE("hetero loop on two-regime data") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    HeteroResult r = hetero_run(seed, 0.05, 0.5);
    CHECK(r.converged);
    CHECK(r.log.size() <= 50);
    for (const auto& h : r.log) CHECK(h.kkt <= 1e-6);
    Dataset ds = gen_two_regime_regression(120, 2, seed);
    double lo = 0.0, hi = 0.0;
    std::size_t nl = 0, nh = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.row(i)[0] < 0.0) {
        lo += r.weights[i];
        ++nl;
      } else {
        hi += r.weights[i];
        ++nh;
      }
    }
    CHECK(lo / static_cast<double>(nl) > hi / static_cast<double>(nh));
  }
}

TEST_CASE("hetero loop on homoscedastic data converges within two reweights") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    HeteroResult r = hetero_run(seed, 0.2, 0.2);
    CHECK(r.converged);
    CHECK(r.log.size() <= 2);
  }
}

TEST_CASE("hetero loop is deterministic") {
  HeteroResult a = hetero_run(3, 0.05, 0.5), b = hetero_run(3, 0.05, 0.5);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].relative_change == b.log[i].relative_change);
    CHECK(a.log[i].events == b.log[i].events);
  }
  CHECK(a.weights == b.weights);
}

// ---------------------------------------------------------------------------
// Ranking

TEST_CASE("pairs and pair weights") {
  Dataset ds(1, LabelKind::graded);
  ds.push_back(std::vector<double>{0.1}, 2.0, 1);
  ds.push_back(std::vector<double>{0.2}, 1.0, 1);
  ds.push_back(std::vector<double>{0.3}, 0.0, 1);
  ds.push_back(std::vector<double>{0.4}, 1.0, 2);
  ds.push_back(std::vector<double>{0.5}, 1.0, 2);
  PairSet p = build_pairs(ds);
  CHECK(p.size() == 3);
  for (auto [i, j] : p) {
    CHECK(ds.query(i) == ds.query(j));
    CHECK(ds.label(i) > ds.label(j));
  }
  auto rel = pair_weights(ds, p, PairWeightMode::relevance, 0.01);
  auto flat = pair_weights(ds, p, PairWeightMode::flat, 0.01);
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(flat[k] == 0.01);
    const auto [i, j] = p[k];
    if (ds.label(i) == 2.0 && ds.label(j) == 0.0) CHECK(rel[k] == doctest::Approx(0.03));
    if (ds.label(i) == 1.0 && ds.label(j) == 0.0) CHECK(rel[k] == doctest::Approx(0.01));
    CHECK(rel[k] > 0.0);
  }
  CHECK(parse_pair_weight_mode("flat") == PairWeightMode::flat);
  CHECK_THROWS_AS(parse_pair_weight_mode("log"), ArgumentError);
}

TEST_CASE("rsvm path: adjacent grades give an identity path") {
  Dataset ds = gen_ranking(3, 6, 3, 1, 5);
  PairSet p = build_pairs(ds);
  REQUIRE(!p.empty());
  auto k = std::make_shared<const KernelMatrix>(ds, KernelSpec{KernelKind::gaussian, 1.0, 1e-6});
  auto prob = DualProblem::ranking(k, p, 1e-6);
  RankingRun run = rsvm_path(prob, ds, p, 0.5);
  CHECK(run.c_flat == run.c_relevance);
  CHECK(run.trace.events.size() == 1);
}

TEST_CASE("rsvm path terminal matches bias-free SMO") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Dataset ds = gen_ranking(4, 8, 3, 2, seed);
    PairSet p = build_pairs(ds);
    auto k = std::make_shared<const KernelMatrix>(ds, KernelSpec{KernelKind::gaussian, 1.0, 1e-6});
    auto prob = DualProblem::ranking(k, p, 1e-6);
    RankingRun run = rsvm_path(prob, ds, p, 0.1);
    CHECK(!run.trace.has_bias);
    SmoConfig cfg;
    SolutionState smo = smo_solve(prob, run.c_relevance, nullptr, cfg);
    CHECK(kkt_report(prob, run.trace.terminal, run.c_relevance).max() <= 1e-6);
    const auto f_path = prob.item_scores(run.trace.terminal.alpha);
    const auto f_smo = prob.item_scores(smo.alpha);
    CHECK(linf(f_path, f_smo) <= 10 * cfg.tau);
    CHECK(run.max_margin <= p.size());
  }
}

// ---------------------------------------------------------------------------
// Transductive SVM

TEST_CASE("tsvm positive quota and round bound") {
  CHECK(tsvm_positive_quota(50, 40, 100) == 20);
  CHECK(tsvm_positive_quota(0, 40, 100) == 0);
  CHECK(tsvm_positive_quota(3, 1, 2) == 2);
  CHECK_THROWS_AS(tsvm_positive_quota(5, 0, 0), ArgumentError);
  CHECK(tsvm_round_bound(1.0, 1e-5, 1e-5) == 18);
  CHECK(tsvm_round_bound(1.0, 0.25, 0.5) == 3);
  CHECK(tsvm_round_bound(1.0, 1.0, 1.0) == 1);
}

namespace {

struct Semi {
  Dataset labeled, unlabeled;
};

Semi semi_instance(std::uint64_t seed, std::size_t nl, std::size_t nu) {
  ToyData toy = gen_toy_classification(4 * ((nl + nu + 3) / 4), seed);
  Dataset all = normalize(toy.data, NormMode::unit_box).data;
  Rng rng(seed);
  std::vector<std::size_t> perm(all.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::size_t> l(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nl));
  std::vector<std::size_t> u(perm.begin() + static_cast<std::ptrdiff_t>(nl),
                             perm.begin() + static_cast<std::ptrdiff_t>(nl + nu));
  return {all.subset(l), all.subset(u)};
}

}  // namespace

TEST_CASE("tsvm with no unlabeled data is a weighted SVM") {
  Semi s = semi_instance(1, 40, 0);
  KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
  TsvmConfig cfg;
  cfg.c = 2.0;
  TsvmResult r = tsvm_train(s.labeled, Dataset(2, LabelKind::binary), g, cfg);
  CHECK(r.labels.empty());
  CHECK(r.rounds == 0);
  auto k = std::make_shared<const KernelMatrix>(s.labeled, g);
  auto prob = DualProblem::classification(k, s.labeled.labels(), g.ridge);
  std::vector<double> c(40, 2.0);
  CHECK(kkt_report(prob, r.state, c).max() <= 1e-6);
}

TEST_CASE("tsvm objective decreases across accepted switches") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Semi s = semi_instance(seed, 20, 40);
    KernelSpec g{KernelKind::gaussian, 1.0, 1e-6};
    TsvmConfig cfg;
    cfg.c = 1.0;
    cfg.c_star = 0.5;
    TsvmResult r = tsvm_train(s.labeled, s.unlabeled, g, cfg);
    std::size_t pos = 0;
    for (double y : s.labeled.labels()) pos += y > 0;
    CHECK(r.positive_quota == tsvm_positive_quota(40, pos, 20));
    std::size_t assigned = 0;
    for (double y : r.labels) assigned += y > 0;
    CHECK(assigned == r.positive_quota);
    CHECK(r.rounds <= tsvm_round_bound(cfg.c_star, r.c_neg0, r.c_pos0));
    double last = 0.0;
    std::size_t round = 0;
    for (const auto& e : r.log) {
      if (e.what == "round") {
        round = e.round;
        last = e.objective;
      } else if (e.what == "switch") {
        CHECK(e.round == round);
        CHECK(e.objective < last);
        last = e.objective;
      }
    }
  }
}
