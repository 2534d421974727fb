#include "wsvm/experiments.hpp"

#include <algorithm>
#include <chrono>

namespace wsvm {

ToyExperiment make_toy_experiment(std::size_t n, std::uint64_t seed, const KernelSpec& kernel,
                                  double c1_from, double c1_to, double c2) {
  ToyData raw = gen_toy_classification(n, seed);
  Normalized nd = normalize(raw.data, NormMode::unit_box);
  ToyExperiment t;
  t.train = std::move(nd.data);
  t.norm = std::move(nd.spec);
  t.cost_group = std::move(raw.cost_group);
  t.kernel = std::make_shared<const KernelMatrix>(t.train, kernel);
  t.problem = std::make_shared<DualProblem>(
      DualProblem::classification(t.kernel, t.train.labels(), kernel.ridge));
  t.c1_from = c1_from;
  t.c1_to = c1_to;
  t.c_old.resize(n);
  t.c_new.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool d1 = t.cost_group[i] == 1;
    t.c_old[i] = d1 ? c1_from : c2;
    t.c_new[i] = d1 ? c1_to : c2;
  }
  return t;
}

ToyValidation make_toy_validation(const ToyExperiment& toy, std::size_t n, std::uint64_t seed) {
  ToyData raw = gen_toy_classification(n, seed);
  ToyValidation v;
  v.data = toy.norm.apply(raw.data);
  v.costs.reserve(n);
  for (int g : raw.cost_group) v.costs.push_back(static_cast<double>(g));
  return v;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

BenchReport bench_path_vs_smo(const DualProblem& prob, const SolutionState& start,
                              std::span<const double> c_old, std::span<const double> c_new,
                              const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  const std::size_t reps = std::max<std::size_t>(opt.reps, 1);
  BenchReport r;
  const SolutionState exact = exact_solve(prob, c_old, &start, opt.path);

  std::vector<double> thetas;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (opt.clear_cache) prob.kernel().clear_cache();
    const auto t0 = clock::now();
    PathFollower pf(prob, exact, c_old, c_new, opt.path);
    PathTrace tr = pf.run();
    r.path_runs.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    if (rep == 0) {
      r.events = tr.breakpoints();
      r.mean_margin = tr.mean_margin_size();
      for (const auto& e : tr.events)
        if (e.kind != EventKind::completion) thetas.push_back(e.theta);
    }
  }
  if (opt.grid > 0) {
    thetas.clear();
    for (std::size_t g = 1; g <= opt.grid; ++g)
      thetas.push_back(static_cast<double>(g) / static_cast<double>(opt.grid));
  }

  const std::size_t n = c_old.size();
  std::vector<double> c(n);
  for (std::size_t rep = 0; opt.run_smo && rep < reps; ++rep) {
    if (opt.clear_cache) prob.kernel().clear_cache();
    SolutionState warm = exact;
    std::size_t failures = 0;
    const auto t0 = clock::now();
    for (double th : thetas) {
      for (std::size_t v = 0; v < n; ++v) c[v] = c_old[v] + th * (c_new[v] - c_old[v]);
      try {
        warm = smo_solve(prob, c, &warm, opt.smo);
      } catch (const ConvergenceError& e) {
        warm = e.best();
        ++failures;
      }
    }
    r.smo_runs.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    r.smo_failures = failures;
  }
  r.smo_solves = opt.run_smo ? thetas.size() : 0;
  r.path_seconds = median(r.path_runs);
  r.smo_seconds = median(r.smo_runs);
  return r;
}

}  // namespace wsvm
