#include "wsvm/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace wsvm {

std::vector<double> time_series_weights(double c0, double a, std::size_t n) {
  if (!(c0 > 0.0)) throw ArgumentError("time_series_weights: C0 must be positive");
  if (!(a >= 0.0)) throw ArgumentError("time_series_weights: a must be nonnegative");
  std::vector<double> c(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double e = a - 2.0 * a * static_cast<double>(i) / static_cast<double>(n);
    c[i - 1] = c0 * 2.0 / (1.0 + std::exp(e));
  }
  return c;
}

namespace {

std::shared_ptr<const KernelMatrix> make_kernel(const Dataset& ds, const KernelSpec& spec) {
  return std::make_shared<const KernelMatrix>(ds, spec);
}

SolutionState solve_at(const DualProblem& prob, std::span<const double> c,
                       const PathOptions& opt) {
  SolutionState approx = smo_solve(prob, c);
  return exact_solve(prob, c, &approx, opt);
}

}  // namespace

OnlineWindow make_online_window(const Dataset& data, const KernelSpec& kernel, double c0,
                                double a, const PathOptions& opt) {
  data.validate();
  OnlineWindow w;
  w.data = data;
  w.kernel = kernel;
  w.c0 = c0;
  w.a = a;
  const auto prob = DualProblem::classification(make_kernel(data, kernel), data.labels(),
                                                kernel.ridge);
  const auto c = time_series_weights(c0, a, data.size());
  w.state = solve_at(prob, c, opt);
  return w;
}

OnlineStep online_window_update(OnlineWindow& w, const Dataset& incoming, std::size_t drop,
                                const PathOptions& opt) {
  const std::size_t n = w.data.size(), m = incoming.size();
  if (drop > n) throw ArgumentError("online_window_update: cannot drop more than the window");
  if (m > 0 && incoming.dim() != w.data.dim())
    throw ArgumentError("online_window_update: incoming dimension differs from the window");
  Dataset stacked = w.data;
  for (std::size_t i = 0; i < m; ++i) stacked.push_back(incoming.row(i), incoming.label(i));
  const std::size_t total = n + m;
  const auto prob = DualProblem::classification(make_kernel(stacked, w.kernel), stacked.labels(),
                                                w.kernel.ridge);

  std::vector<double> c_old = time_series_weights(w.c0, w.a, n);
  c_old.resize(total, 0.0);
  std::vector<double> c_new(drop, 0.0);
  const auto kept = time_series_weights(w.c0, w.a, total - drop);
  c_new.insert(c_new.end(), kept.begin(), kept.end());

  SolutionState start;
  start.alpha = w.state.alpha;
  start.alpha.resize(total, 0.0);
  start.b = w.state.b;
  start.sets = w.state.sets;
  start.sets.resize(total, SetKind::O);
  refresh_margins(prob, start);

  OnlineStep step;
  step.trace = follow_path(prob, start, c_old, c_new, opt);
  const SolutionState& t = step.trace.terminal;
  step.kkt = kkt_report(prob, t, c_new);
  step.dropped_alpha.assign(t.alpha.begin(), t.alpha.begin() + static_cast<std::ptrdiff_t>(drop));

  std::vector<std::size_t> rows(total - drop);
  std::iota(rows.begin(), rows.end(), drop);
  w.data = stacked.subset(rows);
  SolutionState next;
  next.b = t.b;
  for (std::size_t r : rows) {
    next.alpha.push_back(t.alpha[r]);
    next.sets.push_back(t.sets[r]);
    next.margin.push_back(t.margin[r]);
  }
  w.state = std::move(next);
  return step;
}

PathTrace covariate_shift_path(const DualProblem& prob, const SolutionState& start, double c0,
                               std::span<const double> ratios, const PathOptions& opt) {
  if (!(c0 > 0.0)) throw ArgumentError("covariate_shift_path: C0 must be positive");
  if (ratios.size() != prob.instances())
    throw ArgumentError("covariate_shift_path: one importance ratio per instance is required");
  std::vector<double> a(ratios.size(), c0), b(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] >= 0.0) || !std::isfinite(ratios[i]))
      throw ArgumentError("covariate_shift_path: importance ratios must be nonnegative");
    b[i] = c0 * ratios[i];
  }
  return follow_path(prob, start, expand_weights(prob, a), expand_weights(prob, b), opt);
}

std::vector<double> hetero_weights(std::span<const double> e, double c0, double cap) {
  if (!(c0 > 0.0)) throw ArgumentError("hetero_weights: C0 must be positive");
  if (!(cap >= 1.0)) throw ArgumentError("hetero_weights: cap must be at least 1");
  std::vector<double> c(e.size(), c0);
  double ss = 0.0;
  for (double x : e) ss += x * x;
  if (e.empty() || ss == 0.0) return c;
  const double sigma = std::sqrt(ss / static_cast<double>(e.size()));
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double ae = std::abs(e[i]);
    c[i] = ae > 0.0 ? std::min(c0 * sigma / ae, cap * c0) : cap * c0;
  }
  return c;
}

HeteroResult heteroscedastic_fit(const DualProblem& prob, std::span<const double> targets,
                                 const HeteroConfig& cfg) {
  if (prob.kind() != ProblemKind::regression)
    throw ArgumentError("heteroscedastic_fit needs a regression problem");
  const std::size_t n = prob.instances();
  HeteroResult res;
  res.weights.assign(n, cfg.c0);
  SmoConfig smo;
  SolutionState approx = smo_solve(prob, expand_weights(prob, res.weights), nullptr, smo);
  res.raw = exact_solve(prob, expand_weights(prob, res.weights), &approx, cfg.path);
  res.state = to_svr_state(prob, res.raw, targets, res.weights);

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const std::vector<double> e_old = res.state.residual;
    std::vector<double> c_new = hetero_weights(e_old, cfg.c0, cfg.cap);
    PathTrace t = svr_follow_path(prob, res.raw, res.weights, c_new, cfg.path);
    res.raw = std::move(t.terminal);
    res.weights = std::move(c_new);
    res.state = to_svr_state(prob, res.raw, targets, res.weights);

    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(e_old[i]) < 1e-12) continue;
      sum += std::abs((e_old[i] - res.state.residual[i]) / e_old[i]);
      ++used;
    }
    HeteroIteration h;
    h.iteration = it;
    h.relative_change = used ? sum / static_cast<double>(used) : 0.0;
    h.events = t.breakpoints();
    h.kkt = svr_kkt_report(prob, res.raw, res.weights).max();
    res.log.push_back(h);
    if (h.relative_change <= cfg.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Ranking

PairSet build_pairs(const Dataset& ds) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.size(); ++i) groups[ds.query(i)].push_back(i);
  PairSet pairs;
  for (const auto& [q, idx] : groups) {
    for (std::size_t i : idx) {
      for (std::size_t j : idx) {
        if (ds.label(i) > ds.label(j)) pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

PairWeightMode parse_pair_weight_mode(const std::string& s) {
  if (s == "flat") return PairWeightMode::flat;
  if (s == "relevance") return PairWeightMode::relevance;
  throw ArgumentError("unknown pair weight mode '" + s + "' (flat or relevance)");
}

std::vector<double> pair_weights(const Dataset& ds, const PairSet& pairs, PairWeightMode mode,
                                 double c0) {
  if (!(c0 > 0.0)) throw ArgumentError("pair_weights: C0 must be positive");
  std::vector<double> c(pairs.size(), c0);
  if (mode == PairWeightMode::relevance) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      c[k] = (std::exp2(ds.label(i)) - std::exp2(ds.label(j))) * c0;
    }
  }
  return c;
}

RankingRun rsvm_path(const DualProblem& prob, const Dataset& ds, const PairSet& pairs, double c0,
                     const PathOptions& opt) {
  if (prob.kind() != ProblemKind::ranking) throw ArgumentError("rsvm_path needs a ranking problem");
  if (prob.size() != pairs.size()) throw ArgumentError("rsvm_path: pair count mismatch");
  RankingRun run;
  run.pairs = pairs;
  run.c_flat = pair_weights(ds, pairs, PairWeightMode::flat, c0);
  run.c_relevance = pair_weights(ds, pairs, PairWeightMode::relevance, c0);
  const SolutionState start = solve_at(prob, run.c_flat, opt);
  run.trace = follow_path(prob, start, run.c_flat, run.c_relevance, opt);
  for (const auto& e : run.trace.events) run.max_margin = std::max(run.max_margin, e.m);
  return run;
}

// ---------------------------------------------------------------------------
// Transductive SVM

std::size_t tsvm_positive_quota(std::size_t k, std::size_t positives, std::size_t labeled) {
  if (labeled == 0) throw ArgumentError("tsvm: no labeled instances");
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(k) * static_cast<double>(positives) /
                   static_cast<double>(labeled)));
}

std::size_t tsvm_round_bound(double c_star, double c_neg0, double c_pos0) {
  const double lo = std::min(c_neg0, c_pos0);
  if (!(lo > 0.0) || lo >= c_star) return 1;
  return static_cast<std::size_t>(std::ceil(std::log2(c_star / lo) - 1e-12)) + 1;
}

double weighted_primal_objective(const DualProblem& prob, const SolutionState& st,
                                 std::span<const double> c) {
  const std::vector<double> qa = prob.q_times(st.alpha);
  double ww = 0.0, loss = 0.0;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    ww += st.alpha[v] * (qa[v] - prob.ridge() * st.alpha[v]);
    const double yf = qa[v] - prob.ridge() * st.alpha[v] + prob.y(v) * st.b;
    loss += c[v] * std::max(0.0, 1.0 - yf);
  }
  return 0.5 * ww + loss;
}

TsvmResult tsvm_train(const Dataset& labeled, const Dataset& unlabeled, const KernelSpec& kernel,
                      const TsvmConfig& cfg) {
  labeled.validate();
  if (!(cfg.c > 0.0) || !(cfg.c_star > 0.0)) throw ArgumentError("tsvm: weights must be positive");
  if (!(cfg.init_scale > 0.0 && cfg.init_scale <= 1.0))
    throw ArgumentError("tsvm: init_scale must lie in (0, 1]");
  const std::size_t n = labeled.size(), k = unlabeled.size();
  if (k > 0 && unlabeled.dim() != labeled.dim())
    throw ArgumentError("tsvm: unlabeled dimension differs from labeled data");

  Dataset all = labeled;
  for (std::size_t u = 0; u < k; ++u) all.push_back(unlabeled.row(u), 1.0);
  TsvmResult res;
  res.problem = std::make_shared<DualProblem>(
      DualProblem::classification(make_kernel(all, kernel), all.labels(), kernel.ridge));
  DualProblem& prob = *res.problem;

  std::vector<double> c(n + k, 0.0);
  std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n), cfg.c);
  SolutionState st = solve_at(prob, c, cfg.path);
  if (k == 0) {
    res.state = std::move(st);
    return res;
  }

  std::size_t positives = 0;
  for (double y : labeled.labels()) positives += y > 0;
  res.positive_quota = tsvm_positive_quota(k, positives, n);
  const std::size_t kp = res.positive_quota;

  double c_neg = cfg.init_scale * cfg.c_star;
  const double ratio = (kp == 0 || kp == k)
                           ? 1.0
                           : static_cast<double>(kp) / static_cast<double>(k - kp);
  double c_pos = std::min(c_neg * ratio, cfg.c_star);
  res.c_neg0 = c_neg;
  res.c_pos0 = c_pos;

  // Step 2: top-k⁺ decision values become positive.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return st.margin[n + x] > st.margin[n + y];
  });
  res.labels.assign(k, 1.0);
  for (std::size_t r = kp; r < k; ++r) {
    res.labels[order[r]] = -1.0;
    prob.flip_label(n + order[r]);
  }
  refresh_margins(prob, st);
  classify_sets(prob, st, c);

  auto unlabeled_weights = [&](std::vector<double>& w) {
    for (std::size_t u = 0; u < k; ++u) w[n + u] = res.labels[u] > 0 ? c_pos : c_neg;
  };
  std::vector<double> target = c;
  unlabeled_weights(target);
  st = follow_path(prob, st, c, target, cfg.path).terminal;
  c = target;

  const std::size_t max_switches = cfg.max_switches ? cfg.max_switches : 10 * k;
  for (;;) {
    ++res.rounds;
    double obj = weighted_primal_objective(prob, st, c);
    res.log.push_back({res.rounds, "round", c_neg, c_pos, obj, -1, -1});
    std::set<std::pair<std::size_t, std::size_t>> skipped;

    for (std::size_t s = 0; s < max_switches; ++s) {
      const std::vector<double> qa = prob.q_times(st.alpha);
      std::vector<double> xi(k);
      for (std::size_t u = 0; u < k; ++u) {
        const std::size_t v = n + u;
        xi[u] = std::max(0.0, 1.0 - (qa[v] - prob.ridge() * st.alpha[v] + prob.y(v) * st.b));
      }
      double best = 2.0;
      Index bp = -1, bn = -1;
      for (std::size_t i = 0; i < k; ++i) {
        if (res.labels[i] < 0 || xi[i] <= 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) {
          if (res.labels[j] > 0 || xi[j] <= 0.0) continue;
          if (xi[i] + xi[j] > best && !skipped.count({i, j})) {
            best = xi[i] + xi[j];
            bp = static_cast<Index>(i);
            bn = static_cast<Index>(j);
          }
        }
      }
      if (bp < 0) break;
      const auto i = static_cast<std::size_t>(bp), j = static_cast<std::size_t>(bn);

      const DualProblem saved_prob = prob;
      const SolutionState saved_state = st;
      try {
        std::vector<double> c1 = c;
        c1[n + i] = 0.0;
        c1[n + j] = 0.0;
        SolutionState mid = follow_path(prob, st, c, c1, cfg.path).terminal;
        mid.alpha[n + i] = 0.0;
        mid.alpha[n + j] = 0.0;
        prob.flip_label(n + i);
        prob.flip_label(n + j);
        refresh_margins(prob, mid);
        classify_sets(prob, mid, c1);
        std::vector<double> c2 = c1;
        c2[n + i] = c_neg;
        c2[n + j] = c_pos;
        SolutionState next = follow_path(prob, mid, c1, c2, cfg.path).terminal;
        const double nobj = weighted_primal_objective(prob, next, c2);
        if (nobj < obj) {
          st = std::move(next);
          c = std::move(c2);
          obj = nobj;
          res.labels[i] = -1.0;
          res.labels[j] = 1.0;
          ++res.switches;
          res.log.push_back({res.rounds, "switch", c_neg, c_pos, obj, bp, bn});
        } else {
          prob = saved_prob;
          st = saved_state;
          skipped.insert({i, j});
          ++res.rejected;
          res.log.push_back({res.rounds, "rejected", c_neg, c_pos, nobj, bp, bn});
        }
      } catch (const std::runtime_error&) {
        prob = saved_prob;
        st = saved_state;
        skipped.insert({i, j});
        ++res.path_failures;
      }
    }

    if (c_neg >= cfg.c_star && c_pos >= cfg.c_star) break;
    c_neg = std::min(2.0 * c_neg, cfg.c_star);
    c_pos = std::min(2.0 * c_pos, cfg.c_star);
    target = c;
    unlabeled_weights(target);
    st = follow_path(prob, st, c, target, cfg.path).terminal;
    c = target;
  }
  res.state = std::move(st);
  return res;
}

}  // namespace wsvm
