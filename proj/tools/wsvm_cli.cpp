// wsvm: weighted SVM solution paths from the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsvm/config.hpp"
#include "wsvm/experiments.hpp"
#include "wsvm/select.hpp"
#include "wsvm/svr.hpp"
#include "wsvm/tasks.hpp"

using namespace wsvm;
using nlohmann::json;

namespace {

enum Exit { ok = 0, io = 1, usage = 2, parse = 3, solver = 4, path = 5 };

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write '" + file + "'");
  return out;
}

void save_weights(const std::string& file, std::span<const double> w) {
  std::ofstream out = open_out(file);
  write_weights_csv(out, w);
}

std::string slurp(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open '" + file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A number means uniform weights, anything else is a weights file.
std::vector<double> resolve_weights(const std::string& spec, std::size_t n, const char* what) {
  if (spec.empty()) throw ArgumentError(std::string("missing ") + what);
  char* end = nullptr;
  const double v = std::strtod(spec.c_str(), &end);
  if (end && *end == '\0') {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ArgumentError(std::string(what) + " must be finite and nonnegative");
    return std::vector<double>(n, v);
  }
  std::vector<double> w = load_weights_csv(spec);
  if (w.size() != n)
    throw ArgumentError(std::string(what) + " has " + std::to_string(w.size()) +
                        " entries for " + std::to_string(n) + " instances");
  return w;
}

LabelKind label_kind_for(const std::string& task) {
  if (task == "svr-path" || task == "hetero") return LabelKind::real;
  if (task == "rank-path") return LabelKind::graded;
  return LabelKind::binary;
}

// Training data, kernel and problem exactly as a run builds them.
struct Built {
  Dataset train;
  NormalizationSpec norm;
  std::shared_ptr<const KernelMatrix> kernel;
  std::shared_ptr<DualProblem> prob;
  PairSet pairs;
};

Built build_problem(const RunConfig& cfg) {
  Built b;
  const std::string train = cfg.path("train");
  if (train.empty()) throw ArgumentError("--train is required");
  Normalized nd = normalize(load_libsvm(train, label_kind_for(cfg.task)),
                            parse_norm_mode(cfg.normalize));
  b.train = std::move(nd.data);
  b.norm = std::move(nd.spec);
  b.kernel = std::make_shared<const KernelMatrix>(b.train, cfg.kernel);
  if (cfg.task == "svr-path" || cfg.task == "hetero") {
    b.prob = std::make_shared<DualProblem>(
        DualProblem::regression(b.kernel, b.train.labels(), cfg.epsilon, cfg.kernel.ridge));
  } else if (cfg.task == "rank-path") {
    b.pairs = build_pairs(b.train);
    if (b.pairs.empty()) throw ArgumentError("training data has no preference pairs");
    b.prob = std::make_shared<DualProblem>(
        DualProblem::ranking(b.kernel, b.pairs, cfg.kernel.ridge));
  } else {
    b.prob = std::make_shared<DualProblem>(
        DualProblem::classification(b.kernel, b.train.labels(), cfg.kernel.ridge));
  }
  return b;
}

Dataset load_validation(const RunConfig& cfg, const Built& b) {
  Dataset v = load_libsvm(cfg.path("validation"), label_kind_for(cfg.task), b.train.dim());
  return b.norm.apply(v);
}

// Selection output shared by the training commands and validate-path.
json write_selection(const RunConfig& cfg, const Built& b, const PathTrace& trace,
                     const std::string& file) {
  const Dataset val = load_validation(cfg, b);
  const ValidationKernel vk(*b.prob, val);
  std::ofstream out = open_out(file);
  json summary;
  if (cfg.task == "svr-path") {
    const SquaredLossBest best = squared_loss_best_theta(trace, vk, val.labels());
    out.precision(17);
    out << "theta,loss\n" << best.theta << ',' << best.loss << '\n';
    summary = {{"best_theta", best.theta}, {"loss", best.loss}};
  } else {
    SelectionPath sp;
    bool maximize = false;
    if (cfg.task == "rank-path") {
      sp = ndcg_path(trace, vk, val.labels(), val.queries(), cfg.k);
      maximize = true;
    } else {
      std::vector<double> costs;
      if (!cfg.path("validation_costs").empty()) {
        costs = load_weights_csv(cfg.path("validation_costs"));
        if (costs.size() != val.size())
          throw ArgumentError("validation costs do not match the validation set");
      }
      sp = zero_one_error_path(trace, vk, val.labels(), costs);
    }
    write_selection_csv(out, sp);
    const auto& best = sp.best(maximize);
    summary = {{"pieces", sp.pieces.size()},
               {"best_from", best.from},
               {"best_to", best.to},
               {"best_metric", best.metric}};
  }
  return summary;
}

void write_manifest(const std::string& prefix, const RunConfig& cfg, const json& outputs,
                    const json& summary) {
  json m;
  m["config"] = json::parse(to_json(cfg));
  m["version"] = version_string;
#if defined(__clang__)
  m["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  m["compiler"] = std::string("gcc ") + __VERSION__;
#endif
#ifdef _OPENMP
  m["openmp"] = _OPENMP;
#endif
  m["seed"] = cfg.seed;
  m["outputs"] = outputs;
  m["summary"] = summary;
  open_out(prefix + ".manifest.json") << m.dump(2) << '\n';
}

void write_trace_files(const std::string& prefix, const Built& b, const PathTrace& t,
                       json& outputs) {
  {
    std::ofstream out = open_out(prefix + ".trace.csv");
    if (b.prob->kind() == ProblemKind::regression)
      write_svr_trace_csv(out, t, b.prob->instances());
    else
      write_trace_csv(out, t);
  }
  open_out(prefix + ".trace.json") << trace_to_json(t);
  outputs["trace_csv"] = prefix + ".trace.csv";
  outputs["trace_json"] = prefix + ".trace.json";
}

json trace_summary(const PathTrace& t, const KktReport& kkt, double path_seconds,
                   double setup_seconds) {
  return {{"events", t.breakpoints()},
          {"mean_margin", t.mean_margin_size()},
          {"start_method", t.start_method},
          {"refreshes", t.refreshes},
          {"ridge_escalations", t.ridge_escalations},
          {"terminal_kkt", kkt.max()},
          {"path_seconds", path_seconds},
          {"setup_seconds", setup_seconds}};
}

void print_summary(const json& s) { std::cout << s.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Commands

int cmd_path(RunConfig& cfg, const std::string& prefix) {
  const auto t0 = clock_type::now();
  Built b = build_problem(cfg);
  const std::size_t n = b.prob->kind() == ProblemKind::ranking ? b.pairs.size()
                                                              : b.prob->instances();
  std::vector<double> c_old, c_new;
  if (cfg.task == "rank-path") {
    c_old = pair_weights(b.train, b.pairs, PairWeightMode::flat, cfg.c0);
    c_new = pair_weights(b.train, b.pairs, PairWeightMode::relevance, cfg.c0);
  } else if (cfg.task == "covshift") {
    const std::vector<double> r = load_weights_csv(cfg.path("ratios"));
    if (r.size() != n) throw ArgumentError("one importance ratio per instance is required");
    c_old.assign(n, cfg.c0);
    c_new.resize(n);
    for (std::size_t i = 0; i < n; ++i) c_new[i] = cfg.c0 * r[i];
  } else {
    c_old = resolve_weights(cfg.path("c_old"), n, "--c-old");
    c_new = resolve_weights(cfg.path("c_new"), n, "--c-new");
  }
  const std::vector<double> a = expand_weights(*b.prob, c_old);
  const std::vector<double> z = expand_weights(*b.prob, c_new);
  const PathOptions opt = cfg.path_options();
  SolutionState start = smo_solve(*b.prob, a, nullptr, cfg.smo_config());
  const double setup = seconds_since(t0);

  const auto t1 = clock_type::now();
  PathTrace t = cfg.task == "covshift"
                    ? covariate_shift_path(*b.prob, start, cfg.c0,
                                           load_weights_csv(cfg.path("ratios")), opt)
                    : follow_path(*b.prob, start, a, z, opt);
  const double path_seconds = seconds_since(t1);

  const KktReport kkt = kkt_report(*b.prob, t.terminal, z);
  json outputs;
  write_trace_files(prefix, b, t, outputs);
  json summary = trace_summary(t, kkt, path_seconds, setup);
  if (cfg.task == "rank-path") {
    std::size_t mmax = 0;
    for (const auto& e : t.events) mmax = std::max(mmax, e.m);
    summary["pairs"] = b.pairs.size();
    summary["max_margin"] = mmax;
    std::ofstream pf = open_out(prefix + ".pairs.csv");
    pf << "pair,i,j\n";
    for (std::size_t k = 0; k < b.pairs.size(); ++k)
      pf << k << ',' << b.pairs[k].first << ',' << b.pairs[k].second << '\n';
    outputs["pairs"] = prefix + ".pairs.csv";
  }
  if (!cfg.path("validation").empty()) {
    summary["selection"] = write_selection(cfg, b, t, prefix + ".selection.csv");
    outputs["selection"] = prefix + ".selection.csv";
  }
  write_manifest(prefix, cfg, outputs, summary);
  print_summary(summary);
  return ok;
}

int cmd_validate_path(RunConfig& cfg, const std::string& prefix, const std::string& manifest) {
  const json m = json::parse(slurp(manifest));
  RunConfig run = run_config_from_json(m.at("config").dump());
  if (!cfg.path("validation").empty()) run.paths["validation"] = cfg.path("validation");
  if (!cfg.path("validation_costs").empty())
    run.paths["validation_costs"] = cfg.path("validation_costs");
  if (cfg.params.count("k")) run.k = cfg.k;
  if (run.path("validation").empty()) throw ArgumentError("--validation is required");
  const std::string trace_file =
      cfg.path("trace_json", m.at("outputs").value("trace_json", std::string()));
  const PathTrace trace = trace_from_json(slurp(trace_file));
  const Built b = build_problem(run);
  json outputs;
  json summary = write_selection(run, b, trace, prefix + ".selection.csv");
  outputs["selection"] = prefix + ".selection.csv";
  cfg.paths["manifest"] = manifest;
  cfg.paths["trace_json"] = trace_file;
  write_manifest(prefix, cfg, outputs, summary);
  print_summary(summary);
  return ok;
}

int cmd_gen_data(RunConfig& cfg, const std::string& prefix, const std::string& kind) {
  json outputs;
  const auto n = static_cast<std::size_t>(cfg.param("n", 400));
  if (kind == "toy") {
    ToyData t = gen_toy_classification(n, cfg.seed);
    save_libsvm(prefix + ".libsvm", t.data);
    std::vector<double> costs, c_old, c_new;
    const double c1_from = cfg.param("c1_from", 0.0), c1_to = cfg.param("c1_to", 10.0);
    const double c2 = cfg.param("c2", 10.0);
    for (int g : t.cost_group) {
      costs.push_back(g);
      c_old.push_back(g == 1 ? c1_from : c2);
      c_new.push_back(g == 1 ? c1_to : c2);
    }
    save_weights(prefix + ".costs.csv", costs);
    save_weights(prefix + ".c_old.csv", c_old);
    save_weights(prefix + ".c_new.csv", c_new);
    outputs = {{"data", prefix + ".libsvm"},
               {"costs", prefix + ".costs.csv"},
               {"c_old", prefix + ".c_old.csv"},
               {"c_new", prefix + ".c_new.csv"}};
  } else if (kind == "timeseries") {
    save_libsvm(prefix + ".libsvm", rdp_features(gen_price_series(n + 21, cfg.seed)));
    outputs = {{"data", prefix + ".libsvm"}};
  } else if (kind == "regression") {
    const auto p = static_cast<std::size_t>(cfg.param("p", 1));
    save_libsvm(prefix + ".libsvm", gen_two_regime_regression(n, p, cfg.seed));
    outputs = {{"data", prefix + ".libsvm"}};
  } else if (kind == "ranking") {
    const auto q = static_cast<std::size_t>(cfg.param("queries", 10));
    const auto d = static_cast<std::size_t>(cfg.param("docs", 10));
    const auto p = static_cast<std::size_t>(cfg.param("p", 5));
    const int g = static_cast<int>(cfg.param("grades", 2));
    save_libsvm(prefix + ".libsvm", gen_ranking(q, d, p, g, cfg.seed));
    outputs = {{"data", prefix + ".libsvm"}};
  } else if (kind == "tsvm") {
    const auto k = static_cast<std::size_t>(cfg.param("unlabeled", 100));
    const std::size_t total = (n + k + 3) / 4 * 4;
    ToyData t = gen_toy_classification(total, cfg.seed);
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(cfg.seed ^ 0x5eedULL);
    for (std::size_t i = total; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    Dataset lab(t.data.dim(), LabelKind::binary), unl(t.data.dim(), LabelKind::real);
    for (std::size_t r = 0; r < n + k; ++r) {
      if (r < n)
        lab.push_back(t.data.row(idx[r]), t.data.label(idx[r]));
      else
        unl.push_back(t.data.row(idx[r]), 0.0);
    }
    save_libsvm(prefix + ".libsvm", lab);
    save_libsvm(prefix + ".unlabeled.libsvm", unl);
    outputs = {{"data", prefix + ".libsvm"}, {"unlabeled", prefix + ".unlabeled.libsvm"}};
  } else {
    throw ArgumentError("unknown data kind '" + kind + "'");
  }
  cfg.paths["kind"] = kind;
  write_manifest(prefix, cfg, outputs, json::object());
  print_summary(outputs);
  return ok;
}

int cmd_tsvm(RunConfig& cfg, const std::string& prefix) {
  Normalized lab = normalize(load_libsvm(cfg.path("train"), LabelKind::binary),
                             parse_norm_mode(cfg.normalize));
  Dataset unl = lab.spec.apply(
      load_libsvm(cfg.path("unlabeled"), LabelKind::real, lab.data.dim()));
  TsvmConfig tc;
  tc.c = cfg.c0;
  tc.c_star = cfg.param("c_star", cfg.c0);
  tc.path = cfg.path_options();
  const auto t0 = clock_type::now();
  TsvmResult r = tsvm_train(lab.data, unl, cfg.kernel, tc);
  const double secs = seconds_since(t0);
  {
    std::ofstream out = open_out(prefix + ".labels.csv");
    for (double y : r.labels) out << (y > 0 ? "1" : "-1") << '\n';
  }
  {
    std::ofstream out = open_out(prefix + ".log.csv");
    out.precision(17);
    out << "round,what,c_neg,c_pos,objective,first,second\n";
    for (const auto& e : r.log)
      out << e.round << ',' << e.what << ',' << e.c_neg << ',' << e.c_pos << ','
          << e.objective << ',' << e.first << ',' << e.second << '\n';
  }
  json summary = {{"positive_quota", r.positive_quota},
                  {"rounds", r.rounds},
                  {"round_bound", tsvm_round_bound(tc.c_star, r.c_neg0, r.c_pos0)},
                  {"switches", r.switches},
                  {"rejected", r.rejected},
                  {"path_failures", r.path_failures},
                  {"seconds", secs}};
  write_manifest(prefix, cfg,
                 {{"labels", prefix + ".labels.csv"}, {"log", prefix + ".log.csv"}}, summary);
  print_summary(summary);
  return ok;
}

int cmd_online(RunConfig& cfg, const std::string& prefix) {
  Normalized nd = normalize(load_libsvm(cfg.path("train"), LabelKind::binary),
                            parse_norm_mode(cfg.normalize));
  const Dataset& all = nd.data;
  const auto window = static_cast<std::size_t>(cfg.param("window", 100));
  const auto step = static_cast<std::size_t>(cfg.param("step", 5));
  const auto updates = static_cast<std::size_t>(cfg.param("updates", 5));
  if (window + step * updates > all.size())
    throw ArgumentError("not enough rows for the requested window and updates");
  std::vector<std::size_t> rows(window);
  std::iota(rows.begin(), rows.end(), 0);
  const PathOptions opt = cfg.path_options();
  OnlineWindow w = make_online_window(all.subset(rows), cfg.kernel, cfg.c0, cfg.a, opt);
  std::ofstream out = open_out(prefix + ".log.csv");
  out.precision(17);
  out << "update,events,terminal_kkt,max_dropped_alpha,seconds\n";
  double worst = 0.0, total = 0.0;
  for (std::size_t u = 0; u < updates; ++u) {
    std::vector<std::size_t> in(step);
    std::iota(in.begin(), in.end(), window + u * step);
    const auto t0 = clock_type::now();
    OnlineStep s = online_window_update(w, all.subset(in), step, opt);
    const double secs = seconds_since(t0);
    double dropped = 0.0;
    for (double a : s.dropped_alpha) dropped = std::max(dropped, std::abs(a));
    out << u + 1 << ',' << s.trace.breakpoints() << ',' << s.kkt.max() << ',' << dropped << ','
        << secs << '\n';
    worst = std::max(worst, s.kkt.max());
    total += secs;
  }
  json summary = {{"updates", updates}, {"worst_kkt", worst}, {"seconds", total}};
  write_manifest(prefix, cfg, {{"log", prefix + ".log.csv"}}, summary);
  print_summary(summary);
  return ok;
}

int cmd_hetero(RunConfig& cfg, const std::string& prefix) {
  Built b = build_problem(cfg);
  HeteroConfig hc;
  hc.c0 = cfg.c0;
  hc.epsilon = cfg.epsilon;
  hc.cap = cfg.param("cap", 100.0);
  hc.max_iter = static_cast<std::size_t>(cfg.param("max_iter", 50));
  hc.path = cfg.path_options();
  const HeteroResult r = heteroscedastic_fit(*b.prob, b.train.labels(), hc);
  {
    std::ofstream out = open_out(prefix + ".log.csv");
    out.precision(17);
    out << "iteration,relative_change,events,kkt\n";
    for (const auto& h : r.log)
      out << h.iteration << ',' << h.relative_change << ',' << h.events << ',' << h.kkt << '\n';
  }
  save_weights(prefix + ".weights.csv", r.weights);
  json summary = {{"converged", r.converged}, {"iterations", r.log.size()}};
  write_manifest(prefix, cfg,
                 {{"log", prefix + ".log.csv"}, {"weights", prefix + ".weights.csv"}}, summary);
  print_summary(summary);
  return r.converged ? ok : solver;
}

int cmd_bench(RunConfig& cfg, const std::string& prefix) {
  const auto n = static_cast<std::size_t>(cfg.param("n", 400));
  const auto seeds = static_cast<std::size_t>(cfg.param("seeds", 10));
  BenchOptions bo;
  bo.reps = static_cast<std::size_t>(cfg.param("reps", 3));
  bo.grid = static_cast<std::size_t>(cfg.param("grid", 0));
  bo.clear_cache = cfg.param("clear_cache", 0) != 0;
  bo.run_smo = cfg.param("no_smo", 0) == 0;
  bo.smo = cfg.smo_config();
  bo.path = cfg.path_options();
  std::ofstream out = open_out(prefix + ".bench.csv");
  out.precision(17);
  out << "seed,n,events,mean_margin,path_seconds,smo_seconds,speedup,smo_solves,smo_failures,"
         "error\n";
  std::vector<double> events, margins, speedups;
  for (std::size_t s = 0; s < seeds; ++s) {
    const std::uint64_t seed = cfg.seed + s;
    try {
      ToyExperiment t = make_toy_experiment(n, seed, cfg.kernel, cfg.param("c1_from", 0.0),
                                            cfg.param("c1_to", 10.0), cfg.param("c2", 10.0));
      const SolutionState start = smo_solve(*t.problem, t.c_old, nullptr, bo.smo);
      const BenchReport r = bench_path_vs_smo(*t.problem, start, t.c_old, t.c_new, bo);
      out << seed << ',' << n << ',' << r.events << ',' << r.mean_margin << ','
          << r.path_seconds << ',' << r.smo_seconds << ',' << r.speedup() << ','
          << r.smo_solves << ',' << r.smo_failures << ",\n";
      events.push_back(static_cast<double>(r.events));
      margins.push_back(r.mean_margin);
      if (bo.run_smo) speedups.push_back(r.speedup());
    } catch (const std::exception& e) {
      out << seed << ',' << n << ",,,,,,,," << '"' << e.what() << "\"\n";
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  json summary = {{"n", n},
                  {"completed", events.size()},
                  {"mean_events", mean(events)},
                  {"mean_margin", mean(margins)},
                  {"median_speedup", median(speedups)}};
  write_manifest(prefix, cfg, {{"bench", prefix + ".bench.csv"}}, summary);
  print_summary(summary);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted SVM solution paths"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string);

  RunConfig cfg;
  std::string kernel = "gaussian", prefix = "wsvm_out", kind = "toy", manifest;
  std::map<std::string, std::string> files;
  std::map<std::string, double> nums;
  std::set<std::string> defaulted;

  auto common = [&](CLI::App* s) {
    s->add_option("--kernel", kernel, "gaussian or linear")->capture_default_str();
    s->add_option("--gamma", cfg.kernel.gamma, "Gaussian width (scaled by 1/p)")
        ->capture_default_str();
    s->add_option("--ridge", cfg.kernel.ridge, "diagonal added to Q")->capture_default_str();
    s->add_option("--normalize", cfg.normalize, "none, unit-box or signed-box")
        ->capture_default_str();
    s->add_option("--seed", cfg.seed)->capture_default_str();
    s->add_option("--tau", cfg.tol.tau, "SMO stopping gap")->capture_default_str();
    s->add_option("--refresh-every", cfg.tol.refresh_every, "events between refreshes")
        ->capture_default_str();
    s->add_option("--residual-tol", cfg.tol.residual_tol)->capture_default_str();
    s->add_option("--out", prefix, "output file prefix")->capture_default_str();
  };
  auto file = [&](CLI::App* s, const std::string& flag, const std::string& role,
                  const std::string& help) { s->add_option(flag, files[role], help); };
  auto num = [&](CLI::App* s, const std::string& flag, const std::string& name, double def,
                 const std::string& help) {
    nums[name] = def;
    defaulted.insert(name);
    s->add_option(flag, nums[name], help)->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen-data", "generate synthetic data sets");
  common(gen);
  gen->add_option("--kind", kind, "toy, timeseries, regression, ranking or tsvm")
      ->capture_default_str();
  gen->add_option("--n", nums["n"], "instances (labeled for tsvm, days for timeseries)");
  gen->add_option("--p", nums["p"], "input dimension");
  gen->add_option("--queries", nums["queries"]);
  gen->add_option("--docs", nums["docs"], "documents per query");
  gen->add_option("--grades", nums["grades"], "largest relevance grade");
  gen->add_option("--unlabeled", nums["unlabeled"], "unlabeled count for tsvm");
  gen->add_option("--c1-from", nums["c1_from"]);
  gen->add_option("--c1-to", nums["c1_to"]);
  gen->add_option("--c2", nums["c2"]);

  auto path_cmd = [&](const char* name, const char* help, bool validation = true) {
    auto* s = app.add_subcommand(name, help);
    common(s);
    file(s, "--train", "train", "training data (LIBSVM)");
    if (validation)
      file(s, "--validation", "validation", "validation data for the selection path");
    s->add_option("--c0", cfg.c0, "base weight")->capture_default_str();
    return s;
  };
  auto* cls = path_cmd("classify-path", "weighted SVM classification path");
  file(cls, "--c-old", "c_old", "start weights: a number or a weights file");
  file(cls, "--c-new", "c_new", "end weights: a number or a weights file");
  file(cls, "--validation-costs", "validation_costs", "per-point misclassification costs");
  auto* svr = path_cmd("svr-path", "weighted SVR path");
  file(svr, "--c-old", "c_old", "start weights: a number or a weights file");
  file(svr, "--c-new", "c_new", "end weights: a number or a weights file");
  svr->add_option("--epsilon", cfg.epsilon)->capture_default_str();
  auto* rank = path_cmd("rank-path", "ranking SVM path from flat to relevance pair weights");
  rank->add_option("--k", cfg.k, "NDCG cutoff")->capture_default_str();
  auto* cov = path_cmd("covshift", "path from uniform weights to importance-weighted ones");
  file(cov, "--ratios", "ratios", "importance ratios, one per line");
  file(cov, "--validation-costs", "validation_costs", "per-point misclassification costs");

  auto* ts = path_cmd("tsvm", "transductive SVM by weight paths", false);
  file(ts, "--unlabeled", "unlabeled", "unlabeled inputs (LIBSVM, label 0)");
  num(ts, "--c-star", "c_star", 1.0, "final unlabeled weight");
  auto* onl = path_cmd("online", "sliding-window time-series updates", false);
  onl->add_option("--a", cfg.a, "schedule steepness")->capture_default_str();
  num(onl, "--window", "window", 100, "window size");
  num(onl, "--step", "step", 5, "instances added and dropped per update");
  num(onl, "--updates", "updates", 5, "number of updates");
  auto* het = path_cmd("hetero", "heteroscedastic SVR reweighting", false);
  het->add_option("--epsilon", cfg.epsilon)->capture_default_str();
  num(het, "--cap", "cap", 100, "weight cap as a multiple of C0");
  num(het, "--max-iter", "max_iter", 50, "reweighting iterations");

  auto* bench = app.add_subcommand("bench", "path versus SMO at every breakpoint on toy data");
  common(bench);
  num(bench, "--n", "n", 400, "training size");
  num(bench, "--seeds", "seeds", 10, "consecutive seeds from --seed");
  num(bench, "--reps", "reps", 3, "repetitions per cell (median reported)");
  num(bench, "--grid", "grid", 0, "SMO at this many uniform θ instead of breakpoints");
  num(bench, "--c1-from", "c1_from", 0, "");
  num(bench, "--c1-to", "c1_to", 10, "");
  num(bench, "--c2", "c2", 10, "");
  bool clear_cache = false, no_smo = false;
  bench->add_flag("--clear-cache", clear_cache, "drop cached kernel rows between timed units");
  bench->add_flag("--no-smo", no_smo, "time the path only");

  auto* val = app.add_subcommand("validate-path", "selection path from a saved trace");
  common(val);
  val->add_option("--manifest", manifest, "manifest of the training run")->required();
  file(val, "--validation", "validation", "validation data (overrides the manifest)");
  file(val, "--validation-costs", "validation_costs", "per-point misclassification costs");
  file(val, "--trace-json", "trace_json", "trace sidecar (overrides the manifest)");
  val->add_option("--k", nums["k"], "NDCG cutoff");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.task = sub->get_name();
  try {
    cfg.kernel.kind = parse_kernel_kind(kernel);
    auto flag_of = [](std::string name) {
      std::replace(name.begin(), name.end(), '_', '-');
      return "--" + name;
    };
    for (const auto& [role, f] : files) {
      const CLI::Option* o = sub->get_option_no_throw(flag_of(role));
      if (o && o->count() > 0) cfg.paths[role] = f;
    }
    for (const auto& [name, v] : nums) {
      const CLI::Option* o = sub->get_option_no_throw(flag_of(name));
      if (o && (o->count() > 0 || defaulted.count(name))) cfg.params[name] = v;
    }
    if (cfg.task == "bench") {
      cfg.params["clear_cache"] = clear_cache;
      cfg.params["no_smo"] = no_smo;
    }
    if (cfg.task == "validate-path" && sub->count("--k"))
      cfg.k = static_cast<std::size_t>(nums["k"]);
    cfg.validate();

    if (cfg.task == "gen-data") return cmd_gen_data(cfg, prefix, kind);
    if (cfg.task == "validate-path") return cmd_validate_path(cfg, prefix, manifest);
    if (cfg.task == "tsvm") return cmd_tsvm(cfg, prefix);
    if (cfg.task == "online") return cmd_online(cfg, prefix);
    if (cfg.task == "hetero") return cmd_hetero(cfg, prefix);
    if (cfg.task == "bench") return cmd_bench(cfg, prefix);
    return cmd_path(cfg, prefix);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return parse;
  } catch (const PathError& e) {
    std::cerr << "path error: " << e.what() << '\n';
    return path;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return solver;
  } catch (const SingularityError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return solver;
  } catch (const json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return parse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io;
  }
}
