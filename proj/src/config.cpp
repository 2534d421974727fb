#include "wsvm/config.hpp"

#include <array>
#include <cmath>

#include "json.hpp"

namespace wsvm {

namespace {

constexpr std::array<const char*, 10> tasks = {
    "classify-path", "svr-path", "rank-path", "tsvm",     "online",
    "hetero",        "covshift", "bench",     "gen-data", "validate-path"};

}  // namespace

bool is_known_task(const std::string& task) {
  for (const char* t : tasks)
    if (task == t) return true;
  return false;
}

double RunConfig::param(const std::string& name, double fallback) const {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

std::string RunConfig::path(const std::string& role, const std::string& fallback) const {
  auto it = paths.find(role);
  return it == paths.end() ? fallback : it->second;
}

PathOptions RunConfig::path_options() const {
  PathOptions o;
  o.refresh_every = tol.refresh_every;
  o.residual_tol = tol.residual_tol;
  o.start_tol = tol.start_tol;
  o.max_ridge = tol.max_ridge;
  return o;
}

SmoConfig RunConfig::smo_config() const {
  SmoConfig s;
  s.tau = tol.tau;
  return s;
}

void RunConfig::validate() const {
  if (!is_known_task(task)) throw ArgumentError("unknown task '" + task + "'");
  kernel.validate();
  parse_norm_mode(normalize);
  if (!(c0 > 0.0)) throw ArgumentError("C0 must be positive");
  if (!(a >= 0.0)) throw ArgumentError("a must be nonnegative");
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be nonnegative");
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (!(tol.tau > 0.0)) throw ArgumentError("tau must be positive");
  if (tol.refresh_every == 0) throw ArgumentError("refresh interval must be at least 1");
  if (!(tol.residual_tol > 0.0) || !(tol.start_tol > 0.0))
    throw ArgumentError("tolerances must be positive");
  for (const auto& [name, v] : params)
    if (!std::isfinite(v)) throw ArgumentError("parameter '" + name + "' is not finite");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return task == o.task && kernel.kind == o.kernel.kind && kernel.gamma == o.kernel.gamma &&
         kernel.ridge == o.kernel.ridge && normalize == o.normalize && c0 == o.c0 &&
         a == o.a && epsilon == o.epsilon && k == o.k && seed == o.seed && tol == o.tol &&
         params == o.params && paths == o.paths;
}

std::string to_json(const RunConfig& cfg, int indent) {
  nlohmann::json j;
  j["task"] = cfg.task;
  j["kernel"] = {{"kind", to_string(cfg.kernel.kind)},
                 {"gamma", cfg.kernel.gamma},
                 {"ridge", cfg.kernel.ridge}};
  j["normalize"] = cfg.normalize;
  j["c0"] = cfg.c0;
  j["a"] = cfg.a;
  j["epsilon"] = cfg.epsilon;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  j["tolerances"] = {{"tau", cfg.tol.tau},
                     {"refresh_every", cfg.tol.refresh_every},
                     {"residual_tol", cfg.tol.residual_tol},
                     {"start_tol", cfg.tol.start_tol},
                     {"max_ridge", cfg.tol.max_ridge}};
  j["params"] = cfg.params;
  j["paths"] = cfg.paths;
  return j.dump(indent);
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.task = j.at("task").get<std::string>();
    const auto& k = j.at("kernel");
    c.kernel.kind = parse_kernel_kind(k.at("kind").get<std::string>());
    c.kernel.gamma = k.at("gamma").get<double>();
    c.kernel.ridge = k.at("ridge").get<double>();
    c.normalize = j.at("normalize").get<std::string>();
    c.c0 = j.at("c0").get<double>();
    c.a = j.at("a").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.k = j.at("k").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& t = j.at("tolerances");
    c.tol.tau = t.at("tau").get<double>();
    c.tol.refresh_every = t.at("refresh_every").get<std::size_t>();
    c.tol.residual_tol = t.at("residual_tol").get<double>();
    c.tol.start_tol = t.at("start_tol").get<double>();
    c.tol.max_ridge = t.at("max_ridge").get<double>();
    c.params = j.value("params", std::map<std::string, double>{});
    c.paths = j.value("paths", std::map<std::string, std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  return c;
}

}  // namespace wsvm
