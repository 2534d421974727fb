#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "wsvm/kernel.hpp"
#include "wsvm/path.hpp"

namespace wsvm {

inline constexpr std::uint64_t default_seed = 20120101;
inline constexpr const char* version_string = "0.1.0";

/// Everything needed to replay one CLI run.
struct RunConfig {
  std::string task;
  KernelSpec kernel;
  /// Input normalization: "none", "unit-box" or "signed-box".
  std::string normalize = "none";
  double c0 = 1.0;
  double a = 0.0;
  double epsilon = 0.1;
  std::size_t k = 10;
  std::uint64_t seed = default_seed;

  struct Tolerances {
    double tau = 1e-3;
    std::size_t refresh_every = 100;
    double residual_tol = 1e-6;
    double start_tol = 1e-8;
    double max_ridge = 1e-3;
    bool operator==(const Tolerances&) const = default;
  } tol;

  /// Task parameters by name (sizes, weights, flags).
  std::map<std::string, double> params;
  /// Input and output files by role ("train", "trace", ...).
  std::map<std::string, std::string> paths;

  double param(const std::string& name, double fallback) const;
  std::string path(const std::string& role, const std::string& fallback = "") const;

  PathOptions path_options() const;
  SmoConfig smo_config() const;
  /// Throws ArgumentError for unknown tasks or out-of-range values.
  void validate() const;

  bool operator==(const RunConfig& o) const;
};

bool is_known_task(const std::string& task);

std::string to_json(const RunConfig& cfg, int indent = 2);
RunConfig run_config_from_json(const std::string& text);

}  // namespace wsvm
