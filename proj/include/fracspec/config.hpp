#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracspec/potential.hpp"

namespace fracspec {

#ifndef FRACSPEC_VERSION
#define FRACSPEC_VERSION "0.0.0"
#endif
inline constexpr const char* kToolVersion = FRACSPEC_VERSION;

/// n points on [lo, hi], log-spaced or equispaced. Text form "lo:hi:n", with
/// an optional ":log" or ":lin" suffix overriding the per-grid default.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  bool log = false;
  std::vector<double> points() const;  // ascending
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};
GridSpec parse_grid(const std::string& text, bool default_log);
std::string to_string(const GridSpec& grid);

/// "double" or "ext:<bits>" with bits >= 256.
struct Precision {
  unsigned bits = 0;  // 0 = double
  bool extended() const { return bits > 0; }
  friend bool operator==(const Precision&, const Precision&) = default;
};
Precision parse_precision(const std::string& text);
std::string to_string(const Precision& p);

struct RunConfig {
  std::string command;  // construct | mfunc | dims | verify | report
  std::string kind;     // construct: thm1 | sparse | wholeline
  std::string suite;    // verify suite name
  std::string spec;
  std::string ledger;
  std::string out;

  GridSpec e_grid{-1.9, 1.9, 50, false};
  GridSpec eps_grid{1e-3, 1e-1, 16, true};
  GridSpec delta_grid{1e-3, 1.0, 64, true};
  int theta_points = 8;
  double theta = 0.0;  // boundary angle for dims windows
  std::string side = "plus";
  std::string source = "proxy";
  std::string m_normalization = "weyl";  // JL/DT partner of (u_theta, v_theta): weyl | rank_one
  Site oracle_n = 2000;
  std::vector<double> alphas{0.25, 0.5, 0.75};

  Precision precision;
  unsigned workers = 1;
  std::uint64_t seed = 1;

  int stages = 3;
  int k_max = 5;
  Site first_site = 10;
  double grid_step = 1e-3;
  double margin = 1e-2;
  double eps0 = 0.9;
  double eps_ratio = 0.45;
  int certificate_energy_points = 1000;
  int certificate_delta_points = 64;
  int audit_points = 1000;
  int sup_theta_points = 512;
  double classify_length = 2000.0;
  Site ess_n = 1000;
  double ess_resolution = 0.05;
  int samples = 1000;

  double divergence_threshold = 1e6;
  double g_threshold = 1e-2;
  double jl_slack = 0.05;
  double dt_slack = 0.02;
  double dkl_slack = 1e-9;
  double circle_tol = 1e-6;
  double det_tol = 1e-10;
  double oracle_tol = 1e-6;
  double ess_gap_tol = 0.02;
  double scaling_tol = 0.02;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> suites = {
      "jl", "dt", "dkl", "thm1", "growth", "lyapunov", "ledger", "cocycle", "oracle", "ess"};
  return suites;
}
/// Index into verify_suites(); throws ValidationError for unknown names.
int suite_index(const std::string& suite);

/// Required keys the config lacks for its command, in a fixed order.
std::vector<std::string> missing_keys(const RunConfig& config);
/// Throws ValidationError listing every missing key or naming the bad value.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys are rejected by name; absent keys take their defaults.
/// With `check` false the result may still lack required keys (partial configs
/// completed by command-line flags).
RunConfig config_from_json(const nlohmann::json& doc, bool check = true);
RunConfig parse_config(const std::string& path, bool check = true);

/// FNV-1a 64 of the canonical config dump without `workers` and `out`,
/// which must not change results. 16 lowercase hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace fracspec
