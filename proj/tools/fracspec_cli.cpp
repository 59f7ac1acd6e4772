#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracspec/config.hpp"
#include "fracspec/run.hpp"

namespace {

const char* error_kind(int code) {
  if (code == fracspec::kExitConfig) return "config";
  if (code == fracspec::kExitInput) return "input";
  if (code >= fracspec::kExitVerifyBase) return "verify";
  return "runtime";
}

int fail(int code, const std::string& message) {
  const nlohmann::json diag = {{"error", error_kind(code)}, {"exit_code", code}, {"message", message}};
  std::cerr << diag.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-potential spectral measures: construction, m-functions, dimension estimates, checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", fracspec::kToolVersion);

  // Every flag maps to a config key; values go through the same parser as config files.
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const Flag flags[] = {
      {"--spec", "spec", "potential spec JSON"},
      {"--ledger", "ledger", "construction ledger JSON"},
      {"--out", "out", "output file (construct, verify, report) or directory (mfunc, dims)"},
      {"--kind", "kind", "construct: thm1 | sparse | wholeline"},
      {"--suite", "suite", "verify: jl | dt | dkl | thm1 | growth | lyapunov | ledger | cocycle | oracle | ess"},
      {"--e-grid", "e_grid", "energy grid lo:hi:n (linear by default)"},
      {"--eps-grid", "eps_grid", "eps grid lo:hi:n (log by default)"},
      {"--delta-grid", "delta_grid", "imaginary-part grid lo:hi:n (log by default)"},
      {"--theta-points", "theta_points", "boundary angles j pi / n"},
      {"--theta", "theta", "boundary angle for dims windows"},
      {"--side", "side", "plus | minus | line"},
      {"--source", "source", "dims mass source: proxy | oracle"},
      {"--m-normalization", "m_normalization", "JL/DT m-function: weyl | rank_one"},
      {"--oracle-n", "oracle_n", "truncation size for oracle measures"},
      {"--precision", "precision", "double | ext:<bits>"},
      {"--workers", "workers", "worker threads"},
      {"--seed", "seed", "seed for sampled suites"},
      {"--stages", "stages", "construction stages (per side for wholeline)"},
      {"--k-max", "k_max", "largest k of the square-site construction"},
      {"--first-site", "first_site", "first barrier site of the sparse construction"},
      {"--grid-step", "grid_step", "energy step for C_n bounds"},
      {"--margin", "margin", "barrier value margin"},
      {"--eps0", "eps0", "first eps of the whole-line schedule"},
      {"--eps-ratio", "eps_ratio", "eps_{k+1} / eps_k"},
      {"--samples", "samples", "sample count of the cocycle suite"},
      {"--audit-points", "audit_points", "energy points of the thm1 audit"},
      {"--divergence-threshold", "divergence_threshold", "alpha-derivative divergence threshold"},
      {"--g-threshold", "g_threshold", "liminf threshold of the G ratio"},
      {"--jl-slack", "jl_slack", "JL constant slack"},
      {"--dt-slack", "dt_slack", "DT bound slack"},
      {"--dkl-slack", "dkl_slack", "DKL comparison slack"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : flags) options[f.key] = app.add_option(f.name, values[f.key], f.help);
  std::string alphas, config_path;
  auto* alphas_opt = app.add_option("--alphas", alphas, "comma-separated alpha values");
  app.add_option("--config", config_path, "JSON config; flags override its keys");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "echo the effective config and exit");

  const char* commands[][2] = {{"construct", "build a sparse potential (and ledger)"},
                               {"mfunc", "m-function sweeps"},
                               {"dims", "local dimension panels"},
                               {"verify", "run a check suite"},
                               {"report", "aggregate JSON summary"}};
  for (const auto& c : commands) app.add_subcommand(c[0], c[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail(fracspec::kExitConfig, e.what());
  }

  fracspec::RunConfig config;
  try {
    nlohmann::json doc = config_path.empty() ? fracspec::to_json(fracspec::RunConfig{})
                                             : fracspec::to_json(fracspec::parse_config(config_path, false));
    doc["command"] = app.get_subcommands().front()->get_name();
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) doc[key] = values[key];
    }
    if (alphas_opt->count() > 0) {
      doc["alphas"] = nlohmann::json::array();
      for (const auto& a : CLI::detail::split(alphas, ',')) doc["alphas"].push_back(a);
    }
    config = fracspec::config_from_json(doc);
  } catch (const std::exception& e) {
    return fail(fracspec::kExitConfig, e.what());
  }
  if (print_config) {
    std::cout << fracspec::to_json(config).dump(2) << "\n";
    return 0;
  }

  const fracspec::RunResult r = fracspec::run(config);
  if (r.exit_code != fracspec::kExitOk) return fail(r.exit_code, r.message);
  if (!r.message.empty()) std::cout << r.message << "\n";
  for (const auto& path : r.outputs) std::cerr << "wrote " << path << "\n";
  return 0;
}
