#pragma once

#include <string>
#include <vector>

#include "fracspec/config.hpp"
#include "fracspec/constructor.hpp"
#include "fracspec/potential.hpp"
#include "fracspec/report.hpp"

namespace fracspec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitVerifyBase = 10;

struct RunResult {
  int exit_code = kExitOk;
  std::string message;               // diagnostic for nonzero exits
  std::vector<std::string> outputs;  // files written
};

/// Validates the config, dispatches the command and maps errors to exit codes:
/// config problems -> 2, unreadable or invalid spec/ledger files -> 3,
/// failed verify suite -> 10 + suite index, anything else -> 1.
RunResult run(const RunConfig& config);

struct SuiteResult {
  Table table;
  bool passed = false;
  std::string failure;  // first failing case, e.g. the ledger stage
};

/// Runs one verify suite in memory on `config.workers` threads. `ledger` is
/// required for the ledger suite.
SuiteResult run_suite(const RunConfig& config, const PotentialSpec& spec,
                      const ConstructionLedger* ledger = nullptr);

/// theta_j = j pi / n for j < n.
std::vector<double> theta_grid(int n);

PotentialSpec load_spec(const std::string& path);
ConstructionLedger load_ledger(const std::string& path);

}  // namespace fracspec
