#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fracspec/herglotz.hpp"
#include "fracspec/potential.hpp"

namespace fracspec {

// ---- square-site construction ------------------------------------------------

struct Thm1Stage {
  int k = 0;
  Site site = 0;          // k^2
  double c_n = 0.0;       // certified lower bound of C_{k^2}
  double log_value = 0.0;
};

struct Thm1Build {
  PotentialSpec spec{Domain::half_line};
  std::vector<Thm1Stage> stages;
  double grid_step = 0.0;
  double margin = 0.0;
};

/// V(k^2) = max{2 (k+1)^(k+1) / C_{k^2}, 4} * (1 + margin) for k = 2..k_max.
Thm1Build build_thm1_detailed(int k_max, double grid_step, double margin = 1e-2);
PotentialSpec build_thm1(int k_max, double grid_step);

struct Thm1Audit {
  int k = 0;
  double min_product = 0.0;    // min_E ||T_{k^2}(E)|| * C_{k^2}
  double threshold = 0.0;      // (k+1)^(k+1)
  double min_log_max_norm = 0.0;       // min_E ln max_{u in Sol(E)} ||u||_{k^2}
  double min_log_max_norm_next = 0.0;  // same at k^2 + 1, the first length that sees V(k^2)
  bool product_ok = false;
  bool norm_ok = false;
  bool norm_next_ok = false;
};
/// Re-check of the per-k inequalities on `energy_points` equispaced energies in [-2, 2].
std::vector<Thm1Audit> audit_thm1(const Thm1Build& build, int energy_points);

// ---- sparse zero-dimensional construction -----------------------------------

/// Sites first_site * 2^(n-1); log-values meet the growth condition plus `slack`.
/// Stages whose value exceeds 1e300 need extended precision (bits > 0).
PotentialSpec build_sparse(Site first_site, int n_stages, double slack, unsigned extended_bits = 0);

struct SparseChainAudit {
  int n = 0;
  Site site = 0;
  double min_log_norm = 0.0;  // min_E ln ||Phi_{L_n}(E)||
  double chain_bound = 0.0;   // ln V(L_n) - sum_{k<n} ln V(L_k) - n ln C
  double min_lyapunov = 0.0;  // min_E (1/L_n) ln ||Phi_{L_n}(E)||
  bool chain_ok = false;
};
/// The product chain ||Phi_{L_n}|| >= C^-n V(L_n) / prod_{k<n} V(L_k) on an
/// energy grid, with C = 2 max ||free stretch|| measured on the same grid.
std::vector<SparseChainAudit> audit_sparse(const PotentialSpec& spec,
                                           const std::vector<double>& energies);

// ---- alternating whole-line construction ------------------------------------

enum class LineSide { plus, minus };

struct LedgerStage {
  int stage = 0;  // 1-based
  LineSide side = LineSide::plus;
  Site site = 0;  // whole-line site of the new barrier
  double log_value = 0.0;
  std::string log_value_text;
  double alpha = 0.0;     // alpha_k = 1/(k+1)
  double eps_prev = 0.0;  // eps_{k-1}, 0 for the first stage
  double eps = 0.0;       // eps_k
  Site padding = 0;       // zero sites between the previous barrier on this side and the new one
  ScalingForm form = ScalingForm::delta_one_minus_alpha;
  CertificateGrids grids;
  double certificate_worst = 0.0;
  double growth_slack = 0.0;
};

using ConstructionLedger = std::vector<LedgerStage>;

struct WholelineOptions {
  int stages_per_side = 3;
  double eps0 = 0.9;        // eps_1
  double eps_ratio = 0.45;  // eps_{k+1} = ratio * eps_k, must be < 1/2
  double margin = 1e-2;     // barrier value margin over the growth threshold
  Site max_padding = Site{1} << 20;
  CertificateGrids grids;
  ScalingForm form = ScalingForm::delta_one_minus_alpha;
};

struct WholelineBuild {
  PotentialSpec spec{Domain::whole_line};
  ConstructionLedger ledger;
};

/// Stage k certifies its side, with the new barrier in place, on two windows:
/// exponent from alpha_{k-1} on [eps_k, eps_{k-1}] (k >= 2) and from alpha_k on
/// [eps_k / 2, eps_k]. The report carries the worse of the two.
CertificateReport stage_certificate(const PotentialSpec& half_line, int stage, double eps_prev,
                                    double eps, const CertificateGrids& grids, ScalingForm form);

WholelineBuild build_wholeline(const WholelineOptions& options);

/// Half-line restriction of a whole-line spec on the given side (minus is reflected).
PotentialSpec side_half_line(const PotentialSpec& line, LineSide side);
const char* to_string(LineSide side);
LineSide line_side_from_string(const std::string& s);

nlohmann::json ledger_to_json(const ConstructionLedger& ledger);
ConstructionLedger ledger_from_json(const nlohmann::json& doc);

struct StageReplay {
  int stage = 0;
  LineSide side = LineSide::plus;
  bool eps_ok = false;     // eps_k < eps_{k-1} / 2 and chained with the previous stage
  bool alpha_ok = false;   // alpha_k = 1/(k+1)
  bool side_ok = false;    // sides alternate starting with plus
  bool value_ok = false;   // spec value at the site matches the ledger
  bool growth_ok = false;  // growth condition at this barrier's index on its side
  bool certificate_ok = false;
  double certificate_worst = 0.0;
  bool passed() const {
    return eps_ok && alpha_ok && side_ok && value_ok && growth_ok && certificate_ok;
  }
  std::string failures() const;
};

struct ReplayReport {
  std::vector<StageReplay> stages;
  bool gaps_ok = false;
  bool passed() const;
  /// First failing stage (1-based), 0 when everything passed.
  int first_failure() const;
};

/// Re-checks every ledger invariant and stage certificate against `spec`.
/// Throws IntegrityError when the barrier sites of spec and ledger differ.
ReplayReport replay_ledger(const PotentialSpec& spec, const ConstructionLedger& ledger);

std::string decimal(double x);

}  // namespace fracspec
