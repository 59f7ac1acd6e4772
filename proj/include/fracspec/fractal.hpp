#pragma once

#include <complex>
#include <string>
#include <vector>

#include "fracspec/oracle.hpp"
#include "fracspec/potential.hpp"

namespace fracspec {

enum class MassSource {
  oracle,    // eigenweights of a finite truncation
  proxy,     // 2 eps im m(E + i eps), which dominates mu(E - eps, E + eps)
  synthetic  // closed-form test measure
};
const char* to_string(MassSource source);
MassSource mass_source_from_string(const std::string& s);

/// mu(E - eps, E + eps) over a decreasing eps grid, with the Borel transform
/// m(E + i eps) alongside for the Q/R probes.
struct ScalingWindow {
  double E = 0.0;
  std::vector<double> eps;     // strictly decreasing, positive
  std::vector<double> masses;  // per eps
  std::vector<double> im_m;    // im m(E + i eps)
  std::vector<double> abs_m;   // |m(E + i eps)|
  MassSource source = MassSource::proxy;
  bool resolution_warning = false;  // oracle: < 10 eigenvalues in the smallest interval
  std::string note;
};

/// Oracle windows use a truncation of size `oracle_N` (2N+1 sites on the line).
/// The half-line minus side uses the m_-^theta convention of the whole line.
ScalingWindow scaling_window(const PotentialSpec& spec, Side side, double theta, double E,
                             const std::vector<double>& eps_grid, MassSource source,
                             Site oracle_N = 2000);

/// Symmetric test measure with density (s/2)|x - E|^(s-1) on the whole line
/// (a unit atom at E when s = 0), so that mu(E - eps, E + eps) = eps^s and
/// im m(E + i eps) = s eps^(s-1) pi / (2 sin(pi s / 2)) hold at every scale.
/// The measure is infinite for s > 0 but only its local behaviour enters.
ScalingWindow power_law_window(double E, const std::vector<double>& eps_grid, double s);

struct GammaEstimate {
  double gamma_minus = 0.0;  // min local log-log slope
  double gamma_plus = 0.0;   // max local log-log slope
  double fit = 0.0;          // least-squares log-log slope over the whole window
  std::vector<double> slopes;
  int excluded = 0;  // points dropped for zero mass
};
/// Requires at least 4 points with positive mass.
GammaEstimate gamma_estimates(const ScalingWindow& window);

enum class ScalingClass { zero, finite, infinite, indeterminate };
const char* to_string(ScalingClass c);

/// Trend of values sampled along a decreasing eps grid: all local exponents
/// of value ~ eps^p above `tol` -> zero, below -tol -> infinite, within -> finite.
ScalingClass classify_scaling(const std::vector<double>& eps, const std::vector<double>& values,
                              double tol = 0.02);

struct AlphaDerivatives {
  double upper = 0.0;  // max mass / eps^alpha over the window
  double lower = 0.0;  // min mass / eps^alpha
  bool upper_divergent = false;  // finite-scale surrogate of  upper D = infinity
  bool lower_divergent = false;  // finite-scale surrogate of  lower D = infinity
};
/// Divergent when the ratio exceeds `threshold` or the local slopes stay below
/// alpha (by more than `slope_tol`): gamma_minus for the upper and gamma_plus
/// for the lower derivative.
AlphaDerivatives alpha_derivatives(const ScalingWindow& window, double alpha,
                                   double threshold = 1e6, double slope_tol = 1e-9);

struct QrProbes {
  double Q = 0.0;  // max eps^(1-alpha) im m(E + i eps)
  double R = 0.0;  // max eps^(1-alpha) |m(E + i eps)|
  ScalingClass q_class = ScalingClass::indeterminate;
  ScalingClass r_class = ScalingClass::indeterminate;
};
QrProbes qr_probes(const ScalingWindow& window, double alpha, double tol = 0.02);
QrProbes qr_probes(const PotentialSpec& half_line, double theta, double E, double alpha,
                   const std::vector<double>& eps_grid, double tol = 0.02);

struct AlphaReport {
  double alpha = 0.0;
  AlphaDerivatives derivatives;
  ScalingClass d_class = ScalingClass::indeterminate;  // trend of mass / eps^alpha
  QrProbes probes;
  bool t_flag = false;  // E in T_inf^alpha
  bool u_flag = false;  // E in U_inf^alpha
  bool classes_agree() const;
};

struct DimensionReport {
  double E = 0.0;
  MassSource source = MassSource::proxy;
  double eps_max = 0.0, eps_min = 0.0;
  int points = 0;
  double threshold = 0.0;
  GammaEstimate gamma;
  std::vector<AlphaReport> alphas;  // ascending alpha
};
DimensionReport dimension_report(const ScalingWindow& window, const std::vector<double>& alphas,
                                 double threshold = 1e6, double tol = 0.02);

struct JltReport {
  bool applicable = false;  // probe_liminf above the threshold
  double bound = 0.0;       // eta (2 - gamma_minus) / (2 - eta)
  double weak_bound = 0.0;  // 2 eta / (2 - eta)
  bool holds = false;
  bool weak_holds = false;
};
/// probe_liminf = min over the grid of eps^(1-eta) im m(E + i eps).
JltReport jlt_check(double gamma_minus, double gamma_plus, double eta, double probe_liminf,
                    double threshold = 1e-3, double slack = 0.05);
double jlt_probe(const ScalingWindow& window, double eta);

/// G(theta, z) = im m_+^theta(z) / (im m_+^theta(z) + im m_-^theta(z)).
double g_ratio(const PotentialSpec& line, double theta, std::complex<double> z);

struct LineClassification {
  double E = 0.0;
  double theta_E = 0.0;  // boundary angle of the subordinate solution on the plus side
  double theta_minus = 0.0;  // same on the reflected minus side
  bool degenerate = false;   // Gram degenerate on either side: no classification
  bool matched = false;      // theta_minus == pi/2 - theta_E (mod pi) within tolerance
  std::vector<double> delta;
  std::vector<double> G;  // im m_+ / (im m_+ + im m_-) at theta_E
  double min_G = 0.0;
  bool liminf_flag = false;  // min_G < threshold
};
LineClassification classify_line_energy(const PotentialSpec& line, double E, double L,
                                        const std::vector<double>& delta_grid,
                                        double threshold = 1e-2, double match_tol = 0.05);

}  // namespace fracspec
