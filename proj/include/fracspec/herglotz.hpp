#pragma once

#include <complex>
#include <vector>

#include "fracspec/potential.hpp"

namespace fracspec {

using Complex = std::complex<double>;

struct HerglotzSample {
  Complex z;
  Complex value;
  bool truncated = false;   // continued fraction did not reach the barrier support
  double tail_bound = 0.0;  // bound on |value - exact| when truncated
};

/// Herglotz root of m^2 + z m + 1 = 0 (|m| < 1): the free half-line m-function.
Complex m_free(Complex z);

/// m-function of delta_1 for the theta = 0 half-line operator, by backward
/// continued fraction closed with m_free past `depth`. Free stretches are
/// crossed in O(1) using the fixed points of the free step.
HerglotzSample m_continued_fraction(const PotentialSpec& half_line, Complex z, Site depth);
HerglotzSample m_continued_fraction(const PotentialSpec& half_line, Complex z);

/// Same value, one site at a time with no closed-form jumps. Test oracle.
Complex m_continued_fraction_stepwise(const PotentialSpec& half_line, Complex z, Site depth);

/// m_theta = m / (1 - tan(theta) m) for theta != pi/2.
Complex rank_one(Complex m, double theta);

/// theta in [0, pi) for half-line specs; theta == pi/2 evaluates the once-shifted potential.
HerglotzSample m_halfline(const PotentialSpec& half_line, double theta, Complex z, Site depth);
HerglotzSample m_halfline(const PotentialSpec& half_line, double theta, Complex z);

bool is_half_pi(double theta);

/// Image circle of {m_theta(z) : theta != pi/2}; passes through 0.
struct ThetaFamily {
  Complex base;  // theta = 0
  Complex center;
  double radius = 0.0;

  double sup_abs() const { return std::abs(center) + radius; }
};
ThetaFamily theta_family(Complex m0);

struct ThetaSup {
  double circle = 0.0;   // sup over the rank-one circle
  double shifted = 0.0;  // |m_{pi/2}(z)| from the shifted operator
  double sup() const { return circle > shifted ? circle : shifted; }
};
ThetaSup sup_over_theta(const PotentialSpec& half_line, Complex z);

/// Brute-force maximum of |m_theta(z)| over `points` equispaced theta in [0, pi)
/// (pi/2 via the shifted operator), refined by golden-section search around the
/// best grid cell. Each m_theta comes from a continued fraction with the
/// boundary term folded into V(1), independently of the Moebius formula.
double sup_over_theta_grid(const PotentialSpec& half_line, Complex z, int points);

/// Half-line m-functions of a whole-line spec:
/// m_+^theta for H_+ - tan(theta) delta_1, m_-^theta for H_- - cot(theta) delta_0.
Complex m_plus(const PotentialSpec& line, double theta, Complex z);
Complex m_minus(const PotentialSpec& line, double theta, Complex z);

/// Borel transform of mu_{delta_0} + mu_{delta_1}:
/// M = (m_+ + m_-) / (1 - m_+ m_-) with m_+- the theta = 0 half-line functions.
HerglotzSample M_wholeline(const PotentialSpec& line, Complex z);

struct DklSample {
  Complex z;
  double abs_M = 0.0;
  ThetaSup sup_plus;
  double g11 = 0.0;       // |<delta_1, (H - z)^{-1} delta_1>|
  bool holds = false;     // |M| <= sup_theta |m_+^theta| + slack
  bool g11_holds = false; // |G(1,1)| <= sup_theta |m_+^theta| + slack
};
DklSample check_dkl(const PotentialSpec& line, Complex z, double slack = 1e-9);

/// Which m-function the JL and DT checks pair with (u_theta, v_theta).
enum class MNormalization {
  weyl,     // (cos t m + sin t) / (cos t - sin t m) = sec^2 t m_theta + tan t, the exact partner
  rank_one  // m_theta = m / (1 - tan t m), off by theta-dependent factors
};

/// Boundary-condition Weyl function (cos t m + sin t) / (cos t - sin t m), m at theta = 0.
Complex m_weyl(Complex m, double theta);

struct JlReport {
  double L = 0.0;
  double ratio = 0.0;  // ||u||_L / ||v||_L
  double abs_m = 0.0;
  double lower = 0.0;  // (2 - sqrt 3) / |m|
  double upper = 0.0;  // (2 + sqrt 3) / |m|
  double slack = 0.0;  // multiplicative allowance on the constants
  bool holds = false;
};
JlReport check_jl(const PotentialSpec& half_line, double energy, double theta, double eps,
                  double slack = 0.05, MNormalization norm = MNormalization::weyl);

/// Which power of b(L) = ||u_theta||_L enters the lower bound.
enum class DtForm {
  squared,   // 1 / (4 eps ||u||_L^2), the form the downstream argument relies on
  as_printed // 1 / (4 eps ||u||_L)
};

struct DtReport {
  double L = 0.0;
  double b = 0.0;  // ||u_theta||_L
  double im_m = 0.0;
  double bound = 0.0;
  bool holds = false;
};
DtReport check_dt(const PotentialSpec& half_line, double energy, double theta, double eps,
                  DtForm form = DtForm::squared, double slack = 0.02,
                  MNormalization norm = MNormalization::weyl);

/// eps omega^2 / (b (1 + eps omega)^2) <= im m_theta(E + i eps) at an arbitrary L.
DtReport check_dt_general(const PotentialSpec& half_line, double energy, double theta,
                          double eps, double L, DtForm form = DtForm::squared,
                          MNormalization norm = MNormalization::weyl);

enum class ScalingForm {
  delta_alpha,           // delta^alpha sup |m_theta| <= 1
  delta_one_minus_alpha  // delta^(1 - alpha) sup |m_theta| <= 1
};

struct CertificateGrids {
  int energy_points = 1000;  // on [-2, 2], endpoints included
  int delta_points = 64;     // log-spaced on [delta_lo, delta_hi]
};

struct CertificateReport {
  bool holds = false;
  double exponent = 0.0;
  double worst = 0.0;  // max of delta^exponent * sup over the grids
  double worst_energy = 0.0;
  double worst_delta = 0.0;
  CertificateGrids grids;
  ScalingForm form = ScalingForm::delta_alpha;
};

CertificateReport certificate_smallness(const PotentialSpec& half_line, double alpha,
                                        double delta_lo, double delta_hi,
                                        const CertificateGrids& grids = {},
                                        ScalingForm form = ScalingForm::delta_alpha);

std::vector<double> log_grid(double lo, double hi, int points);
std::vector<double> linear_grid(double lo, double hi, int points);

const char* to_string(ScalingForm form);
const char* to_string(MNormalization norm);
MNormalization m_normalization_from_string(const std::string& s);
ScalingForm scaling_form_from_string(const std::string& s);

}  // namespace fracspec
