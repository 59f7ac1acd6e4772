#pragma once

#include <vector>

#include "fracspec/potential.hpp"

namespace fracspec {

/// u_theta and v_theta sampled on 0..N+1, with a running QR factor of the
/// rows (u(k), v(k)) so that Gram quantities stay accurate when one solution
/// is subordinate to the other.
///
/// Values are stored as mantissa * exp(scale) with the scale shared by u(n)
/// and v(n); the representation switches automatically once raw values would
/// leave a safe range.
class SolutionFrame {
 public:
  SolutionFrame(const PotentialSpec& spec, double energy, double theta, Site n_max);

  double theta() const { return theta_; }
  double energy() const { return energy_; }
  Site n_max() const { return n_max_; }

  // Values, overflowing to +-inf when the true magnitude is out of range.
  double u(Site n) const;
  double v(Site n) const;
  double log_abs_u(Site n) const;
  double log_abs_v(Site n) const;

  /// u(n+1)v(n) - u(n)v(n+1); identically 1 in exact arithmetic.
  double wronskian(Site n) const;

  /// ||u_theta||_L, ||v_theta||_L and their logarithms; requires 1 <= L <= N.
  double norm_u(double L) const;
  double norm_v(double L) const;
  double log_norm_u(double L) const;
  double log_norm_v(double L) const;

  /// ln omega(L) = ln sqrt(det G_L); -inf at L = 1.
  double log_omega(double L) const;
  double omega(double L) const;

  /// Gram matrix of (u_theta, v_theta) up to L, divided by exp(2 * log_scale).
  struct Gram {
    double uu = 0.0, uv = 0.0, vv = 0.0;
    double log_scale = 0.0;
  };
  Gram gram(double L) const;

  /// Leftmost L in [1, N] with omega(L) = omega_target given as a logarithm.
  /// Throws ArgumentError when omega(N) is still below the target.
  double solve_log_omega(double log_target) const;

 private:
  struct Factor {
    // Upper-triangular R with R^T R = Gram of rows 1..n, in units exp(scale).
    double r00 = 0.0, r01 = 0.0, r11 = 0.0;
    double scale = 0.0;
  };

  void check_length(double L) const;
  // R for ||.||_L including the fractional row.
  Factor factor_at(double L) const;

  double energy_;
  double theta_;
  Site n_max_;
  std::vector<long double> u_, v_;  // extended so W resolves below |u||v| * 2^-53
  std::vector<double> scale_;
  std::vector<Factor> factor_;
};

SolutionFrame solve(const PotentialSpec& spec, double energy, double theta, Site n_max);

double norm_L(const SolutionFrame& frame, double L);
// a(L) = ||v_theta||_L.
double companion_norm(const SolutionFrame& frame, double L);

double omega(const PotentialSpec& spec, double energy, double L);
double log_omega(const PotentialSpec& spec, double energy, double L);

/// Leftmost L with omega(L) = 1/eps. The frame is grown until it covers
/// the root. Throws DomainError when 1/eps < omega(1) = 0 is impossible,
/// i.e. for eps <= 0.
double length_scale(const PotentialSpec& spec, double energy, double eps);

/// Frame at `theta` long enough to evaluate everything at L(eps), together with L(eps).
struct ScaledFrame {
  SolutionFrame frame;
  double L;
};
ScaledFrame frame_at_length_scale(const PotentialSpec& spec, double energy, double theta,
                                  double eps);

double subordinacy_ratio(const PotentialSpec& spec, double energy, double theta, double L);

struct SubordinateTheta {
  double theta = 0.0;  // in [0, pi)
  bool degenerate = false;
  double eigen_gap = 0.0;  // (lambda_max - lambda_min) / trace
};

/// Boundary condition whose solution grows slowest up to L: the eigendirection
/// of G_L with the smallest eigenvalue.
SubordinateTheta subordinate_theta(const PotentialSpec& spec, double energy, double L);

// Deviation max_n |W(n) - 1| for n in [0, N] computed in MPFR arithmetic.
double wronskian_deviation_extended(const PotentialSpec& spec, double energy, double theta,
                                    Site n_max, unsigned bits);

}  // namespace fracspec
