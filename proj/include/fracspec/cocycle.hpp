#pragma once

#include <array>

#include "fracspec/potential.hpp"

namespace fracspec {

/// Row-major 2x2 real matrix ((a, b), (c, d)).
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }
  double max_abs() const;
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

Mat2 operator*(const Mat2& x, const Mat2& y);
std::array<double, 2> operator*(const Mat2& m, const std::array<double, 2>& v);

// ad - bc with one fma-compensated product.
double det(const Mat2& m);
// Largest singular value, closed form.
double spectral_norm(const Mat2& m);
// Smallest singular value, via |det| / norm.
double min_singular_value(const Mat2& m);

/// T(E) for potential value v: ((E - v, -1), (1, 0)).
Mat2 transfer_matrix(double v, double energy);

/// exp(log_scale) * unit, with the max-entry magnitude of `unit` kept in
/// [1/2, 2] after every public operation.
struct ScaledMatrix {
  Mat2 unit;
  double log_scale = 0.0;

  static ScaledMatrix identity() { return {}; }

  // Represented matrix; entries overflow to +-inf past double range.
  Mat2 represented() const;
  double log_norm() const;
  // Determinant of the represented matrix.
  double determinant() const;

  void normalize();
};

ScaledMatrix operator*(const ScaledMatrix& x, const ScaledMatrix& y);

/// Transfer matrix at site n as a scaled matrix; log-only barriers enter
/// through their log-value.
ScaledMatrix site_transfer(const PotentialSpec& spec, Site n, double energy);

/// Phi_{k,m}(E) = T_m(E) ... T_k(E): maps (u(k), u(k-1)) to (u(m+1), u(m)).
/// Requires k <= m; free stretches are jumped by binary powering.
ScaledMatrix propagate(const PotentialSpec& spec, double energy, Site k, Site m);

/// Same product, multiplied one site at a time. Test oracle for propagate.
ScaledMatrix propagate_stepwise(const PotentialSpec& spec, double energy, Site k, Site m);

/// T_free(E)^count for the zero potential.
ScaledMatrix free_power(double energy, Site count);

/// (1/n) ln ||Phi_n(E)||.
double lyapunov_estimate(const PotentialSpec& spec, double energy, Site n);

struct InverseNormEstimate {
  double certified = 1.0;   // <= true C_n
  double grid_minimum = 1.0;  // min over the grid nodes
  double error_band() const { return grid_minimum - certified; }
};

/// Certified lower bound of C_n = min_{E in [-2,2]} 1/||Phi_{n-1}(E)||.
InverseNormEstimate min_inverse_norm(const PotentialSpec& spec, Site n, double grid_step);

/// ln ||Phi_{k,m}(E)|| in MPFR arithmetic with the given mantissa width.
double log_norm_extended(const PotentialSpec& spec, double energy, Site k, Site m, unsigned bits);
double lyapunov_estimate_extended(const PotentialSpec& spec, double energy, Site n, unsigned bits);

}  // namespace fracspec
