#pragma once

#include <complex>
#include <vector>

#include "fracspec/potential.hpp"

namespace fracspec {

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (off[i] couples i and i+1), plus the listed rows of the
/// orthonormal eigenvector matrix. Implicit QL with Wilkinson shifts.
struct TridiagonalEigen {
  std::vector<double> values;                 // ascending
  std::vector<std::vector<double>> rows;      // rows[r][j] = component tracked[r] of eigenvector j
};
TridiagonalEigen tridiagonal_eigen(std::vector<double> diag, std::vector<double> off,
                                   const std::vector<std::size_t>& tracked);

struct Atom {
  double energy = 0.0;
  double weight = 0.0;
};

struct AtomicMeasure {
  std::vector<Atom> atoms;  // sorted by energy
  double total() const;
};

enum class Side { plus, minus, line };
const char* to_string(Side side);
Side side_from_string(const std::string& s);

// Diagonal entries above this are split off as 1x1 blocks; their neighbours
// receive the Schur correction -1/V, which is exact up to |E| / V^2 for the
// energies of interest.
inline constexpr double kDecoupleThreshold = 1e8;

/// Spectral measure of the finite truncation:
///  - half-line spec (side must be plus): sites 1..N with V(1) - tan(theta)
///    in the corner, or sites 2..N+1 for theta = pi/2; weights |psi_j(1)|^2.
///  - whole-line spec, side plus/minus: the corresponding half-line with
///    H_+ - tan(theta) delta_1 or H_- - cot(theta) delta_0.
///  - whole-line spec, side line: sites -N..N with weights
///    |psi_j(0)|^2 + |psi_j(1)|^2 (theta ignored).
/// Dirichlet truncation at the window edge.
AtomicMeasure truncated_measure(const PotentialSpec& spec, Side side, double theta, Site N);

std::complex<double> m_truncated(const AtomicMeasure& measure, std::complex<double> z);

/// Mass of the open interval (a, b).
double interval_mass(const AtomicMeasure& measure, double a, double b);

struct EssFillReport {
  Site N = 0;
  double resolution = 0.0;
  double max_gap = 0.0;           // between consecutive eigenvalues in [-2+res, 2-res]
  std::size_t in_window = 0;
  std::size_t outliers = 0;       // eigenvalues outside [-2, 2]
  std::size_t barrier_count = 0;
};
EssFillReport ess_fill(const PotentialSpec& spec, Site N, double resolution);

}  // namespace fracspec
