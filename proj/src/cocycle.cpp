#include "fracspec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracspec/error.hpp"

namespace fracspec {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kUpper = 4294967296.0;           // 2^32
constexpr double kLower = 1.0 / 4294967296.0;     // 2^-32

}  // namespace

double Mat2::max_abs() const {
  return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

std::array<double, 2> operator*(const Mat2& m, const std::array<double, 2>& v) {
  return {m.a * v[0] + m.b * v[1], m.c * v[0] + m.d * v[1]};
}

double det(const Mat2& m) {
  const double bc = m.b * m.c;
  const double err = std::fma(-m.b, m.c, bc);  // bc - b*c exactly
  return std::fma(m.a, m.d, -bc) + err;
}

double spectral_norm(const Mat2& m) {
  const double p = std::hypot(m.a + m.d, m.c - m.b);
  const double q = std::hypot(m.a - m.d, m.b + m.c);
  return 0.5 * (p + q);
}

double min_singular_value(const Mat2& m) {
  const double s = spectral_norm(m);
  return s == 0.0 ? 0.0 : std::abs(det(m)) / s;
}

Mat2 transfer_matrix(double v, double energy) {
  if (!std::isfinite(v) || !std::isfinite(energy)) {
    throw ValidationError("transfer_matrix: non-finite input");
  }
  return {energy - v, -1.0, 1.0, 0.0};
}

Mat2 ScaledMatrix::represented() const {
  const double f = std::exp(log_scale);
  return {unit.a * f, unit.b * f, unit.c * f, unit.d * f};
}

double ScaledMatrix::log_norm() const { return log_scale + std::log(spectral_norm(unit)); }

double ScaledMatrix::determinant() const {
  const double du = det(unit);
  if (du == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(du)) + 2.0 * log_scale), du);
}

void ScaledMatrix::normalize() {
  const double mx = unit.max_abs();
  if (mx == 0.0 || !std::isfinite(mx)) return;
  int e = 0;
  std::frexp(mx, &e);  // mx in [2^(e-1), 2^e)
  unit = {std::ldexp(unit.a, -e), std::ldexp(unit.b, -e), std::ldexp(unit.c, -e),
          std::ldexp(unit.d, -e)};
  // max entry now in [1/2, 1)
  log_scale += e * kLn2;
}

ScaledMatrix operator*(const ScaledMatrix& x, const ScaledMatrix& y) {
  ScaledMatrix r{x.unit * y.unit, x.log_scale + y.log_scale};
  const double mx = r.unit.max_abs();
  if (mx > kUpper || mx < kLower) r.normalize();
  return r;
}

ScaledMatrix site_transfer(const PotentialSpec& spec, Site n, double energy) {
  if (!spec.in_domain(n)) {
    throw DomainError("site " + std::to_string(n) + " is outside the half-line");
  }
  const Barrier* b = spec.find(n);
  if (b == nullptr || !b->log_only()) {
    return {transfer_matrix(b == nullptr ? 0.0 : b->value, energy), 0.0};
  }
  // T = e^{lv} * ((E e^{-lv} - 1), -e^{-lv}; e^{-lv}, 0)
  const double inv = std::exp(-b->log_value);
  return {{energy * inv - 1.0, -inv, inv, 0.0}, b->log_value};
}

ScaledMatrix free_power(double energy, Site count) {
  ScaledMatrix result = ScaledMatrix::identity();
  ScaledMatrix base{transfer_matrix(0.0, energy), 0.0};
  while (count > 0) {
    if (count & 1) result = base * result;
    count >>= 1;
    if (count > 0) base = base * base;
  }
  return result;
}

ScaledMatrix propagate(const PotentialSpec& spec, double energy, Site k, Site m) {
  if (k > m) throw ArgumentError("propagate: requires k <= m");
  if (!spec.in_domain(k)) {
    throw DomainError("propagate: site " + std::to_string(k) + " is outside the half-line");
  }
  ScaledMatrix acc = ScaledMatrix::identity();
  Site next = k;  // first site not yet multiplied in
  for (const auto& b : spec.barriers()) {
    if (b.site < k) continue;
    if (b.site > m) break;
    if (b.site > next) acc = free_power(energy, b.site - next) * acc;
    acc = site_transfer(spec, b.site, energy) * acc;
    next = b.site + 1;
  }
  if (next <= m) acc = free_power(energy, m - next + 1) * acc;
  acc.normalize();
  return acc;
}

ScaledMatrix propagate_stepwise(const PotentialSpec& spec, double energy, Site k, Site m) {
  if (k > m) throw ArgumentError("propagate: requires k <= m");
  ScaledMatrix acc = ScaledMatrix::identity();
  for (Site j = k; j <= m; ++j) acc = site_transfer(spec, j, energy) * acc;
  acc.normalize();
  return acc;
}

double lyapunov_estimate(const PotentialSpec& spec, double energy, Site n) {
  if (n < 1) throw ArgumentError("lyapunov_estimate: requires n >= 1");
  return propagate(spec, energy, 1, n).log_norm() / static_cast<double>(n);
}

InverseNormEstimate min_inverse_norm(const PotentialSpec& spec, Site n, double grid_step) {
  if (!(grid_step > 0.0)) throw ArgumentError("min_inverse_norm: grid_step must be positive");
  if (n < 2) return {};
  constexpr double kRound = 1.0 + 8.0 * std::numeric_limits<double>::epsilon();

  const auto cells = static_cast<long>(std::ceil(4.0 / grid_step));
  InverseNormEstimate out{std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
  for (long i = 0; i <= cells; ++i) {
    const double e0 = std::min(2.0, -2.0 + static_cast<double>(i) * grid_step);
    const double width = i == cells ? 0.0 : std::min(grid_step, 2.0 - e0);

    // Product rule over the cell [e0, e0 + width]:
    //   sup ||Phi_j(E) - Phi_j(e0)|| <= (||T_j(e0)|| + w) D_{j-1} + w ||Phi_{j-1}(e0)||
    // carried in the same scaled units as the product itself.
    Mat2 acc = Mat2::identity();
    double drift = 0.0;
    double scale = 0.0;
    for (Site j = 1; j <= n - 1; ++j) {
      const ScaledMatrix t = site_transfer(spec, j, e0);
      const double shrink = std::exp(-t.log_scale);
      const double w = width * shrink;
      drift = ((spectral_norm(t.unit) + w) * drift + w * spectral_norm(acc)) * kRound;
      acc = t.unit * acc;
      scale += t.log_scale;
      const double mx = acc.max_abs();
      if (mx > kUpper) {
        int e = 0;
        std::frexp(mx, &e);
        acc = {std::ldexp(acc.a, -e), std::ldexp(acc.b, -e), std::ldexp(acc.c, -e),
               std::ldexp(acc.d, -e)};
        drift = std::ldexp(drift, -e);
        scale += e * kLn2;
      }
    }
    const double node_norm = spectral_norm(acc);
    out.grid_minimum = std::min(out.grid_minimum, std::exp(-(std::log(node_norm) + scale)));
    const double bound = std::exp(-(std::log((node_norm + drift) * kRound) + scale));
    out.certified = std::min(out.certified, bound);
  }
  return out;
}

}  // namespace fracspec
