#include "fracspec/solution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracspec/cocycle.hpp"
#include "fracspec/error.hpp"

namespace fracspec {

namespace {

constexpr double kUpper = 4294967296.0;
constexpr double kLn2 = 0.69314718055994530942;
constexpr Site kMaxFrame = Site{1} << 26;

double scaled(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(mantissa)) + log_scale), mantissa);
}

}  // namespace

SolutionFrame::SolutionFrame(const PotentialSpec& spec, double energy, double theta, Site n_max)
    : energy_(energy), theta_(theta), n_max_(n_max) {
  if (n_max < 1) throw ArgumentError("solve: requires N >= 1");
  if (!std::isfinite(energy) || !std::isfinite(theta)) {
    throw ValidationError("solve: non-finite energy or theta");
  }
  const auto size = static_cast<std::size_t>(n_max + 2);
  u_.resize(size);
  v_.resize(size);
  scale_.resize(size);
  factor_.resize(size);

  // (a1, a0) = (u(n+1), u(n)), (b1, b0) likewise for v, all in units exp(s).
  // Carried in extended precision so the stored doubles keep W = 1 over long frames.
  using Acc = long double;
  Acc a1 = std::cos(theta), a0 = -std::sin(theta);
  Acc b1 = std::sin(theta), b0 = std::cos(theta);
  double s = 0.0;
  u_[0] = a0;
  v_[0] = b0;
  u_[1] = a1;
  v_[1] = b1;
  for (Site n = 1; n <= n_max; ++n) {
    const ScaledMatrix t = site_transfer(spec, n, energy);
    const Acc ta = t.unit.a, tb = t.unit.b, tc = t.unit.c, td = t.unit.d;
    const Acc na1 = ta * a1 + tb * a0;
    const Acc na0 = tc * a1 + td * a0;
    const Acc nb1 = ta * b1 + tb * b0;
    const Acc nb0 = tc * b1 + td * b0;
    a1 = na1, a0 = na0, b1 = nb1, b0 = nb0;
    s += t.log_scale;
    const Acc mx = std::max(std::max(std::abs(a1), std::abs(a0)), std::max(std::abs(b1), std::abs(b0)));
    if (mx > kUpper || mx < 1.0L / kUpper) {
      int e = 0;
      std::frexp(mx, &e);
      a1 = std::ldexp(a1, -e), a0 = std::ldexp(a0, -e);
      b1 = std::ldexp(b1, -e), b0 = std::ldexp(b0, -e);
      s += e * kLn2;
    }
    const auto i = static_cast<std::size_t>(n + 1);
    u_[i] = a1;
    v_[i] = b1;
    scale_[i] = s;
  }

  for (Site n = 1; n <= n_max; ++n) {
    Factor f = factor_[static_cast<std::size_t>(n - 1)];
    const auto i = static_cast<std::size_t>(n);
    // Givens update of R with the row (u(n), v(n)).
    double p = static_cast<double>(u_[i]), q = static_cast<double>(v_[i]);
    const bool empty = f.r00 == 0.0 && f.r01 == 0.0 && f.r11 == 0.0;
    if (empty || scale_[i] > f.scale) {
      const double shrink = empty ? 0.0 : std::exp(f.scale - scale_[i]);
      f.r00 *= shrink, f.r01 *= shrink, f.r11 *= shrink;
      f.scale = scale_[i];
    } else {
      const double shrink = std::exp(scale_[i] - f.scale);
      p *= shrink, q *= shrink;
    }
    const double r = std::hypot(f.r00, p);
    if (r > 0.0) {
      const double c = f.r00 / r, sn = p / r;
      const double r01 = c * f.r01 + sn * q;
      const double rest = -sn * f.r01 + c * q;
      f.r00 = r;
      f.r01 = r01;
      f.r11 = std::hypot(f.r11, rest);
    }
    factor_[i] = f;
  }
}

double SolutionFrame::u(Site n) const {
  const auto i = static_cast<std::size_t>(n);
  return scaled(static_cast<double>(u_.at(i)), scale_.at(i));
}

double SolutionFrame::v(Site n) const {
  const auto i = static_cast<std::size_t>(n);
  return scaled(static_cast<double>(v_.at(i)), scale_.at(i));
}

double SolutionFrame::log_abs_u(Site n) const {
  const auto i = static_cast<std::size_t>(n);
  return static_cast<double>(std::log(std::abs(u_.at(i)))) + scale_.at(i);
}

double SolutionFrame::log_abs_v(Site n) const {
  const auto i = static_cast<std::size_t>(n);
  return static_cast<double>(std::log(std::abs(v_.at(i)))) + scale_.at(i);
}

double SolutionFrame::wronskian(Site n) const {
  if (n < 0 || n > n_max_) throw ArgumentError("wronskian: index out of range");
  const auto i = static_cast<std::size_t>(n);
  const long double diff = u_[i + 1] * v_[i] - u_[i] * v_[i + 1];
  return scaled(static_cast<double>(diff), scale_[i] + scale_[i + 1]);
}

void SolutionFrame::check_length(double L) const {
  if (!(L >= 1.0) || L > static_cast<double>(n_max_)) {
    throw ArgumentError("truncation length L must lie in [1, N]");
  }
}

SolutionFrame::Factor SolutionFrame::factor_at(double L) const {
  check_length(L);
  const auto k = static_cast<std::size_t>(std::floor(L));
  const double frac = L - static_cast<double>(k);
  Factor f = factor_[k];
  if (frac == 0.0) return f;
  const double w = std::sqrt(frac);
  double p = w * static_cast<double>(u_[k + 1]), q = w * static_cast<double>(v_[k + 1]);
  if (scale_[k + 1] > f.scale) {
    const double shrink = std::exp(f.scale - scale_[k + 1]);
    f.r00 *= shrink, f.r01 *= shrink, f.r11 *= shrink;
    f.scale = scale_[k + 1];
  } else {
    const double shrink = std::exp(scale_[k + 1] - f.scale);
    p *= shrink, q *= shrink;
  }
  const double r = std::hypot(f.r00, p);
  const double c = f.r00 / r, sn = p / r;
  const double r01 = c * f.r01 + sn * q;
  const double rest = -sn * f.r01 + c * q;
  f.r00 = r;
  f.r01 = r01;
  f.r11 = std::hypot(f.r11, rest);
  return f;
}

double SolutionFrame::log_norm_u(double L) const {
  const Factor f = factor_at(L);
  return std::log(f.r00) + f.scale;
}

double SolutionFrame::log_norm_v(double L) const {
  const Factor f = factor_at(L);
  return std::log(std::hypot(f.r01, f.r11)) + f.scale;
}

double SolutionFrame::norm_u(double L) const { return std::exp(log_norm_u(L)); }
double SolutionFrame::norm_v(double L) const { return std::exp(log_norm_v(L)); }

double SolutionFrame::log_omega(double L) const {
  const Factor f = factor_at(L);
  if (f.r11 == 0.0 || f.r00 == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(f.r00) + std::log(f.r11) + 2.0 * f.scale;
}

double SolutionFrame::omega(double L) const { return std::exp(log_omega(L)); }

SolutionFrame::Gram SolutionFrame::gram(double L) const {
  const Factor f = factor_at(L);
  return {f.r00 * f.r00, f.r00 * f.r01, f.r01 * f.r01 + f.r11 * f.r11, 2.0 * f.scale};
}

double SolutionFrame::solve_log_omega(double log_target) const {
  if (log_omega(static_cast<double>(n_max_)) < log_target) {
    throw ArgumentError("omega stays below the target up to N; enlarge the frame");
  }
  // Smallest integer k with omega(k) >= target; omega(1) = 0.
  Site lo = 1, hi = n_max_;
  while (hi - lo > 1) {
    const Site mid = lo + (hi - lo) / 2;
    if (log_omega(static_cast<double>(mid)) >= log_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Inside [lo, lo+1] omega^2 is affine in the fractional part:
  //   det(G + f w w^T) = det G + f * w^T adj(G) w.
  const auto k = static_cast<std::size_t>(lo);
  Factor g = factor_[k];
  double p = static_cast<double>(u_[k + 1]), q = static_cast<double>(v_[k + 1]);
  const double common = std::max(g.scale, scale_[k + 1]);
  const double rs = std::exp(g.scale - common), ws = std::exp(scale_[k + 1] - common);
  g.r00 *= rs, g.r01 *= rs, g.r11 *= rs;
  p *= ws, q *= ws;
  const double det_g = (g.r00 * g.r11) * (g.r00 * g.r11);
  const double adj = (g.r11 * p) * (g.r11 * p) + (g.r00 * q - g.r01 * p) * (g.r00 * q - g.r01 * p);
  const double target_sq = std::exp(2.0 * log_target - 4.0 * common);
  double frac = (target_sq - det_g) / adj;
  frac = std::clamp(frac, 0.0, 1.0);
  return static_cast<double>(lo) + frac;
}

SolutionFrame solve(const PotentialSpec& spec, double energy, double theta, Site n_max) {
  return SolutionFrame(spec, energy, theta, n_max);
}

double norm_L(const SolutionFrame& frame, double L) { return frame.norm_u(L); }
double companion_norm(const SolutionFrame& frame, double L) { return frame.norm_v(L); }

double log_omega(const PotentialSpec& spec, double energy, double L) {
  if (!(L >= 1.0)) throw ArgumentError("omega: requires L >= 1");
  const auto n = std::max<Site>(1, static_cast<Site>(std::ceil(L)));
  return SolutionFrame(spec, energy, 0.0, n).log_omega(L);
}

double omega(const PotentialSpec& spec, double energy, double L) {
  return std::exp(log_omega(spec, energy, L));
}

ScaledFrame frame_at_length_scale(const PotentialSpec& spec, double energy, double theta,
                                  double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw DomainError("length scale: eps must be positive; 1/eps is below omega(1)");
  }
  const double target = -std::log(eps);
  Site n = std::max<Site>(32, spec.last_positive_site() + 2);
  while (true) {
    SolutionFrame frame(spec, energy, theta, n);
    if (frame.log_omega(static_cast<double>(n)) >= target) {
      const double L = frame.solve_log_omega(target);
      return {std::move(frame), L};
    }
    if (n >= kMaxFrame) {
      throw PrecisionError("length scale exceeds the maximum frame length");
    }
    n *= 2;
  }
}

double length_scale(const PotentialSpec& spec, double energy, double eps) {
  return frame_at_length_scale(spec, energy, 0.0, eps).L;
}

double subordinacy_ratio(const PotentialSpec& spec, double energy, double theta, double L) {
  if (!(L >= 1.0)) throw ArgumentError("subordinacy_ratio: requires L >= 1");
  const auto n = std::max<Site>(2, static_cast<Site>(std::ceil(L)));
  const SolutionFrame frame(spec, energy, theta, n);
  return std::exp(frame.log_norm_u(L) - frame.log_norm_v(L));
}

SubordinateTheta subordinate_theta(const PotentialSpec& spec, double energy, double L) {
  if (!(L >= 2.0)) throw ArgumentError("subordinate_theta: requires L >= 2");
  const SolutionFrame frame(spec, energy, 0.0, static_cast<Site>(std::ceil(L)));
  const auto g = frame.gram(L);
  const double trace = g.uu + g.vv;
  const double spread = std::hypot(g.uu - g.vv, 2.0 * g.uv);
  SubordinateTheta out;
  out.eigen_gap = spread / trace;
  if (out.eigen_gap <= 1e-12) {
    out.degenerate = true;
    return out;
  }
  // Coefficients (c1, c2) over (u_0, v_0); u_theta = cos(theta) u_0 - sin(theta) v_0.
  const double major = 0.5 * std::atan2(2.0 * g.uv, g.uu - g.vv);
  const double minor = major + 0.5 * std::numbers::pi;
  double theta = std::fmod(-minor, std::numbers::pi);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  out.theta = theta;
  return out;
}

}  // namespace fracspec
