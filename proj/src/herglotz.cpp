#include "fracspec/herglotz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracspec/error.hpp"
#include "fracspec/parallel.hpp"
#include "fracspec/solution.hpp"

namespace fracspec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_upper(Complex z) {
  if (!(z.imag() > 0.0)) throw DomainError("m-functions need im z > 0");
}

void require_half_line(const PotentialSpec& spec) {
  if (spec.domain() != Domain::half_line) {
    throw ArgumentError("expected a half-line potential");
  }
}

// 1 / (V - w) for a barrier, staying finite for log-only values.
Complex barrier_step(const Barrier& b, Complex w) {
  if (!b.log_only()) return 1.0 / (b.value - w);
  const double inv = std::exp(-b.log_value);
  return inv / (1.0 - w * inv);
}

// Power M^k of the free step M = ((0, -1), (1, z)), which maps (x, y) with
// w = x / y to w' = -1 / (z + w), together with G = sum_{j<k} r_j^* r_j over
// the bottom rows r_j of M^j. Stored as P = e^a Pt and G = e^(2a) Gt.
struct FreePower {
  Complex p00 = 1.0, p01 = 0.0, p10 = 0.0, p11 = 1.0;
  double g00 = 0.0, g11 = 0.0;
  Complex g01 = 0.0;
  double a = 0.0;
};

// M^(j+k) from M^j (first) and M^k (second): P = P2 P1, G = G1 + P1^* G2 P1.
FreePower combine(const FreePower& f, const FreePower& s) {
  FreePower o;
  o.p00 = s.p00 * f.p00 + s.p01 * f.p10;
  o.p01 = s.p00 * f.p01 + s.p01 * f.p11;
  o.p10 = s.p10 * f.p00 + s.p11 * f.p10;
  o.p11 = s.p10 * f.p01 + s.p11 * f.p11;
  // H = G2 P1 with G2 = ((g00, g01), (conj g01, g11)).
  const Complex h00 = s.g00 * f.p00 + s.g01 * f.p10;
  const Complex h01 = s.g00 * f.p01 + s.g01 * f.p11;
  const Complex h10 = std::conj(s.g01) * f.p00 + s.g11 * f.p10;
  const Complex h11 = std::conj(s.g01) * f.p01 + s.g11 * f.p11;
  const double w = std::exp(-2.0 * s.a);
  o.g00 = w * f.g00 + (std::conj(f.p00) * h00 + std::conj(f.p10) * h10).real();
  o.g11 = w * f.g11 + (std::conj(f.p01) * h01 + std::conj(f.p11) * h11).real();
  o.g01 = w * f.g01 + std::conj(f.p00) * h01 + std::conj(f.p10) * h11;
  o.a = f.a + s.a;
  const double mx = std::max(std::max(std::abs(o.p00), std::abs(o.p01)),
                             std::max(std::abs(o.p10), std::abs(o.p11)));
  if (mx > 1e32) {
    const double inv = 1.0 / mx;
    o.p00 *= inv, o.p01 *= inv, o.p10 *= inv, o.p11 *= inv;
    o.g00 *= inv * inv, o.g11 *= inv * inv, o.g01 *= inv * inv;
    o.a += std::log(mx);
  }
  return o;
}

// k free steps m -> -1 / (z + m) applied to m. The imaginary part comes from
//   im(x_{j+1} conj y_{j+1}) = im(x_j conj y_j) + im(z) |y_j|^2,
// a sum of positive terms, so it keeps its relative accuracy near the band
// edges where the two fixed points of the step coalesce.
Complex free_jump(Complex m, Complex z, Site k) {
  if (k == 0) return m;
  if (k < 4) {
    for (Site i = 0; i < k; ++i) m = -1.0 / (z + m);
    return m;
  }
  FreePower step;
  step.p00 = 0.0, step.p01 = -1.0, step.p10 = 1.0, step.p11 = z;
  step.g11 = 1.0;
  FreePower acc;
  bool have = false;
  for (Site r = k; r > 0; r >>= 1) {
    if (r & 1) {
      acc = have ? combine(acc, step) : step;
      have = true;
    }
    if (r > 1) step = combine(step, step);
  }
  const Complex x = acc.p00 * m + acc.p01;
  const Complex y = acc.p10 * m + acc.p11;
  const double quad = acc.g00 * std::norm(m) + acc.g11 + 2.0 * (std::conj(m) * acc.g01).real();
  const double im = (std::exp(-2.0 * acc.a) * m.imag() + z.imag() * quad) / std::norm(y);
  if (!(im > 0.0)) {
    // Rounding in the quadratic form beat the true value; step exactly instead.
    for (Site i = 0; i < k; ++i) m = -1.0 / (z + m);
    return m;
  }
  return {(x / y).real(), im};
}

// Radius of the image of the closed upper half-plane under w -> (a w + b) / (c w + d),
// given the log of |ad - bc|.
double image_radius(Complex c, Complex d, double log_det) {
  const double im = std::abs((std::conj(c) * d).imag());
  if (im == 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(log_det) / (2.0 * im);
}

// Weyl-disc diameter for the continued fraction cut at `depth`.
double truncation_bound(const PotentialSpec& spec, Complex z, Site depth) {
  // Composition S_1 o ... o S_depth with S_n(w) = 1 / (a_n - w), a_n = V(n) - z,
  // i.e. the matrix product A_1 ... A_depth with A_n = ((0, 1), (-1, a_n)).
  Complex p00 = 1.0, p01 = 0.0, p10 = 0.0, p11 = 1.0;
  double log_det = 0.0;
  for (Site n = 1; n <= depth; ++n) {
    const Barrier* b = spec.find(n);
    Complex a;
    double scale = 0.0;
    Complex one = 1.0;
    if (b != nullptr && b->log_only()) {
      // A_n = e^{lv} * ((0, e^-lv), (-e^-lv, 1 - z e^-lv))
      const double inv = std::exp(-b->log_value);
      one = inv;
      a = 1.0 - z * inv;
      scale = b->log_value;
    } else {
      a = (b == nullptr ? 0.0 : b->value) - z;
    }
    // P * ((0, one), (-one, a))
    const Complex n00 = -p01 * one, n01 = p00 * one + p01 * a;
    const Complex n10 = -p11 * one, n11 = p10 * one + p11 * a;
    p00 = n00, p01 = n01, p10 = n10, p11 = n11;
    log_det += 2.0 * scale;
    const double mx = std::max(std::max(std::abs(p00), std::abs(p01)),
                               std::max(std::abs(p10), std::abs(p11)));
    if (mx > 1e100 || mx < 1e-100) {
      p00 /= mx, p01 /= mx, p10 /= mx, p11 /= mx;
      log_det -= 2.0 * std::log(mx);
    }
  }
  return 2.0 * image_radius(p10, p11, log_det);
}

// |m_{pi/2}| and the rank-one circle at z, with the shifted spec supplied.
ThetaSup sup_with_shift(const PotentialSpec& spec, const PotentialSpec& shifted, Complex z) {
  ThetaSup out;
  const Complex m0 = m_continued_fraction(spec, z).value;
  out.circle = theta_family(m0).sup_abs();
  out.shifted = std::abs(m_continued_fraction(shifted, z).value);
  return out;
}

}  // namespace

Complex m_free(Complex z) {
  require_upper(z);
  const Complex s = std::sqrt((z - 2.0) * (z + 2.0));
  const Complex r1 = (-z - s) * 0.5, r2 = (-z + s) * 0.5;
  // Product of the roots is 1: take the large one and invert it.
  const Complex big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  return 1.0 / big;
}

HerglotzSample m_continued_fraction(const PotentialSpec& half_line, Complex z, Site depth) {
  require_half_line(half_line);
  require_upper(z);
  if (depth < 0) throw ArgumentError("continued fraction depth must be nonnegative");
  const Complex q = m_free(z);
  Complex m = q;      // m at site `top`
  Site top = depth + 1;
  const auto barriers = half_line.barriers();
  for (auto it = barriers.rbegin(); it != barriers.rend(); ++it) {
    if (it->site > depth) continue;
    m = free_jump(m, z, top - 1 - it->site);
    m = barrier_step(*it, z + m);
    top = it->site;
  }
  m = free_jump(m, z, top - 1);

  HerglotzSample out{z, m};
  if (depth < half_line.last_positive_site()) {
    out.truncated = true;
    out.tail_bound = truncation_bound(half_line, z, depth);
  }
  return out;
}

HerglotzSample m_continued_fraction(const PotentialSpec& half_line, Complex z) {
  return m_continued_fraction(half_line, z, half_line.last_positive_site());
}

Complex m_continued_fraction_stepwise(const PotentialSpec& half_line, Complex z, Site depth) {
  require_half_line(half_line);
  Complex m = m_free(z);
  for (Site n = depth; n >= 1; --n) {
    const Barrier* b = half_line.find(n);
    m = b == nullptr ? -1.0 / (z + m) : barrier_step(*b, z + m);
  }
  return m;
}

bool is_half_pi(double theta) { return std::abs(theta - 0.5 * kPi) <= 4e-16; }

Complex rank_one(Complex m, double theta) {
  if (is_half_pi(theta)) throw ArgumentError("rank_one: theta = pi/2 is the shifted operator");
  return m / (1.0 - std::tan(theta) * m);
}

HerglotzSample m_halfline(const PotentialSpec& half_line, double theta, Complex z, Site depth) {
  require_half_line(half_line);
  require_upper(z);
  if (!(theta >= 0.0 && theta < kPi)) throw ArgumentError("theta must lie in [0, pi)");
  if (is_half_pi(theta)) {
    return m_continued_fraction(shifted_left(half_line), z, std::max<Site>(0, depth - 1));
  }
  HerglotzSample s = m_continued_fraction(half_line, z, depth);
  if (theta == 0.0) return s;
  const double t = std::tan(theta);
  const Complex c = s.value;
  s.value = rank_one(c, theta);
  if (s.truncated) {
    // Image of the disc |w - c| <= r/2 under w -> w / (1 - t w).
    const double r = 0.5 * s.tail_bound;
    const double den = std::abs(std::norm(1.0 - t * c) - t * t * r * r);
    s.tail_bound = den > 0.0 ? 2.0 * r / den : std::numeric_limits<double>::infinity();
  }
  return s;
}

HerglotzSample m_halfline(const PotentialSpec& half_line, double theta, Complex z) {
  return m_halfline(half_line, theta, z, half_line.last_positive_site());
}

ThetaFamily theta_family(Complex m0) {
  if (!(m0.imag() > 0.0)) {
    throw IntegrityError("theta family: base value is not in the upper half-plane");
  }
  const double r = std::norm(m0) / (2.0 * m0.imag());
  return {m0, Complex(0.0, r), r};
}

ThetaSup sup_over_theta(const PotentialSpec& half_line, Complex z) {
  require_half_line(half_line);
  require_upper(z);
  return sup_with_shift(half_line, shifted_left(half_line), z);
}

double sup_over_theta_grid(const PotentialSpec& half_line, Complex z, int points) {
  require_half_line(half_line);
  require_upper(z);
  if (points < 3) throw ArgumentError("theta grid needs at least 3 points");
  const PotentialSpec tail = shifted_left(half_line);
  const Complex m2 = m_continued_fraction(tail, z).value;  // m at site 2
  const Barrier* first = half_line.find(1);
  const double shifted = std::abs(m2);
  // Boundary term folded into the first diagonal entry: 1 / (V(1) - tan(theta) - z - m_2).
  auto at = [&](double theta) {
    if (is_half_pi(theta)) return shifted;
    const Complex w = std::tan(theta) + z + m2;
    return std::abs(first != nullptr ? barrier_step(*first, w) : -1.0 / w);
  };

  int best = 0;
  double best_value = -1.0;
  for (int j = 0; j < points; ++j) {
    const double value = at(kPi * j / points);
    if (value > best_value) best_value = value, best = j;
  }
  // Golden-section refinement on the neighbouring cells (periodic in theta).
  const double h = kPi / points;
  double a = kPi * best / points - h, b = kPi * best / points + h;
  auto wrapped = [&](double theta) {
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) theta += kPi;
    return at(theta);
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = wrapped(c), fd = wrapped(d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = wrapped(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = wrapped(d);
    }
  }
  return std::max({best_value, fc, fd});
}

Complex m_plus(const PotentialSpec& line, double theta, Complex z) {
  return m_halfline(positive_half(line), theta, z).value;
}

Complex m_minus(const PotentialSpec& line, double theta, Complex z) {
  // H_- - cot(theta) delta_0 is the reflected half-line at pi/2 - theta.
  double reflected = 0.5 * kPi - theta;
  if (reflected < 0.0) reflected += kPi;
  return m_halfline(negative_half(line), reflected, z).value;
}

HerglotzSample M_wholeline(const PotentialSpec& line, Complex z) {
  require_upper(z);
  if (line.domain() != Domain::whole_line) throw ArgumentError("expected a whole-line potential");
  const Complex mp = m_continued_fraction(positive_half(line), z).value;
  const Complex mm = m_continued_fraction(negative_half(line), z).value;
  const Complex value = (mp + mm) / (1.0 - mp * mm);
  if (!(value.imag() > 0.0)) {
    throw IntegrityError("whole-line Borel transform left the upper half-plane");
  }
  return {z, value};
}

DklSample check_dkl(const PotentialSpec& line, Complex z, double slack) {
  if (line.domain() != Domain::whole_line) throw ArgumentError("expected a whole-line potential");
  DklSample out;
  out.z = z;
  const PotentialSpec plus = positive_half(line);
  const Complex mp = m_continued_fraction(plus, z).value;
  const Complex mm = m_continued_fraction(negative_half(line), z).value;
  out.abs_M = std::abs(M_wholeline(line, z).value);
  out.g11 = std::abs(mp / (1.0 - mp * mm));
  out.sup_plus = sup_with_shift(plus, shifted_left(plus), z);
  out.holds = out.abs_M <= out.sup_plus.sup() + slack;
  out.g11_holds = out.g11 <= out.sup_plus.sup() + slack;
  return out;
}

Complex m_weyl(Complex m, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return (c * m + s) / (c - s * m);
}

namespace {

// The m-function paired with u_theta, v_theta by the JL and DT checks (theta != pi/2).
Complex paired_m(const PotentialSpec& half_line, double theta, Complex z, MNormalization norm) {
  if (norm == MNormalization::rank_one) return m_halfline(half_line, theta, z).value;
  return m_weyl(m_halfline(half_line, 0.0, z).value, theta);
}

}  // namespace

JlReport check_jl(const PotentialSpec& half_line, double energy, double theta, double eps,
                  double slack, MNormalization norm) {
  require_half_line(half_line);
  // The shifted operator at theta = 0 is its own exact pairing.
  if (is_half_pi(theta)) return check_jl(shifted_left(half_line), energy, 0.0, eps, slack, norm);
  const ScaledFrame sf = frame_at_length_scale(half_line, energy, theta, eps);
  JlReport r;
  r.L = sf.L;
  r.ratio = std::exp(sf.frame.log_norm_u(sf.L) - sf.frame.log_norm_v(sf.L));
  r.abs_m = std::abs(paired_m(half_line, theta, Complex(energy, eps), norm));
  r.lower = (2.0 - std::sqrt(3.0)) / r.abs_m;
  r.upper = (2.0 + std::sqrt(3.0)) / r.abs_m;
  r.slack = slack;
  r.holds = r.ratio > r.lower * (1.0 - slack) && r.ratio < r.upper * (1.0 + slack);
  return r;
}

DtReport check_dt(const PotentialSpec& half_line, double energy, double theta, double eps,
                  DtForm form, double slack, MNormalization norm) {
  require_half_line(half_line);
  if (is_half_pi(theta)) return check_dt(shifted_left(half_line), energy, 0.0, eps, form, slack, norm);
  const ScaledFrame sf = frame_at_length_scale(half_line, energy, theta, eps);
  DtReport r;
  r.L = sf.L;
  const double log_b = sf.frame.log_norm_u(sf.L);
  r.b = std::exp(log_b);
  r.im_m = paired_m(half_line, theta, Complex(energy, eps), norm).imag();
  const double power = form == DtForm::squared ? 2.0 : 1.0;
  r.bound = std::exp(-std::log(4.0 * eps) - power * log_b);
  r.holds = r.im_m >= (1.0 - slack) * r.bound;
  return r;
}

DtReport check_dt_general(const PotentialSpec& half_line, double energy, double theta,
                          double eps, double L, DtForm form, MNormalization norm) {
  require_half_line(half_line);
  if (is_half_pi(theta)) {
    return check_dt_general(shifted_left(half_line), energy, 0.0, eps, L, form, norm);
  }
  if (!(L >= 1.0)) throw ArgumentError("check_dt_general: requires L >= 1");
  const SolutionFrame frame(half_line, energy, theta, static_cast<Site>(std::ceil(L)) + 1);
  DtReport r;
  r.L = L;
  const double log_b = frame.log_norm_u(L);
  r.b = std::exp(log_b);
  r.im_m = paired_m(half_line, theta, Complex(energy, eps), norm).imag();
  const double power = form == DtForm::squared ? 2.0 : 1.0;
  const double eo = eps * frame.omega(L);
  r.bound = std::exp(std::log(eps) + 2.0 * frame.log_omega(L) - power * log_b) / ((1.0 + eo) * (1.0 + eo));
  r.holds = r.im_m >= (1.0 - 1e-12) * r.bound;
  return r;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw ArgumentError("invalid log grid");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = hi;
    return out;
  }
  const double a = std::log(hi), b = std::log(lo);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  out.front() = hi;
  out.back() = lo;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (!(hi >= lo) || points < 1) throw ArgumentError("invalid linear grid");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  out.back() = hi;
  return out;
}

CertificateReport certificate_smallness(const PotentialSpec& half_line, double alpha,
                                        double delta_lo, double delta_hi,
                                        const CertificateGrids& grids, ScalingForm form) {
  require_half_line(half_line);
  if (!(delta_lo > 0.0 && delta_lo < delta_hi)) {
    throw ArgumentError("certificate: requires 0 < delta_lo < delta_hi");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("certificate: alpha must lie in (0, 1)");
  CertificateReport report;
  report.grids = grids;
  report.form = form;
  report.exponent = form == ScalingForm::delta_alpha ? alpha : 1.0 - alpha;

  const auto energies = linear_grid(-2.0, 2.0, grids.energy_points);
  const auto deltas = log_grid(delta_lo, delta_hi, grids.delta_points);
  const PotentialSpec shifted = shifted_left(half_line);
  struct Worst {
    double value = -1.0, delta = 0.0;
  };
  std::vector<Worst> per_energy(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) {
    Worst w;
    for (double d : deltas) {
      const double v = std::pow(d, report.exponent) *
                       sup_with_shift(half_line, shifted, Complex(energies[i], d)).sup();
      if (v > w.value) w = {v, d};
    }
    per_energy[i] = w;
  });
  report.worst = -1.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (per_energy[i].value > report.worst) {
      report.worst = per_energy[i].value;
      report.worst_energy = energies[i];
      report.worst_delta = per_energy[i].delta;
    }
  }
  report.holds = report.worst <= 1.0;
  return report;
}

const char* to_string(ScalingForm form) {
  return form == ScalingForm::delta_alpha ? "delta_alpha" : "delta_one_minus_alpha";
}

ScalingForm scaling_form_from_string(const std::string& s) {
  if (s == "delta_alpha") return ScalingForm::delta_alpha;
  if (s == "delta_one_minus_alpha") return ScalingForm::delta_one_minus_alpha;
  throw ValidationError("unknown scaling form '" + s + "'");
}

const char* to_string(MNormalization norm) {
  return norm == MNormalization::weyl ? "weyl" : "rank_one";
}

MNormalization m_normalization_from_string(const std::string& s) {
  if (s == "weyl") return MNormalization::weyl;
  if (s == "rank_one") return MNormalization::rank_one;
  throw ValidationError("unknown m normalization '" + s + "'");
}

}  // namespace fracspec
